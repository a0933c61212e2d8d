#include "ustat/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace ustat {

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, std::size_t arity) : text_(text), arity_(arity) {}

    Expression run() {
        Expression e;
        e.text_ = std::string(text_);
        e.arity_ = arity_;
        program_ = &e.program_;
        parse_expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        if (program_->empty()) fail("empty expression");
        e.uses_indices_ = std::any_of(e.program_.begin(), e.program_.end(),
                                      [](const auto& ins) { return ins.op == Expression::Op::Index; });
        e.max_depth_ = max_depth_;
        return e;
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    void emit(Op op, unsigned char argc = 0, std::size_t slot = 0, double value = 0.0) {
        program_->push_back({op, argc, slot, value});
        // track the evaluation stack height to size the runtime stack
        switch (op) {
            case Op::Constant:
            case Op::Arg:
            case Op::Index: ++depth_; break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow: --depth_; break;
            case Op::Min:
            case Op::Max: depth_ -= argc - 1U; break;
            default: break;
        }
        max_depth_ = std::max(max_depth_, depth_);
    }

    void parse_expr() {
        parse_term();
        for (;;) {
            if (accept('+')) {
                parse_term();
                emit(Op::Add);
            } else if (accept('-')) {
                parse_term();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }

    void parse_term() {
        parse_unary();
        for (;;) {
            if (accept('*')) {
                parse_unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                parse_unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }

    void parse_unary() {
        if (accept('-')) {
            parse_unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            parse_unary();
        } else {
            parse_power();
        }
    }

    void parse_power() {
        parse_primary();
        if (accept('^')) {
            parse_unary();
            emit(Op::Pow);
        }
    }

    void parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            parse_expr();
            expect(')');
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            parse_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string_view word = text_.substr(start, pos_ - start);
            parse_identifier(word, start);
            return;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    void parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double value = 0.0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            pos_ = start;
            fail("malformed number");
        }
        emit(Op::Constant, 0, 0, value);
    }

    void parse_identifier(std::string_view word, std::size_t start) {
        if ((word[0] == 'x' || word[0] == 'i') && word.size() > 1 &&
            std::all_of(word.begin() + 1, word.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            std::size_t k = 0;
            std::from_chars(word.data() + 1, word.data() + word.size(), k);
            if (k < 1 || k > arity_) {
                pos_ = start;
                fail("variable " + std::string(word) + " outside 1.." + std::to_string(arity_));
            }
            emit(word[0] == 'x' ? Op::Arg : Op::Index, 0, k - 1);
            return;
        }
        Op op;
        if (word == "abs") op = Op::Abs;
        else if (word == "sign") op = Op::Sign;
        else if (word == "exp") op = Op::Exp;
        else if (word == "min") op = Op::Min;
        else if (word == "max") op = Op::Max;
        else {
            pos_ = start;
            fail("unknown identifier '" + std::string(word) + "'");
        }
        expect('(');
        unsigned argc = 1;
        parse_expr();
        while (accept(',')) {
            parse_expr();
            ++argc;
        }
        expect(')');
        const bool variadic = (op == Op::Min || op == Op::Max);
        if (variadic ? argc < 2 : argc != 1) {
            pos_ = start;
            fail("wrong number of arguments to " + std::string(word));
        }
        if (argc > 255) fail("too many arguments");
        emit(op, static_cast<unsigned char>(argc));
    }

    std::string_view text_;
    std::size_t arity_;
    std::size_t pos_ = 0;
    std::vector<Expression::Instruction>* program_ = nullptr;
    std::size_t depth_ = 0;
    std::size_t max_depth_ = 0;
};

Expression Expression::parse(std::string_view text, std::size_t arity) {
    if (arity == 0) throw std::invalid_argument("expression kernel arity must be positive");
    return ExpressionParser(text, arity).run();
}

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <typename Stack>
double run_program(const std::vector<Expression::Instruction>& program, Stack& stack,
                   std::span<const double> x, std::span<const std::size_t> indices) {
    using Op = Expression::Op;
    std::size_t top = 0;  // number of live entries
    for (const auto& ins : program) {
        switch (ins.op) {
            case Op::Constant: stack[top++] = ins.value; break;
            case Op::Arg: stack[top++] = x[ins.slot]; break;
            case Op::Index: stack[top++] = static_cast<double>(indices[ins.slot] + 1); break;
            case Op::Add: --top; stack[top - 1] += stack[top]; break;
            case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::Div: --top; stack[top - 1] /= stack[top]; break;
            case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::Abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
            case Op::Sign: stack[top - 1] = sign_of(stack[top - 1]); break;
            case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::Min:
            case Op::Max: {
                const std::size_t first = top - ins.argc;
                double acc = stack[first];
                for (std::size_t k = first + 1; k < top; ++k) {
                    acc = (ins.op == Op::Min) ? std::min(acc, stack[k]) : std::max(acc, stack[k]);
                }
                top = first;
                stack[top++] = acc;
                break;
            }
        }
    }
    return stack[0];
}

}  // namespace

double Expression::evaluate(std::span<const double> x, std::span<const std::size_t> indices) const {
    if (x.size() != arity_) throw std::invalid_argument("expression: argument count does not match arity");
    if (uses_indices_ && indices.size() != arity_) {
        throw std::invalid_argument("expression: index tuple required for i<k> variables");
    }
    if (max_depth_ <= 32) {
        std::array<double, 32> stack;
        return run_program(program_, stack, x, indices);
    }
    std::vector<double> stack(max_depth_);
    return run_program(program_, stack, x, indices);
}

}  // namespace ustat
