#pragma once

// Tiny arithmetic-expression language for custom kernels.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative, binds tighter than unary minus
//   primary := number | x<k> | i<k> | func '(' expr (',' expr)* ')' | '(' expr ')'
//
// x1..xm are the kernel arguments; i1..im the 1-based sample indices of the
// tuple (weighted kernels). Functions: abs, sign, min, max, exp.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ustat {

class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::invalid_argument(what + " at position " + std::to_string(position)),
          position_(position) {}
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class Expression {
public:
    /// Parses `text` for a kernel of the given arity; variables beyond the
    /// arity are rejected.
    static Expression parse(std::string_view text, std::size_t arity);

    /// `indices` are 0-based; the i<k> variables see indices[k-1] + 1.
    /// May be empty when !uses_indices().
    [[nodiscard]] double evaluate(std::span<const double> x,
                                  std::span<const std::size_t> indices = {}) const;

    [[nodiscard]] bool uses_indices() const noexcept { return uses_indices_; }
    [[nodiscard]] std::size_t arity() const noexcept { return arity_; }
    [[nodiscard]] const std::string& text() const noexcept { return text_; }

    enum class Op : unsigned char {
        Constant, Arg, Index, Add, Sub, Mul, Div, Pow, Neg,
        Abs, Sign, Exp, Min, Max
    };
    struct Instruction {
        Op op;
        unsigned char argc;  // Min/Max take argc operands
        std::size_t slot;    // Arg/Index position
        double value;        // Constant
    };

private:
    Expression() = default;

    std::string text_;
    std::size_t arity_ = 0;
    bool uses_indices_ = false;
    std::size_t max_depth_ = 0;
    std::vector<Instruction> program_;  // postfix

    friend class ExpressionParser;
};

}  // namespace ustat
