#include "ustat/combinatorics.hpp"

#include <numeric>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ustat {
namespace {

WideCount checked_mul(WideCount a, WideCount b) {
    WideCount out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw std::overflow_error("binomial coefficient exceeds 128 bits");
    }
    return out;
}

WideCount gcd_wide(WideCount a, WideCount b) {
    while (b != 0) {
        const WideCount r = a % b;
        a = b;
        b = r;
    }
    return a;
}

void require_increasing(std::span<const std::size_t> v) {
    for (std::size_t j = 1; j < v.size(); ++j) {
        if (v[j] <= v[j - 1]) {
            throw std::invalid_argument("IncreasingTuple: indices must be strictly increasing");
        }
    }
}

}  // namespace

IncreasingTuple::IncreasingTuple(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    require_increasing(indices_);
}

IncreasingTuple::IncreasingTuple(std::initializer_list<std::size_t> indices)
    : indices_(indices) {
    require_increasing(indices_);
}

std::string IncreasingTuple::to_one_based_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        if (j > 0) os << ',';
        os << indices_[j] + 1;
    }
    os << ')';
    return os.str();
}

WideCount count_tuples_wide(std::size_t n, std::size_t m) {
    if (m > n) return 0;
    const std::size_t k = std::min(m, n - m);
    WideCount c = 1;
    // c_j = c_{j-1} * (n - k + j) / j, divided before multiplying so the
    // intermediate never exceeds the final value by more than a factor j.
    for (std::size_t j = 1; j <= k; ++j) {
        const WideCount g = gcd_wide(c, j);
        const WideCount num = static_cast<WideCount>(n - k + j) / (j / g);
        c = checked_mul(c / g, num);
    }
    return c;
}

std::uint64_t count_tuples(std::size_t n, std::size_t m) {
    const WideCount c = count_tuples_wide(n, m);
    if (c > std::numeric_limits<std::uint64_t>::max()) {
        throw std::overflow_error("binomial coefficient exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(c);
}

Rank rank_tuple(std::span<const std::size_t> t) {
    Rank r = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const std::uint64_t term = count_tuples(t[j], j + 1);
        if (__builtin_add_overflow(r, term, &r)) {
            throw std::overflow_error("tuple rank exceeds 64 bits");
        }
    }
    return r;
}

Rank rank_tuple(const IncreasingTuple& t) { return rank_tuple(t.indices()); }

void unrank_into(Rank rank, std::size_t n, std::size_t m, std::span<std::size_t> out) {
    if (out.size() != m) throw std::invalid_argument("unrank_into: output size must equal m");
    if (static_cast<WideCount>(rank) >= count_tuples_wide(n, m)) {
        throw std::out_of_range("unrank_tuple: rank outside [0, C(n,m))");
    }
    WideCount r = rank;
    std::size_t upper = n;  // exclusive bound for the current coordinate
    for (std::size_t j = m; j >= 1; --j) {
        // largest c in [j-1, upper) with C(c, j) <= r
        std::size_t lo = j - 1;
        std::size_t hi = upper - 1;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo + 1) / 2;
            if (count_tuples_wide(mid, j) <= r) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        out[j - 1] = lo;
        r -= count_tuples_wide(lo, j);
        upper = lo;
    }
}

IncreasingTuple unrank_tuple(Rank rank, std::size_t n, std::size_t m) {
    std::vector<std::size_t> v(m);
    unrank_into(rank, n, m, v);
    return IncreasingTuple(std::move(v));
}

std::size_t last_index_of_rank(Rank rank, std::size_t n, std::size_t m) {
    if (m == 0) throw std::invalid_argument("last_index_of_rank: m must be positive");
    std::size_t lo = m - 1;
    std::size_t hi = n - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (count_tuples_wide(mid, m) <= rank) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

TupleCursor::TupleCursor(std::size_t n, std::size_t m) : n_(n), current_(m), done_(m > n) {
    std::iota(current_.begin(), current_.end(), std::size_t{0});
}

void TupleCursor::advance() noexcept {
    const std::size_t m = current_.size();
    // colex successor: bump the first coordinate that has room below its
    // right neighbour (or below n for the last one), reset the prefix
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t bound = (j + 1 < m) ? current_[j + 1] : n_;
        if (current_[j] + 1 < bound) {
            ++current_[j];
            for (std::size_t i = 0; i < j; ++i) current_[i] = i;
            return;
        }
    }
    done_ = true;
}

void for_each_tuple(std::size_t n, std::size_t m,
                    const std::function<void(std::span<const std::size_t>)>& f) {
    for (TupleCursor c(n, m); !c.done(); c.advance()) f(c.current());
}

std::vector<IncreasingTuple> enumerate_tuples(std::size_t n, std::size_t m) {
    std::vector<IncreasingTuple> out;
    if (m <= n) out.reserve(static_cast<std::size_t>(count_tuples(n, m)));
    for_each_tuple(n, m, [&](std::span<const std::size_t> t) {
        out.emplace_back(std::vector<std::size_t>(t.begin(), t.end()));
    });
    return out;
}

}  // namespace ustat
