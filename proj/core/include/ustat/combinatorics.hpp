#pragma once

// Index sets Inc^m_n = { 0 <= i_1 < ... < i_m < n } in colexicographic order.
//
// Colex rank of (t_1, ..., t_m) is sum_j C(t_j, j) (combinatorial number
// system), so all tuples whose last index is k occupy the contiguous rank
// block [C(k, m), C(k + 1, m)).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ustat {

using Rank = std::uint64_t;
__extension__ typedef unsigned __int128 WideCount;

/// Strictly increasing, 0-based index vector.
class IncreasingTuple {
public:
    IncreasingTuple() = default;
    explicit IncreasingTuple(std::vector<std::size_t> indices);
    IncreasingTuple(std::initializer_list<std::size_t> indices);

    [[nodiscard]] std::size_t order() const noexcept { return indices_.size(); }
    [[nodiscard]] std::size_t operator[](std::size_t j) const { return indices_[j]; }
    [[nodiscard]] std::span<const std::size_t> indices() const noexcept { return indices_; }
    [[nodiscard]] bool fits(std::size_t n) const noexcept {
        return indices_.empty() || indices_.back() < n;
    }
    /// "(1,3,4)" using the 1-based convention of the printed tables.
    [[nodiscard]] std::string to_one_based_string() const;

    friend bool operator==(const IncreasingTuple&, const IncreasingTuple&) = default;

private:
    std::vector<std::size_t> indices_;
};

/// C(n, m) in 128-bit checked arithmetic; throws std::overflow_error.
[[nodiscard]] WideCount count_tuples_wide(std::size_t n, std::size_t m);

/// C(n, m); throws std::overflow_error when the value does not fit 64 bits.
[[nodiscard]] std::uint64_t count_tuples(std::size_t n, std::size_t m);

[[nodiscard]] Rank rank_tuple(const IncreasingTuple& t);
[[nodiscard]] Rank rank_tuple(std::span<const std::size_t> t);

/// Inverse of rank_tuple on Inc^m_n; throws std::out_of_range when
/// rank >= C(n, m).
[[nodiscard]] IncreasingTuple unrank_tuple(Rank rank, std::size_t n, std::size_t m);
void unrank_into(Rank rank, std::size_t n, std::size_t m, std::span<std::size_t> out);

/// Largest k with C(k, m) <= rank, i.e. the last index of unrank(rank).
[[nodiscard]] std::size_t last_index_of_rank(Rank rank, std::size_t n, std::size_t m);

/// Cursor over Inc^m_n in colex order without per-step allocation.
class TupleCursor {
public:
    TupleCursor(std::size_t n, std::size_t m);

    [[nodiscard]] bool done() const noexcept { return done_; }
    [[nodiscard]] std::span<const std::size_t> current() const noexcept { return current_; }
    void advance() noexcept;

private:
    std::size_t n_;
    std::vector<std::size_t> current_;
    bool done_;
};

/// Calls f(span) for every tuple of Inc^m_n in colex order.
void for_each_tuple(std::size_t n, std::size_t m,
                    const std::function<void(std::span<const std::size_t>)>& f);

[[nodiscard]] std::vector<IncreasingTuple> enumerate_tuples(std::size_t n, std::size_t m);

}  // namespace ustat
