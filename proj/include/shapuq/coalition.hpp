#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <span>
#include <vector>

namespace shapuq {

/// Hard capacity of the bitmask representation.
inline constexpr int kMaxPlayers = 63;
/// Cap for full 2^n enumeration; beyond this only sampling is offered.
inline constexpr int kMaxExactPlayers = 24;

/// A coalition of players drawn from {1, ..., n}, stored as a bitmask:
/// bit k set <=> player k+1 is in the coalition.
class Coalition {
 public:
  Coalition() = default;
  Coalition(std::uint64_t bits, int n);

  static Coalition empty(int n) { return Coalition(0, n); }
  static Coalition grand(int n);
  /// Builds a coalition from 1-based player indices.
  static Coalition from_players(std::span<const int> players, int n);

  std::uint64_t bits() const { return bits_; }
  int player_count() const { return n_; }
  int size() const { return std::popcount(bits_); }
  bool is_empty() const { return bits_ == 0; }
  bool contains(int player) const;
  Coalition with(int player) const;
  Coalition without(int player) const;
  /// Sorted 1-based player indices.
  std::vector<int> players() const;

  bool operator==(const Coalition&) const = default;

 private:
  std::uint64_t bits_ = 0;
  int n_ = 0;
};

/// w(n, s) = s! (n-s-1)! / n!, the Shapley kernel weight of any coalition of
/// size s among n players. Computed as 1/(n * C(n-1, s)) with the binomial
/// taken in exact integer arithmetic, so w(n, s) == w(n, n-1-s) holds exactly
/// and every value is correctly rounded.
double shapley_weight(int n, int s);

/// P(S) of the random predecessor coalition of player i under a uniformly
/// random ordering; equals shapley_weight(n, |S|). Requires i not in S.
double coalition_probability(int n, int i, const Coalition& s);

/// The 2^(n-1) coalitions S with i not in S, in ascending bitmask order.
/// A lightweight value type: elements are produced on demand, so the range
/// can be partitioned across workers by index without materialization.
class CoalitionsExcluding {
 public:
  CoalitionsExcluding(int n, int i);

  std::size_t size() const { return std::size_t{1} << (n_ - 1); }
  Coalition operator[](std::size_t t) const;
  int player_count() const { return n_; }
  int excluded_player() const { return i_; }

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Coalition;
    using difference_type = std::ptrdiff_t;

    iterator(const CoalitionsExcluding* range, std::size_t t)
        : range_(range), t_(t) {}
    Coalition operator*() const { return (*range_)[t_]; }
    iterator& operator++() {
      ++t_;
      return *this;
    }
    iterator operator++(int) {
      iterator old = *this;
      ++t_;
      return old;
    }
    bool operator==(const iterator&) const = default;

   private:
    const CoalitionsExcluding* range_;
    std::size_t t_;
  };

  iterator begin() const { return iterator(this, 0); }
  iterator end() const { return iterator(this, size()); }

 private:
  int n_;
  int i_;
};

CoalitionsExcluding enumerate_excluding(int n, int i);

}  // namespace shapuq
