#include "shapuq/coalition.hpp"

#include <string>

#include "shapuq/errors.hpp"
#include "shapuq/numeric.hpp"

namespace shapuq {

Coalition::Coalition(std::uint64_t bits, int n) : bits_(bits), n_(n) {
  if (n > kMaxPlayers) {
    throw CapacityError("Coalition: player count " + std::to_string(n) +
                        " exceeds " + std::to_string(kMaxPlayers));
  }
  if (n < 0) {
    throw DomainError("Coalition: negative player count " + std::to_string(n));
  }
  if (n < kMaxPlayers && (bits >> n) != 0) {
    throw DomainError("Coalition: bitmask has players above index " +
                      std::to_string(n));
  }
}

Coalition Coalition::grand(int n) {
  if (n > kMaxPlayers) {
    throw CapacityError("Coalition: player count " + std::to_string(n) +
                        " exceeds " + std::to_string(kMaxPlayers));
  }
  if (n < 0) {
    throw DomainError("Coalition: negative player count " + std::to_string(n));
  }
  const std::uint64_t bits =
      n == 0 ? 0 : (~std::uint64_t{0} >> (64 - n));
  return Coalition(bits, n);
}

Coalition Coalition::from_players(std::span<const int> players, int n) {
  std::uint64_t bits = 0;
  for (int p : players) {
    if (p < 1 || p > n) {
      throw DomainError("Coalition: player " + std::to_string(p) +
                        " outside [1, " + std::to_string(n) + "]");
    }
    bits |= std::uint64_t{1} << (p - 1);
  }
  return Coalition(bits, n);
}

bool Coalition::contains(int player) const {
  if (player < 1 || player > n_) {
    throw DomainError("Coalition: player " + std::to_string(player) +
                      " outside [1, " + std::to_string(n_) + "]");
  }
  return (bits_ >> (player - 1)) & 1u;
}

Coalition Coalition::with(int player) const {
  if (player < 1 || player > n_) {
    throw DomainError("Coalition: player " + std::to_string(player) +
                      " outside [1, " + std::to_string(n_) + "]");
  }
  return Coalition(bits_ | (std::uint64_t{1} << (player - 1)), n_);
}

Coalition Coalition::without(int player) const {
  if (player < 1 || player > n_) {
    throw DomainError("Coalition: player " + std::to_string(player) +
                      " outside [1, " + std::to_string(n_) + "]");
  }
  return Coalition(bits_ & ~(std::uint64_t{1} << (player - 1)), n_);
}

std::vector<int> Coalition::players() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int p = 1; p <= n_; ++p) {
    if ((bits_ >> (p - 1)) & 1u) out.push_back(p);
  }
  return out;
}

double shapley_weight(int n, int s) {
  if (n < 1 || n > kMaxPlayers) {
    throw CapacityError("shapley_weight: player count " + std::to_string(n) +
                        " outside [1, " + std::to_string(kMaxPlayers) + "]");
  }
  if (s < 0 || s >= n) {
    throw DomainError("shapley_weight: coalition size " + std::to_string(s) +
                      " outside [0, " + std::to_string(n - 1) + "]");
  }
  const std::uint64_t paths = binomial_u64(static_cast<unsigned>(n - 1),
                                           static_cast<unsigned>(s));
  return 1.0 / (static_cast<double>(n) * static_cast<double>(paths));
}

double coalition_probability(int n, int i, const Coalition& s) {
  if (s.player_count() != n) {
    throw DomainError("coalition_probability: coalition is over " +
                      std::to_string(s.player_count()) + " players, not " +
                      std::to_string(n));
  }
  if (i < 1 || i > n) {
    throw DomainError("coalition_probability: player " + std::to_string(i) +
                      " outside [1, " + std::to_string(n) + "]");
  }
  if (s.contains(i)) {
    throw DomainError("coalition_probability: player " + std::to_string(i) +
                      " already belongs to the coalition");
  }
  return shapley_weight(n, s.size());
}

CoalitionsExcluding::CoalitionsExcluding(int n, int i) : n_(n), i_(i) {
  if (n < 1 || n > kMaxExactPlayers) {
    throw CapacityError("enumerate_excluding: player count " +
                        std::to_string(n) + " outside [1, " +
                        std::to_string(kMaxExactPlayers) + "]");
  }
  if (i < 1 || i > n) {
    throw DomainError("enumerate_excluding: player " + std::to_string(i) +
                      " outside [1, " + std::to_string(n) + "]");
  }
}

Coalition CoalitionsExcluding::operator[](std::size_t t) const {
  const unsigned b = static_cast<unsigned>(i_ - 1);
  const std::uint64_t low = t & ((std::uint64_t{1} << b) - 1);
  const std::uint64_t high = (static_cast<std::uint64_t>(t) >> b) << (b + 1);
  return Coalition(high | low, n_);
}

CoalitionsExcluding enumerate_excluding(int n, int i) {
  return CoalitionsExcluding(n, i);
}

}  // namespace shapuq
