#include "shapuq/shapley_exact.hpp"

#include <algorithm>
#include <string>

#include "shapuq/errors.hpp"
#include "shapuq/numeric.hpp"
#include "shapuq/parallel.hpp"

namespace shapuq {

namespace {

void check_player(const DeterministicGame& game, int i) {
  if (i < 1 || i > game.player_count()) {
    throw DomainError("player " + std::to_string(i) + " outside [1, " +
                      std::to_string(game.player_count()) + "]");
  }
}

std::vector<double> weights_by_size(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    w[static_cast<std::size_t>(s)] = shapley_weight(n, s);
  }
  return w;
}

// Inserts a zero bit at position b, mapping t in [0, 2^(n-1)) to the t-th
// coalition (ascending bitmask) that avoids player b+1.
inline std::uint64_t spread_around_bit(std::uint64_t t, unsigned b) {
  const std::uint64_t low = t & ((std::uint64_t{1} << b) - 1);
  return ((t >> b) << (b + 1)) | low;
}

struct PlayerPass {
  double phi;
  double raw_second;
};

PlayerPass exact_pass(const std::vector<double>& values,
                      const std::vector<double>& weight, int n, int i) {
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t bit = std::uint64_t{1} << b;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  KahanAccumulator m1;
  KahanAccumulator m2;
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t s = spread_around_bit(t, b);
    const double w = weight[static_cast<std::size_t>(std::popcount(s))];
    const double delta = values[s | bit] - values[s];
    m1.add(w * delta);
    m2.add(w * delta * delta);
  }
  return PlayerPass{m1.value(), m2.value()};
}

}  // namespace

double MarginalDistribution::mean() const {
  KahanAccumulator acc;
  for (const auto& a : atoms) acc.add(a.mass * a.value);
  return acc.value();
}

double MarginalDistribution::moment(int k) const {
  if (k < 1) throw DomainError("MarginalDistribution: moment order >= 1");
  KahanAccumulator acc;
  for (const auto& a : atoms) {
    acc.add(a.mass * pow_i(a.value, static_cast<unsigned>(k)));
  }
  return acc.value();
}

double marginal_contribution(const DeterministicGame& game, int i,
                             const Coalition& s) {
  check_player(game, i);
  if (s.contains(i)) {
    throw DomainError("marginal_contribution: player " + std::to_string(i) +
                      " already belongs to the coalition");
  }
  return game.evaluate(s.with(i)) - game.evaluate(s);
}

double shapley_value(const DeterministicGame& game, int i) {
  check_player(game, i);
  const int n = game.player_count();
  const std::vector<double> values = game.materialize();
  const std::vector<double> weight = weights_by_size(n);
  return exact_pass(values, weight, n, i).phi;
}

ShapleyResult shapley_all(const DeterministicGame& game, int threads) {
  const int n = game.player_count();
  const std::vector<double> values = game.materialize(threads);
  const std::vector<double> weight = weights_by_size(n);
  ShapleyResult result;
  result.phi.resize(static_cast<std::size_t>(n));
  result.sigma2.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) + 1;
    const PlayerPass pass = exact_pass(values, weight, n, i);
    result.phi[idx] = pass.phi;
    const double var = pass.raw_second - pass.phi * pass.phi;
    result.sigma2[idx] = var > 0.0 ? var : 0.0;
  });
  return result;
}

MarginalDistribution marginal_distribution(const DeterministicGame& game,
                                           int i, double merge_tolerance) {
  check_player(game, i);
  if (!(merge_tolerance >= 0.0)) {
    throw DomainError("marginal_distribution: merge tolerance must be >= 0");
  }
  const int n = game.player_count();
  const std::vector<double> values = game.materialize();
  const std::vector<double> weight = weights_by_size(n);
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t bit = std::uint64_t{1} << b;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);

  std::vector<MarginalAtom> raw;
  raw.reserve(static_cast<std::size_t>(half));
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t s = spread_around_bit(t, b);
    raw.push_back(MarginalAtom{
        values[s | bit] - values[s],
        weight[static_cast<std::size_t>(std::popcount(s))]});
  }
  std::sort(raw.begin(), raw.end(),
            [](const MarginalAtom& a, const MarginalAtom& c) {
              return a.value < c.value;
            });

  MarginalDistribution dist;
  dist.player = i;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    double mass = raw[pos].mass;
    double weighted = raw[pos].mass * raw[pos].value;
    double last = raw[pos].value;
    std::size_t next = pos + 1;
    while (next < raw.size() && raw[next].value - last <= merge_tolerance) {
      mass += raw[next].mass;
      weighted += raw[next].mass * raw[next].value;
      last = raw[next].value;
      ++next;
    }
    dist.atoms.push_back(MarginalAtom{weighted / mass, mass});
    pos = next;
  }
  return dist;
}

double moment(const DeterministicGame& game, int i, int k) {
  check_player(game, i);
  if (k < 1) throw DomainError("moment: order must be >= 1");
  const int n = game.player_count();
  const std::vector<double> values = game.materialize();
  const std::vector<double> weight = weights_by_size(n);
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t bit = std::uint64_t{1} << b;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  KahanAccumulator acc;
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t s = spread_around_bit(t, b);
    const double w = weight[static_cast<std::size_t>(std::popcount(s))];
    acc.add(w * pow_i(values[s | bit] - values[s], static_cast<unsigned>(k)));
  }
  return acc.value();
}

double intrinsic_variance(const DeterministicGame& game, int i) {
  check_player(game, i);
  const int n = game.player_count();
  const std::vector<double> values = game.materialize();
  const std::vector<double> weight = weights_by_size(n);
  const PlayerPass pass = exact_pass(values, weight, n, i);
  const double var = pass.raw_second - pass.phi * pass.phi;
  return var > 0.0 ? var : 0.0;
}

}  // namespace shapuq
