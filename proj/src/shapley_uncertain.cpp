#include "shapuq/shapley_uncertain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapuq/errors.hpp"
#include "shapuq/numeric.hpp"
#include "shapuq/parallel.hpp"

namespace shapuq {

namespace {

void check_player(const UncertainGame& game, int i) {
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

inline std::uint64_t spread_around_bit(std::uint64_t t, unsigned b) {
  const std::uint64_t low = t & ((std::uint64_t{1} << b) - 1);
  return ((t >> b) << (b + 1)) | low;
}

struct UncertainPass {
  double phi;
  double raw_second;   // sum_S w Delta^2
  double gamma;        // sum_S w E[eps | S]
  double eps_second;   // sum_S w E[eps^2 | S]
  double cross;        // sum_S w Delta E[eps | S]
};

UncertainPass uncertain_pass(const UncertainGame& game,
                             const std::vector<double>& values,
                             const std::vector<double>& weight, int i) {
  const int n = game.player_count();
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t bit = std::uint64_t{1} << b;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  KahanAccumulator phi, m2, gamma, eps2, cross;
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t s = spread_around_bit(t, b);
    const double w = weight[static_cast<std::size_t>(std::popcount(s))];
    const double delta = values[s | bit] - values[s];
    const Coalition coal(s, n);
    const double e1 = game.epsilon_moment(i, coal, 1);
    const double e2 = game.epsilon_moment(i, coal, 2);
    phi.add(w * delta);
    m2.add(w * delta * delta);
    gamma.add(w * e1);
    eps2.add(w * e2);
    cross.add(w * delta * e1);
  }
  return UncertainPass{phi.value(), m2.value(), gamma.value(), eps2.value(),
                       cross.value()};
}

VarianceParts parts_from_pass(const UncertainPass& p) {
  VarianceParts out;
  const double var_v = p.raw_second - p.phi * p.phi;
  out.sigma2_intrinsic = var_v > 0.0 ? var_v : 0.0;
  const double var_g = p.eps_second - p.gamma * p.gamma;
  out.sigma2_gamma = var_g > 0.0 ? var_g : 0.0;
  out.xi = 2.0 * p.cross - 2.0 * p.phi * p.gamma;
  out.sigma2_total = out.sigma2_intrinsic + out.sigma2_gamma + out.xi;
  return out;
}

std::vector<MarginalAtom> merged_atoms(std::vector<MarginalAtom> raw,
                                       double tolerance) {
  std::sort(raw.begin(), raw.end(),
            [](const MarginalAtom& a, const MarginalAtom& b) {
              return a.value < b.value;
            });
  std::vector<MarginalAtom> out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    double mass = raw[pos].mass;
    double weighted = raw[pos].mass * raw[pos].value;
    double last = raw[pos].value;
    std::size_t next = pos + 1;
    while (next < raw.size() && raw[next].value - last <= tolerance) {
      mass += raw[next].mass;
      weighted += raw[next].mass * raw[next].value;
      last = raw[next].value;
      ++next;
    }
    out.push_back(MarginalAtom{weighted / mass, mass});
    pos = next;
  }
  return out;
}

constexpr double kAtomMergeTolerance = 1e-12;
constexpr int kDefaultGridPoints = 1024;
constexpr double kDefaultGridSpread = 6.0;

}  // namespace

double MixtureDensity::total_mass() const {
  if (kind == Kind::kDiscrete) {
    KahanAccumulator acc;
    for (const auto& a : atoms) acc.add(a.mass);
    return acc.value();
  }
  const double lo = grid.front();
  const double hi = grid.back();
  KahanAccumulator acc;
  for (const auto& comp : components) {
    acc.add(comp.weight *
            windowed_normal_moments(comp.center, component_sigma, lo, hi).m0);
  }
  return acc.value();
}

double MixtureDensity::mean() const {
  KahanAccumulator acc;
  if (kind == Kind::kDiscrete) {
    for (const auto& a : atoms) acc.add(a.mass * a.value);
    return acc.value();
  }
  const double lo = grid.front();
  const double hi = grid.back();
  for (const auto& comp : components) {
    acc.add(comp.weight *
            windowed_normal_moments(comp.center, component_sigma, lo, hi).m1);
  }
  return acc.value();
}

double MixtureDensity::second_moment() const {
  KahanAccumulator acc;
  if (kind == Kind::kDiscrete) {
    for (const auto& a : atoms) acc.add(a.mass * a.value * a.value);
    return acc.value();
  }
  const double lo = grid.front();
  const double hi = grid.back();
  for (const auto& comp : components) {
    acc.add(comp.weight *
            windowed_normal_moments(comp.center, component_sigma, lo, hi).m2);
  }
  return acc.value();
}

double mean_bias(const UncertainGame& game, int i) {
  check_player(game, i);
  const int n = game.player_count();
  const std::vector<double> weight = weights_by_size(n);
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  KahanAccumulator acc;
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t s = spread_around_bit(t, b);
    const double w = weight[static_cast<std::size_t>(std::popcount(s))];
    acc.add(w * game.epsilon_moment(i, Coalition(s, n), 1));
  }
  return acc.value();
}

UncertainShapleyResult uncertain_shapley(const UncertainGame& game,
                                         int threads) {
  const int n = game.player_count();
  if (!game.noise().has_analytic_moments(2)) {
    throw UnsupportedAnalyticsError(
        "uncertain_shapley: noise does not declare moments up to order 2");
  }
  const std::vector<double> values = game.base().materialize(threads);
  const std::vector<double> weight = weights_by_size(n);
  UncertainShapleyResult r;
  const std::size_t count = static_cast<std::size_t>(n);
  r.phi.resize(count);
  r.gamma.resize(count);
  r.phi_tilde.resize(count);
  r.sigma2_intrinsic.resize(count);
  r.sigma2_gamma.resize(count);
  r.xi.resize(count);
  r.sigma2_total.resize(count);
  parallel_for(count, threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) + 1;
    const UncertainPass pass = uncertain_pass(game, values, weight, i);
    const VarianceParts parts = parts_from_pass(pass);
    r.phi[idx] = pass.phi;
    r.gamma[idx] = pass.gamma;
    r.phi_tilde[idx] = pass.phi + pass.gamma;
    r.sigma2_intrinsic[idx] = parts.sigma2_intrinsic;
    r.sigma2_gamma[idx] = parts.sigma2_gamma;
    r.xi[idx] = parts.xi;
    r.sigma2_total[idx] = parts.sigma2_total;
  });
  return r;
}

DeterministicGame shifted_game(const UncertainGame& game) {
  const int n = game.player_count();
  if (!game.noise().has_analytic_moments(1)) {
    throw UnsupportedAnalyticsError(
        "shifted_game: noise does not declare first moments");
  }
  std::vector<double> bias(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    bias[static_cast<std::size_t>(i - 1)] = mean_bias(game, i);
  }
  std::vector<double> values = game.base().materialize();
  const std::size_t count = values.size();
  for (std::size_t s = 0; s < count; ++s) {
    KahanAccumulator shift;
    for (int j = 0; j < n; ++j) {
      if ((s >> j) & 1u) shift.add(bias[static_cast<std::size_t>(j)]);
    }
    values[s] += shift.value();
  }
  return DeterministicGame::from_table(n, std::move(values));
}

double uncertain_moment(const UncertainGame& game, int i, int k) {
  check_player(game, i);
  if (k < 1) throw DomainError("uncertain_moment: order must be >= 1");
  if (!game.noise().has_analytic_moments(k)) {
    throw UnsupportedAnalyticsError(
        "uncertain_moment: noise does not declare moments up to order " +
        std::to_string(k));
  }
  const int n = game.player_count();
  const std::vector<double> values = game.base().materialize();
  const std::vector<double> weight = weights_by_size(n);
  std::vector<double> binom(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) {
    binom[static_cast<std::size_t>(j)] = static_cast<double>(
        binomial_u64(static_cast<unsigned>(k), static_cast<unsigned>(j)));
  }
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t bit = std::uint64_t{1} << b;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  KahanAccumulator acc;
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t s = spread_around_bit(t, b);
    const double w = weight[static_cast<std::size_t>(std::popcount(s))];
    const double delta = values[s | bit] - values[s];
    const Coalition coal(s, n);
    KahanAccumulator inner;
    for (int j = 0; j <= k; ++j) {
      inner.add(binom[static_cast<std::size_t>(j)] *
                pow_i(delta, static_cast<unsigned>(j)) *
                game.epsilon_moment(i, coal, k - j));
    }
    acc.add(w * inner.value());
  }
  return acc.value();
}

VarianceParts variance_decomposition(const UncertainGame& game, int i) {
  check_player(game, i);
  if (!game.noise().has_analytic_moments(2)) {
    throw UnsupportedAnalyticsError(
        "variance_decomposition: noise does not declare moments up to "
        "order 2");
  }
  const int n = game.player_count();
  const std::vector<double> values = game.base().materialize();
  const std::vector<double> weight = weights_by_size(n);
  return parts_from_pass(uncertain_pass(game, values, weight, i));
}

MixtureDensity mixture_density(const UncertainGame& game, int i,
                               std::span<const double> grid) {
  check_player(game, i);
  const int n = game.player_count();
  const std::vector<double> values = game.base().materialize();
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
  const std::vector<MarginalAtom> centers =
      merged_atoms(std::move(raw), kAtomMergeTolerance);

  MixtureDensity out;
  out.player = i;
  out.components.reserve(centers.size());
  for (const auto& c : centers) {
    out.components.push_back(MixtureComponent{c.value, c.mass});
  }

  const auto& law = game.noise().law();
  if (std::holds_alternative<NoNoise>(law)) {
    out.kind = MixtureDensity::Kind::kDiscrete;
    out.atoms = centers;
    return out;
  }
  if (const auto* bern = std::get_if<BernoulliOffsetNoise>(&law)) {
    // eps = c (B1 - B2): support {-c, 0, +c} with masses
    // {p(1-p), 1-2p(1-p), p(1-p)}.
    const double flip = bern->p * (1.0 - bern->p);
    std::vector<MarginalAtom> shifted;
    shifted.reserve(centers.size() * 3);
    for (const auto& c : centers) {
      if (flip > 0.0) {
        shifted.push_back(MarginalAtom{c.value - bern->c, c.mass * flip});
        shifted.push_back(MarginalAtom{c.value + bern->c, c.mass * flip});
      }
      shifted.push_back(MarginalAtom{c.value, c.mass * (1.0 - 2.0 * flip)});
    }
    out.kind = MixtureDensity::Kind::kDiscrete;
    out.atoms = merged_atoms(std::move(shifted), kAtomMergeTolerance);
    return out;
  }
  if (const auto* gauss = std::get_if<GaussianNoise>(&law)) {
    const double comp_sigma = gauss->sigma * std::sqrt(2.0);
    if (comp_sigma == 0.0) {
      out.kind = MixtureDensity::Kind::kDiscrete;
      out.atoms = centers;
      return out;
    }
    out.kind = MixtureDensity::Kind::kContinuous;
    out.component_sigma = comp_sigma;
    if (grid.empty()) {
      const double lo =
          centers.front().value - kDefaultGridSpread * comp_sigma;
      const double hi = centers.back().value + kDefaultGridSpread * comp_sigma;
      const double step = (hi - lo) / (kDefaultGridPoints - 1);
      out.grid.resize(kDefaultGridPoints);
      for (int g = 0; g < kDefaultGridPoints; ++g) {
        out.grid[static_cast<std::size_t>(g)] = lo + step * g;
      }
      out.grid.back() = hi;
    } else {
      if (grid.size() < 2) {
        throw DomainError("mixture_density: grid needs at least two points");
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!std::isfinite(grid[g])) {
          throw DomainError("mixture_density: non-finite grid point");
        }
        if (g > 0 && !(grid[g] > grid[g - 1])) {
          throw DomainError(
              "mixture_density: grid must be strictly increasing");
        }
      }
      out.grid.assign(grid.begin(), grid.end());
    }
    out.density.resize(out.grid.size());
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
      const double x = out.grid[g];
      KahanAccumulator acc;
      for (const auto& comp : out.components) {
        acc.add(comp.weight *
                normal_pdf((x - comp.center) / comp_sigma) / comp_sigma);
      }
      out.density[g] = acc.value();
    }
    return out;
  }
  throw UnsupportedAnalyticsError(
      "mixture_density: no closed-form density for this noise kind");
}

}  // namespace shapuq
