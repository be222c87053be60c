#pragma once

#include <span>
#include <vector>

#include "shapuq/game.hpp"
#include "shapuq/shapley_exact.hpp"

namespace shapuq {

/// Per-player summary of a game with noisy evaluations. All vectors are
/// indexed by player - 1. For every player,
///   phi_tilde = phi + gamma   and
///   sigma2_total = sigma2_intrinsic + sigma2_gamma + xi.
struct UncertainShapleyResult {
  std::vector<double> phi;
  std::vector<double> gamma;
  std::vector<double> phi_tilde;
  std::vector<double> sigma2_intrinsic;
  std::vector<double> sigma2_gamma;
  std::vector<double> xi;
  std::vector<double> sigma2_total;

  int player_count() const { return static_cast<int>(phi.size()); }
};

struct VarianceParts {
  double sigma2_intrinsic;
  double sigma2_gamma;
  double xi;
  double sigma2_total;
};

struct MixtureComponent {
  double center;
  double weight;
};

/// Distribution of the noisy marginal contribution
/// V~_i = Delta_i v(S) + eps_i(S): a mixture over predecessor coalitions.
/// Discrete kind carries atoms; continuous kind carries density samples on a
/// grid, with one normal component of spread component_sigma per center.
struct MixtureDensity {
  enum class Kind { kDiscrete, kContinuous };

  int player = 0;
  Kind kind = Kind::kDiscrete;
  std::vector<MarginalAtom> atoms;
  std::vector<double> grid;
  std::vector<double> density;
  std::vector<MixtureComponent> components;
  double component_sigma = 0.0;

  /// Total probability: atom masses summed, or the mixture integrated over
  /// [grid.front(), grid.back()] using the exact component laws.
  double total_mass() const;
  double mean() const;
  double second_moment() const;
};

/// Gamma_i = sum_S P(S) E[eps_i | S], the mean bias added to player i's
/// Shapley value by the evaluation noise.
double mean_bias(const UncertainGame& game, int i);

/// Phi~_i = Phi_i + Gamma_i together with the variance split for every
/// player, in one sweep per player over a shared value table.
UncertainShapleyResult uncertain_shapley(const UncertainGame& game,
                                         int threads = 0);

/// The noiseless game v'(S) = v(S) + sum_{j in S} Gamma_j, whose ordinary
/// Shapley values equal the phi_tilde of the uncertain game.
DeterministicGame shifted_game(const UncertainGame& game);

/// E[V~_i^k], k >= 1, from the binomial expansion over analytic noise
/// moments.
double uncertain_moment(const UncertainGame& game, int i, int k);

/// sigma2_total = sigma2_intrinsic + sigma2_gamma + xi, the three parts
/// computed in the same coalition sweep.
VarianceParts variance_decomposition(const UncertainGame& game, int i);

/// Density/atom representation of V~_i. Supported for noise kinds none,
/// bernoulli_offset (atoms) and gaussian (normal mixture). An empty grid
/// selects the default: 1024 points spanning all centers plus six component
/// standard deviations on each side.
MixtureDensity mixture_density(const UncertainGame& game, int i,
                               std::span<const double> grid = {});

}  // namespace shapuq
