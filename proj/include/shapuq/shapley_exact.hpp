#pragma once

#include <vector>

#include "shapuq/game.hpp"

namespace shapuq {

struct MarginalAtom {
  double value;
  double mass;
};

/// Distribution of the marginal contribution V_i = v(S u {i}) - v(S) when
/// the predecessor coalition S is drawn with P(S) = shapley_weight(n, |S|).
/// Atoms are sorted ascending with distinct values and masses summing to 1.
struct MarginalDistribution {
  int player = 0;
  std::vector<MarginalAtom> atoms;

  double mean() const;
  double moment(int k) const;
};

struct ShapleyResult {
  std::vector<double> phi;
  std::vector<double> sigma2;
};

/// v(S u {i}) - v(S); requires i not in S.
double marginal_contribution(const DeterministicGame& game, int i,
                             const Coalition& s);

/// Phi_i, the Shapley value of player i.
double shapley_value(const DeterministicGame& game, int i);

/// Shapley values and intrinsic variances for every player in one sweep
/// over a shared value table (each v(S) evaluated exactly once).
ShapleyResult shapley_all(const DeterministicGame& game, int threads = 0);

/// Full distribution of V_i; atoms closer than merge_tolerance are fused
/// (mass-weighted).
MarginalDistribution marginal_distribution(const DeterministicGame& game,
                                           int i,
                                           double merge_tolerance = 1e-12);

/// E[V_i^k], k >= 1.
double moment(const DeterministicGame& game, int i, int k);

/// Var[V_i] = E[V_i^2] - Phi_i^2, clamped to 0 against rounding.
double intrinsic_variance(const DeterministicGame& game, int i);

}  // namespace shapuq
