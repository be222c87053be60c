#pragma once

#include <cstdint>
#include <vector>

#include "shapuq/game.hpp"

namespace shapuq {

enum class EstimatorMode {
  /// Evaluate every coalition `repeats` times and plug the sample means
  /// into the exact weighted sum. Needs n <= kMaxExactPlayers.
  kExactEnumerationWithRepeats,
  /// Average marginal contributions over sampled player orderings. Works
  /// for any player count the Coalition type can hold.
  kPermutationSampling,
};

struct EstimatorConfig {
  int repeats = 100;
  std::int64_t permutations = 10000;
  std::uint64_t seed = 0;
  EstimatorMode mode = EstimatorMode::kExactEnumerationWithRepeats;
  double confidence_level = 0.95;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t evaluations_used = 0;
};

/// Estimates phi_tilde_i from noisy evaluations. In enumeration mode the
/// estimate is sum_S w(S) [vbar(S u {i}) - vbar(S)] with vbar the per-
/// coalition sample mean over `repeats` independent draws; its standard
/// error propagates the per-coalition variances through the net coefficient
/// of each coalition in that linear combination. Draw substreams are keyed
/// by (seed, coalition bitmask, repeat index), so the result is bit-identical
/// for every thread count and schedule.
Estimate estimate_uncertain_shapley(const UncertainGame& game, int i,
                                    const EstimatorConfig& config,
                                    int threads = 0);

/// Estimates for all players from one shared set of draws: every coalition
/// is evaluated exactly `repeats` times in total, and each player's weighted
/// sum reuses the same sample means (estimates are therefore correlated
/// across players).
std::vector<Estimate> estimate_all(const UncertainGame& game,
                                   const EstimatorConfig& config,
                                   int threads = 0);

/// Plain Monte-Carlo Shapley estimate for one player: average of
/// v(pred u {i}) - v(pred) over uniformly sampled orderings, two fresh
/// evaluations per ordering; std_error from the sample variance.
Estimate mc_shapley(const UncertainGame& game, int i,
                    std::int64_t permutations, std::uint64_t seed,
                    int threads = 0);
Estimate mc_shapley(const DeterministicGame& game, int i,
                    std::int64_t permutations, std::uint64_t seed,
                    int threads = 0);

}  // namespace shapuq
