#include "shapuq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapuq/coalition.hpp"
#include "shapuq/errors.hpp"
#include "shapuq/numeric.hpp"
#include "shapuq/parallel.hpp"
#include "shapuq/rng.hpp"

namespace shapuq {

namespace {

// Fixed number of reduction blocks for permutation sampling; independent of
// the thread count so that merged statistics are bit-stable.
constexpr std::size_t kStatBlocks = 256;

struct Welford {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const Welford& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * (o.count / total);
    m2 += o.m2 + delta * delta * (count * o.count / total);
    count = total;
  }

  double sample_variance() const {
    if (count < 2.0) return 0.0;
    const double v = m2 / (count - 1.0);
    return v > 0.0 ? v : 0.0;
  }
};

void check_config(const EstimatorConfig& config) {
  if (config.repeats < 1) {
    throw DomainError("estimator: repeats must be >= 1");
  }
  if (config.permutations < 1) {
    throw DomainError("estimator: permutations must be >= 1");
  }
  if (!(config.confidence_level > 0.0 && config.confidence_level < 1.0)) {
    throw DomainError("estimator: confidence level must lie inside (0, 1)");
  }
}

void check_player(int n, int i) {
  if (i < 1 || i > n) {
    throw DomainError("estimator: player " + std::to_string(i) +
                      " outside [1, " + std::to_string(n) + "]");
  }
}

Estimate finish(double mean, double variance, double confidence,
                std::int64_t evaluations) {
  Estimate e;
  e.mean = mean;
  e.std_error = variance > 0.0 ? std::sqrt(variance) : 0.0;
  const double z = normal_quantile(0.5 + 0.5 * confidence);
  e.ci_low = mean - z * e.std_error;
  e.ci_high = mean + z * e.std_error;
  e.evaluations_used = evaluations;
  return e;
}

struct CoalitionStats {
  std::vector<double> mean;     // vbar(T)
  std::vector<double> var_hat;  // s_T^2 / repeats
};

// One pass of `repeats` draws per coalition. Substream key: (seed,
// kCoalitionDraw, coalition bitmask, repeat index), one draw per stream.
CoalitionStats coalition_sample_stats(const UncertainGame& game,
                                      const EstimatorConfig& config,
                                      int threads) {
  const int n = game.player_count();
  if (n > kMaxExactPlayers) {
    throw CapacityError(
        "estimator: enumeration over " + std::to_string(n) +
        " players exceeds the cap of " + std::to_string(kMaxExactPlayers) +
        "; use permutation sampling");
  }
  const std::size_t count = std::size_t{1} << n;
  CoalitionStats stats;
  stats.mean.resize(count);
  stats.var_hat.resize(count);
  const double repeats = static_cast<double>(config.repeats);
  parallel_for_chunks(count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t bits = begin; bits < end; ++bits) {
      const Coalition coal(bits, n);
      Welford w;
      for (int r = 0; r < config.repeats; ++r) {
        RngStream stream(config.seed, stream_tag::kCoalitionDraw, bits,
                         static_cast<std::uint64_t>(r));
        w.add(game.sample(coal, stream));
      }
      stats.mean[bits] = w.mean;
      stats.var_hat[bits] = w.sample_variance() / repeats;
    }
  });
  return stats;
}

Estimate combine_player(const UncertainGame& game, const CoalitionStats& stats,
                        const EstimatorConfig& config, int i) {
  const int n = game.player_count();
  std::vector<double> weight(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    weight[static_cast<std::size_t>(s)] = shapley_weight(n, s);
  }
  const unsigned b = static_cast<unsigned>(i - 1);
  const std::uint64_t bit = std::uint64_t{1} << b;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  KahanAccumulator mean;
  KahanAccumulator variance;
  for (std::uint64_t t = 0; t < half; ++t) {
    const std::uint64_t low = t & ((std::uint64_t{1} << b) - 1);
    const std::uint64_t s = ((t >> b) << (b + 1)) | low;
    const double w = weight[static_cast<std::size_t>(std::popcount(s))];
    mean.add(w * (stats.mean[s | bit] - stats.mean[s]));
    variance.add(w * w * (stats.var_hat[s | bit] + stats.var_hat[s]));
  }
  const std::int64_t evals =
      static_cast<std::int64_t>(config.repeats) *
      static_cast<std::int64_t>(std::uint64_t{1} << n);
  return finish(mean.value(), variance.value(), config.confidence_level,
                evals);
}

// Marginals of every player along `permutations` sampled orderings.
// Each ordering k draws from stream (seed, kPermutation, k): first the
// Fisher-Yates shuffle, then the n+1 chain evaluations; consecutive prefix
// draws are shared between adjacent players.
std::vector<Estimate> permutation_sampling_all(const UncertainGame& game,
                                               const EstimatorConfig& config,
                                               int threads) {
  const int n = game.player_count();
  const std::size_t players = static_cast<std::size_t>(n);
  const std::size_t m = static_cast<std::size_t>(config.permutations);
  const std::size_t blocks = std::min(kStatBlocks, m);
  const std::size_t step = (m + blocks - 1) / blocks;

  std::vector<std::vector<Welford>> block_stats(
      blocks, std::vector<Welford>(players));
  parallel_for(blocks, threads, [&](std::size_t blk) {
    std::vector<Welford>& local = block_stats[blk];
    const std::size_t begin = blk * step;
    const std::size_t end = std::min(m, begin + step);
    for (std::size_t k = begin; k < end; ++k) {
      RngStream stream(config.seed, stream_tag::kPermutation,
                       static_cast<std::uint64_t>(k));
      const std::vector<int> order = random_permutation(n, stream);
      Coalition prefix = Coalition::empty(n);
      double prev = game.sample(prefix, stream);
      for (int pos = 0; pos < n; ++pos) {
        const int player = order[static_cast<std::size_t>(pos)] + 1;
        prefix = prefix.with(player);
        const double cur = game.sample(prefix, stream);
        local[static_cast<std::size_t>(player - 1)].add(cur - prev);
        prev = cur;
      }
    }
  });

  std::vector<Estimate> out(players);
  const std::int64_t evals =
      config.permutations * (static_cast<std::int64_t>(n) + 1);
  for (std::size_t p = 0; p < players; ++p) {
    Welford total;
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      total.merge(block_stats[blk][p]);
    }
    const double variance = total.sample_variance() / total.count;
    out[p] = finish(total.mean, variance, config.confidence_level, evals);
  }
  return out;
}

}  // namespace

Estimate estimate_uncertain_shapley(const UncertainGame& game, int i,
                                    const EstimatorConfig& config,
                                    int threads) {
  check_config(config);
  check_player(game.player_count(), i);
  if (config.mode == EstimatorMode::kPermutationSampling) {
    return permutation_sampling_all(game, config, threads)
        [static_cast<std::size_t>(i - 1)];
  }
  const CoalitionStats stats = coalition_sample_stats(game, config, threads);
  return combine_player(game, stats, config, i);
}

std::vector<Estimate> estimate_all(const UncertainGame& game,
                                   const EstimatorConfig& config,
                                   int threads) {
  check_config(config);
  if (config.mode == EstimatorMode::kPermutationSampling) {
    return permutation_sampling_all(game, config, threads);
  }
  const CoalitionStats stats = coalition_sample_stats(game, config, threads);
  const int n = game.player_count();
  std::vector<Estimate> out(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    out[idx] = combine_player(game, stats, config, static_cast<int>(idx) + 1);
  });
  return out;
}

Estimate mc_shapley(const UncertainGame& game, int i,
                    std::int64_t permutations, std::uint64_t seed,
                    int threads) {
  const int n = game.player_count();
  check_player(n, i);
  if (permutations < 1) {
    throw DomainError("mc_shapley: permutations must be >= 1");
  }
  const std::size_t m = static_cast<std::size_t>(permutations);
  const std::size_t blocks = std::min(kStatBlocks, m);
  const std::size_t step = (m + blocks - 1) / blocks;
  std::vector<Welford> block_stats(blocks);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    Welford& local = block_stats[blk];
    const std::size_t begin = blk * step;
    const std::size_t end = std::min(m, begin + step);
    for (std::size_t k = begin; k < end; ++k) {
      RngStream stream(seed, stream_tag::kPermutation,
                       static_cast<std::uint64_t>(k));
      const std::vector<int> order = random_permutation(n, stream);
      Coalition pred = Coalition::empty(n);
      for (int pos = 0; pos < n; ++pos) {
        const int player = order[static_cast<std::size_t>(pos)] + 1;
        if (player == i) break;
        pred = pred.with(player);
      }
      const double with_i = game.sample(pred.with(i), stream);
      const double without_i = game.sample(pred, stream);
      local.add(with_i - without_i);
    }
  });
  Welford total;
  for (std::size_t blk = 0; blk < blocks; ++blk) total.merge(block_stats[blk]);
  const double variance = total.sample_variance() / total.count;
  return finish(total.mean, variance, 0.95, 2 * permutations);
}

Estimate mc_shapley(const DeterministicGame& game, int i,
                    std::int64_t permutations, std::uint64_t seed,
                    int threads) {
  return mc_shapley(UncertainGame(game, NoiseModel::none()), i, permutations,
                    seed, threads);
}

}  // namespace shapuq
