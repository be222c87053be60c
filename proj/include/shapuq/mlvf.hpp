#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "shapuq/game.hpp"

namespace shapuq {

struct Dataset {
  std::size_t num_points = 0;
  std::size_t num_features = 0;
  std::vector<double> features;  // row-major, num_points x num_features
  std::vector<double> targets;

  double feature(std::size_t row, std::size_t col) const {
    return features[row * num_features + col];
  }
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

/// Synthetic regression data: standard-normal features, targets
/// X w + noise_level * N(0,1) with every generating coefficient nonzero.
/// Fully determined by (num_points, num_features, noise_level, seed).
Dataset generate_regression(std::size_t num_points, std::size_t num_features,
                            double noise_level, std::uint64_t seed);

/// The coefficient vector generate_regression(., num_features, ., seed) drew;
/// entries are 100 * Uniform(0, 1).
std::vector<double> generating_weights(std::size_t num_features,
                                       std::uint64_t seed);

/// Ordinary least squares with intercept, solved by Householder QR.
LinearModel fit_linear_regression(const Dataset& data);

/// 1 - SSE/SST on the given data; requires nonzero target variance.
double r2_score(const LinearModel& model, const Dataset& data);

/// The per-coalition value function v(S) = R^2 of the fitted model with all
/// features outside S pinned to the baseline (zeros by default). For a
/// linear model pinning feature j replaces its term by a constant, so the
/// whole 2^d table is built in one incremental sweep and returned as a
/// table-backed game over d players. The R^2 denominator is always the full
/// data target variance.
DeterministicGame zero_imputed_vf(const LinearModel& model,
                                  const Dataset& data,
                                  std::span<const double> baseline = {},
                                  int threads = 0);

enum class ExperimentNoiseKind { kBernoulli, kGaussian };

/// Noise presets used by the bundled regression experiment:
/// bernoulli_offset(p = 0.33, c = 0.05) and gaussian(sigma = 0.01).
NoiseModel experiment_noise(ExperimentNoiseKind kind);

/// Headerless CSV, one row per point: feature columns then the target.
Dataset load_dataset_csv(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace shapuq
