#include "shapuq/mlvf.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "shapuq/errors.hpp"
#include "shapuq/numeric.hpp"
#include "shapuq/parallel.hpp"
#include "shapuq/rng.hpp"

namespace shapuq {

namespace {

constexpr std::size_t kTableBlocks = 256;

void check_dataset(const Dataset& data) {
  if (data.num_points == 0 || data.num_features == 0) {
    throw DomainError("dataset: needs at least one point and one feature");
  }
  if (data.features.size() != data.num_points * data.num_features ||
      data.targets.size() != data.num_points) {
    throw DomainError("dataset: buffer sizes disagree with dimensions");
  }
}

double target_mean(const Dataset& data) {
  KahanAccumulator acc;
  for (double y : data.targets) acc.add(y);
  return acc.value() / static_cast<double>(data.num_points);
}

double squared_deviation_sum(const std::vector<double>& values, double center) {
  KahanAccumulator acc;
  for (double v : values) {
    const double d = v - center;
    acc.add(d * d);
  }
  return acc.value();
}

}  // namespace

Dataset generate_regression(std::size_t num_points, std::size_t num_features,
                            double noise_level, std::uint64_t seed) {
  if (num_points == 0 || num_features == 0) {
    throw DomainError("generate_regression: needs >= 1 point and feature");
  }
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
    throw DomainError("generate_regression: noise level must be >= 0");
  }
  Dataset data;
  data.num_points = num_points;
  data.num_features = num_features;
  data.features.resize(num_points * num_features);
  RngStream feature_stream(seed, stream_tag::kFeatureMatrix);
  for (double& x : data.features) x = feature_stream.next_normal();

  const std::vector<double> w = generating_weights(num_features, seed);
  RngStream noise_stream(seed, stream_tag::kTargetNoise);
  data.targets.resize(num_points);
  for (std::size_t i = 0; i < num_points; ++i) {
    KahanAccumulator acc;
    const double* row = data.features.data() + i * num_features;
    for (std::size_t j = 0; j < num_features; ++j) acc.add(row[j] * w[j]);
    double y = acc.value();
    if (noise_level > 0.0) y += noise_level * noise_stream.next_normal();
    data.targets[i] = y;
  }
  return data;
}

std::vector<double> generating_weights(std::size_t num_features,
                                       std::uint64_t seed) {
  std::vector<double> w(num_features);
  RngStream stream(seed, stream_tag::kTrueWeights);
  for (double& x : w) x = 100.0 * stream.next_uniform();
  return w;
}

LinearModel fit_linear_regression(const Dataset& data) {
  check_dataset(data);
  const std::size_t k = data.num_points;
  const std::size_t d = data.num_features;
  const std::size_t p = d + 1;  // feature columns plus intercept
  if (k <= d) {
    throw DomainError("fit_linear_regression: needs more points than "
                      "features");
  }

  // Householder QR on the design matrix [X | 1], in place.
  std::vector<double> a(k * p);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) a[i * p + j] = data.feature(i, j);
    a[i * p + d] = 1.0;
  }
  std::vector<double> rhs = data.targets;
  std::vector<double> v(k);
  double max_pivot = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double norm2 = 0.0;
    for (std::size_t i = j; i < k; ++i) {
      const double x = a[i * p + j];
      norm2 += x * x;
    }
    const double norm = std::sqrt(norm2);
    max_pivot = std::max(max_pivot, norm);
    if (!(norm > 1e-12 * std::max(1.0, max_pivot))) {
      throw NumericError("fit_linear_regression: design matrix is rank "
                         "deficient at column " + std::to_string(j));
    }
    const double pivot = a[j * p + j];
    const double alpha = pivot >= 0.0 ? -norm : norm;
    for (std::size_t i = j; i < k; ++i) v[i] = a[i * p + j];
    v[j] = pivot - alpha;
    double vtv = 0.0;
    for (std::size_t i = j; i < k; ++i) vtv += v[i] * v[i];
    a[j * p + j] = alpha;
    for (std::size_t i = j + 1; i < k; ++i) a[i * p + j] = 0.0;
    for (std::size_t c = j + 1; c < p; ++c) {
      double dot = 0.0;
      for (std::size_t i = j; i < k; ++i) dot += v[i] * a[i * p + c];
      const double f = 2.0 * dot / vtv;
      for (std::size_t i = j; i < k; ++i) a[i * p + c] -= f * v[i];
    }
    double dot = 0.0;
    for (std::size_t i = j; i < k; ++i) dot += v[i] * rhs[i];
    const double f = 2.0 * dot / vtv;
    for (std::size_t i = j; i < k; ++i) rhs[i] -= f * v[i];
  }

  std::vector<double> coef(p);
  for (std::size_t jj = p; jj-- > 0;) {
    double s = rhs[jj];
    for (std::size_t c = jj + 1; c < p; ++c) s -= a[jj * p + c] * coef[c];
    coef[jj] = s / a[jj * p + jj];
  }

  LinearModel model;
  model.weights.assign(coef.begin(), coef.begin() + static_cast<long>(d));
  model.intercept = coef[d];
  return model;
}

double r2_score(const LinearModel& model, const Dataset& data) {
  check_dataset(data);
  if (model.weights.size() != data.num_features) {
    throw DomainError("r2_score: model has " +
                      std::to_string(model.weights.size()) +
                      " weights, data has " +
                      std::to_string(data.num_features) + " features");
  }
  const double sst =
      squared_deviation_sum(data.targets, target_mean(data));
  if (!(sst > 0.0)) {
    throw DomainError("r2_score: target variance is zero");
  }
  KahanAccumulator sse;
  for (std::size_t i = 0; i < data.num_points; ++i) {
    KahanAccumulator pred;
    pred.add(model.intercept);
    const double* row = data.features.data() + i * data.num_features;
    for (std::size_t j = 0; j < data.num_features; ++j) {
      pred.add(row[j] * model.weights[j]);
    }
    const double r = data.targets[i] - pred.value();
    sse.add(r * r);
  }
  return 1.0 - sse.value() / sst;
}

DeterministicGame zero_imputed_vf(const LinearModel& model,
                                  const Dataset& data,
                                  std::span<const double> baseline,
                                  int threads) {
  check_dataset(data);
  const std::size_t d = data.num_features;
  if (model.weights.size() != d) {
    throw DomainError("zero_imputed_vf: model has " +
                      std::to_string(model.weights.size()) +
                      " weights, data has " + std::to_string(d) +
                      " features");
  }
  if (d > static_cast<std::size_t>(kMaxExactPlayers)) {
    throw CapacityError("zero_imputed_vf: " + std::to_string(d) +
                        " features exceed the exact cap of " +
                        std::to_string(kMaxExactPlayers));
  }
  if (!baseline.empty() && baseline.size() != d) {
    throw DomainError("zero_imputed_vf: baseline has " +
                      std::to_string(baseline.size()) + " entries, needs " +
                      std::to_string(d));
  }

  const std::size_t k = data.num_points;
  const double sst = squared_deviation_sum(data.targets, target_mean(data));
  if (!(sst > 0.0)) {
    throw DomainError("zero_imputed_vf: target variance is zero");
  }

  // Prediction of coalition S: base + sum_{j in S} delta_col[j], where the
  // baseline contribution of every feature is folded into `base`.
  KahanAccumulator base_acc;
  base_acc.add(model.intercept);
  for (std::size_t j = 0; j < d; ++j) {
    base_acc.add(model.weights[j] * (baseline.empty() ? 0.0 : baseline[j]));
  }
  const double base = base_acc.value();
  std::vector<double> delta_col(d * k);  // column-major
  for (std::size_t j = 0; j < d; ++j) {
    const double z = baseline.empty() ? 0.0 : baseline[j];
    for (std::size_t i = 0; i < k; ++i) {
      delta_col[j * k + i] = model.weights[j] * (data.feature(i, j) - z);
    }
  }

  const std::size_t count = std::size_t{1} << d;
  std::vector<double> table(count);
  // Reflected-Gray sweep: consecutive coalitions differ in one feature, so
  // each step updates the prediction vector with one column. The sweep is
  // cut into a fixed number of blocks (each re-seeded from scratch), which
  // bounds drift and parallelizes without affecting results.
  const std::size_t blocks = std::min(kTableBlocks, count);
  const std::size_t step = (count + blocks - 1) / blocks;
  parallel_for(blocks, threads, [&](std::size_t blk) {
    const std::size_t begin = blk * step;
    const std::size_t end = std::min(count, begin + step);
    if (begin >= end) return;
    std::vector<double> pred(k, base);
    std::uint64_t mask = begin ^ (begin >> 1);
    for (std::size_t j = 0; j < d; ++j) {
      if ((mask >> j) & 1u) {
        const double* col = delta_col.data() + j * k;
        for (std::size_t i = 0; i < k; ++i) pred[i] += col[i];
      }
    }
    for (std::size_t t = begin; t < end; ++t) {
      if (t != begin) {
        const std::size_t flip =
            static_cast<std::size_t>(std::countr_zero(t));
        const std::uint64_t next_mask = t ^ (t >> 1);
        const double sign = ((next_mask >> flip) & 1u) ? 1.0 : -1.0;
        const double* col = delta_col.data() + flip * k;
        for (std::size_t i = 0; i < k; ++i) pred[i] += sign * col[i];
        mask = next_mask;
      }
      double sse = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double r = data.targets[i] - pred[i];
        sse += r * r;
      }
      table[mask] = 1.0 - sse / sst;
    }
  });
  return DeterministicGame::from_table(static_cast<int>(d),
                                       std::move(table));
}

NoiseModel experiment_noise(ExperimentNoiseKind kind) {
  switch (kind) {
    case ExperimentNoiseKind::kBernoulli:
      return NoiseModel::bernoulli_offset(0.33, 0.05);
    case ExperimentNoiseKind::kGaussian:
      return NoiseModel::gaussian(0.01);
  }
  throw DomainError("experiment_noise: unknown kind");
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DomainError("load_dataset_csv: cannot open " + path.string());
  }
  Dataset data;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::vector<double> fields;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    while (ptr < end) {
      double value = 0.0;
      const auto [next, ec] = std::from_chars(ptr, end, value);
      if (ec != std::errc{}) {
        throw DomainError("load_dataset_csv: bad number in row " +
                          std::to_string(row));
      }
      fields.push_back(value);
      ptr = next;
      if (ptr < end) {
        if (*ptr != ',') {
          throw DomainError("load_dataset_csv: expected ',' in row " +
                            std::to_string(row));
        }
        ++ptr;
      }
    }
    if (fields.size() < 2) {
      throw DomainError("load_dataset_csv: row " + std::to_string(row) +
                        " needs at least one feature and a target");
    }
    if (data.num_features == 0) {
      data.num_features = fields.size() - 1;
    } else if (fields.size() - 1 != data.num_features) {
      throw DomainError("load_dataset_csv: row " + std::to_string(row) +
                        " has " + std::to_string(fields.size() - 1) +
                        " features, expected " +
                        std::to_string(data.num_features));
    }
    data.features.insert(data.features.end(), fields.begin(),
                         fields.end() - 1);
    data.targets.push_back(fields.back());
  }
  data.num_points = data.targets.size();
  if (data.num_points == 0) {
    throw DomainError("load_dataset_csv: empty file");
  }
  return data;
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  check_dataset(data);
  std::ofstream out(path);
  if (!out) {
    throw DomainError("save_dataset_csv: cannot open " + path.string());
  }
  char buf[64];
  for (std::size_t i = 0; i < data.num_points; ++i) {
    for (std::size_t j = 0; j < data.num_features; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.feature(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.targets[i]);
    out << buf << '\n';
  }
  if (!out.good()) {
    throw DomainError("save_dataset_csv: write failed for " + path.string());
  }
}

}  // namespace shapuq
