#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "shapuq/coalition.hpp"
#include "shapuq/rng.hpp"

namespace shapuq {

struct NoNoise {};

/// nu(S) ~ N(0, sigma^2), independent of the coalition.
struct GaussianNoise {
  double sigma;
};

/// nu(S) = c * Bernoulli(p), independent of the coalition.
struct BernoulliOffsetNoise {
  double p;
  double c;
};

/// Per-coalition first and second raw moments, indexed by bitmask.
/// Sampling uses a normal law matching the two declared moments; analytic
/// queries beyond order two are refused.
struct TableNoise {
  std::vector<double> means;
  std::vector<double> second_moments;
};

/// User-supplied sampler with optionally declared raw moments E[nu^k | S].
struct CustomNoise {
  std::function<double(const Coalition&, RngStream&)> sampler;
  std::function<double(const Coalition&, int)> moment;
};

class NoiseModel {
 public:
  using Law = std::variant<NoNoise, GaussianNoise, BernoulliOffsetNoise,
                           TableNoise, CustomNoise>;

  static NoiseModel none();
  static NoiseModel gaussian(double sigma);
  static NoiseModel bernoulli_offset(double p, double c);
  static NoiseModel table(std::vector<double> means,
                          std::vector<double> second_moments);
  /// Deterministic per-coalition offset: nu(S) == means[S] almost surely.
  static NoiseModel bias_table(std::vector<double> means);
  static NoiseModel custom(
      std::function<double(const Coalition&, RngStream&)> sampler,
      std::function<double(const Coalition&, int)> moment = nullptr);

  const Law& law() const { return law_; }
  bool is_none() const { return std::holds_alternative<NoNoise>(law_); }
  /// True when E[nu^k | S] is analytically available up to the given order.
  bool has_analytic_moments(int order) const;

 private:
  explicit NoiseModel(Law law) : law_(std::move(law)) {}
  Law law_;
};

/// A cooperative game v: 2^{1..n} -> R, backed either by a dense value table
/// (bitmask-indexed) or by a callback.
class DeterministicGame {
 public:
  static DeterministicGame from_table(int n, std::vector<double> values);
  static DeterministicGame from_callback(
      int n, std::function<double(const Coalition&)> fn);

  int player_count() const { return n_; }
  double evaluate(const Coalition& s) const;
  bool has_table() const { return !values_.empty(); }
  const std::vector<double>& table() const;
  /// All 2^n values in bitmask order. Callback games get evaluated exactly
  /// once per coalition; table games return a copy of the table.
  std::vector<double> materialize(int threads = 0) const;

 private:
  DeterministicGame(int n, std::vector<double> values,
                    std::function<double(const Coalition&)> fn)
      : n_(n), values_(std::move(values)), fn_(std::move(fn)) {}

  int n_ = 0;
  std::vector<double> values_;
  std::function<double(const Coalition&)> fn_;
};

/// A game whose evaluations are corrupted by additive noise:
/// each evaluation returns v(S) + nu(S) with nu drawn fresh, independently
/// across calls (also across repeated calls at the same coalition).
class UncertainGame {
 public:
  UncertainGame(DeterministicGame base, NoiseModel noise);

  const DeterministicGame& base() const { return base_; }
  const NoiseModel& noise() const { return noise_; }
  int player_count() const { return base_.player_count(); }

  /// One draw of v(S) + nu(S). With no noise this is bit-identical to
  /// base().evaluate(S) and consumes nothing from the stream.
  double sample(const Coalition& s, RngStream& stream) const;

  /// E[nu(S)^k].
  double noise_moment(const Coalition& s, int k) const;

  /// E[eps_i(S)^k] where eps_i(S) = nu(S u {i}) - nu(S), the two draws
  /// independent; requires i not in S.
  double epsilon_moment(int i, const Coalition& s, int k) const;

 private:
  DeterministicGame base_;
  NoiseModel noise_;
};

}  // namespace shapuq
