#include "shapuq/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "shapuq/errors.hpp"
#include "shapuq/numeric.hpp"
#include "shapuq/parallel.hpp"

namespace shapuq {

namespace {

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

void check_noise_table(const std::vector<double>& means,
                       const std::vector<double>& second_moments) {
  if (!is_power_of_two(means.size())) {
    throw DomainError("NoiseModel: table size must be 2^n, got " +
                      std::to_string(means.size()));
  }
  if (second_moments.size() != means.size()) {
    throw DomainError("NoiseModel: mean and second-moment tables differ in "
                      "size");
  }
  for (std::size_t s = 0; s < means.size(); ++s) {
    if (!std::isfinite(means[s]) || !std::isfinite(second_moments[s])) {
      throw DomainError("NoiseModel: non-finite table entry at coalition " +
                        std::to_string(s));
    }
    const double var = second_moments[s] - means[s] * means[s];
    if (var < -1e-12 * std::max(1.0, means[s] * means[s])) {
      throw DomainError(
          "NoiseModel: second moment below squared mean at coalition " +
          std::to_string(s));
    }
  }
}

}  // namespace

NoiseModel NoiseModel::none() { return NoiseModel(Law{NoNoise{}}); }

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw DomainError("NoiseModel: gaussian sigma must be finite and >= 0");
  }
  return NoiseModel(Law{GaussianNoise{sigma}});
}

NoiseModel NoiseModel::bernoulli_offset(double p, double c) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("NoiseModel: bernoulli p must lie in [0, 1]");
  }
  if (!std::isfinite(c)) {
    throw DomainError("NoiseModel: bernoulli offset c must be finite");
  }
  return NoiseModel(Law{BernoulliOffsetNoise{p, c}});
}

NoiseModel NoiseModel::table(std::vector<double> means,
                             std::vector<double> second_moments) {
  check_noise_table(means, second_moments);
  return NoiseModel(Law{TableNoise{std::move(means),
                                   std::move(second_moments)}});
}

NoiseModel NoiseModel::bias_table(std::vector<double> means) {
  std::vector<double> second_moments(means.size());
  for (std::size_t s = 0; s < means.size(); ++s) {
    second_moments[s] = means[s] * means[s];
  }
  return table(std::move(means), std::move(second_moments));
}

NoiseModel NoiseModel::custom(
    std::function<double(const Coalition&, RngStream&)> sampler,
    std::function<double(const Coalition&, int)> moment) {
  if (!sampler) {
    throw DomainError("NoiseModel: custom noise needs a sampler");
  }
  return NoiseModel(Law{CustomNoise{std::move(sampler), std::move(moment)}});
}

bool NoiseModel::has_analytic_moments(int order) const {
  return std::visit(
      [order](const auto& law) -> bool {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, TableNoise>) {
          return order <= 2;
        } else if constexpr (std::is_same_v<T, CustomNoise>) {
          return static_cast<bool>(law.moment);
        } else {
          return true;
        }
      },
      law_);
}

DeterministicGame DeterministicGame::from_table(int n,
                                                std::vector<double> values) {
  if (n < 1) throw DomainError("DeterministicGame: need at least one player");
  if (n > kMaxExactPlayers) {
    throw CapacityError("DeterministicGame: table form supports at most " +
                        std::to_string(kMaxExactPlayers) + " players, got " +
                        std::to_string(n));
  }
  const std::size_t expected = std::size_t{1} << n;
  if (values.size() != expected) {
    throw MalformedGameError("DeterministicGame: expected " +
                             std::to_string(expected) + " coalition values, "
                             "got " + std::to_string(values.size()));
  }
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (!std::isfinite(values[s])) {
      throw MalformedGameError(
          "DeterministicGame: non-finite value at coalition bitmask " +
          std::to_string(s));
    }
  }
  return DeterministicGame(n, std::move(values), nullptr);
}

DeterministicGame DeterministicGame::from_callback(
    int n, std::function<double(const Coalition&)> fn) {
  if (n < 1) throw DomainError("DeterministicGame: need at least one player");
  if (n > kMaxPlayers) {
    throw CapacityError("DeterministicGame: at most " +
                        std::to_string(kMaxPlayers) + " players, got " +
                        std::to_string(n));
  }
  if (!fn) throw DomainError("DeterministicGame: null callback");
  return DeterministicGame(n, {}, std::move(fn));
}

double DeterministicGame::evaluate(const Coalition& s) const {
  if (s.player_count() != n_) {
    throw DomainError("DeterministicGame: coalition is over " +
                      std::to_string(s.player_count()) + " players, not " +
                      std::to_string(n_));
  }
  if (has_table()) return values_[s.bits()];
  const double v = fn_(s);
  if (!std::isfinite(v)) {
    throw MalformedGameError(
        "DeterministicGame: callback returned a non-finite value at "
        "coalition bitmask " + std::to_string(s.bits()));
  }
  return v;
}

const std::vector<double>& DeterministicGame::table() const {
  if (!has_table()) {
    throw DomainError("DeterministicGame: callback game has no table");
  }
  return values_;
}

std::vector<double> DeterministicGame::materialize(int threads) const {
  if (n_ > kMaxExactPlayers) {
    throw CapacityError("DeterministicGame: cannot materialize " +
                        std::to_string(n_) + " players (cap " +
                        std::to_string(kMaxExactPlayers) + ")");
  }
  if (has_table()) return values_;
  const std::size_t count = std::size_t{1} << n_;
  std::vector<double> out(count);
  parallel_for(count, threads, [&](std::size_t bits) {
    out[bits] = evaluate(Coalition(bits, n_));
  });
  return out;
}

UncertainGame::UncertainGame(DeterministicGame base, NoiseModel noise)
    : base_(std::move(base)), noise_(std::move(noise)) {
  if (const auto* t = std::get_if<TableNoise>(&noise_.law())) {
    const std::size_t expected = std::size_t{1} << base_.player_count();
    if (t->means.size() != expected) {
      throw MalformedGameError("UncertainGame: noise table covers " +
                               std::to_string(t->means.size()) +
                               " coalitions, game needs " +
                               std::to_string(expected));
    }
  }
}

double UncertainGame::sample(const Coalition& s, RngStream& stream) const {
  const double v = base_.evaluate(s);
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, NoNoise>) {
          return v;
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return v + law.sigma * stream.next_normal();
        } else if constexpr (std::is_same_v<T, BernoulliOffsetNoise>) {
          return v + (stream.next_uniform() < law.p ? law.c : 0.0);
        } else if constexpr (std::is_same_v<T, TableNoise>) {
          const std::size_t bits = s.bits();
          const double mu = law.means[bits];
          const double var = law.second_moments[bits] - mu * mu;
          const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
          return v + mu + sd * stream.next_normal();
        } else {
          return v + law.sampler(s, stream);
        }
      },
      noise_.law());
}

double UncertainGame::noise_moment(const Coalition& s, int k) const {
  if (s.player_count() != player_count()) {
    throw DomainError("UncertainGame: coalition is over " +
                      std::to_string(s.player_count()) + " players, not " +
                      std::to_string(player_count()));
  }
  if (k < 0) throw DomainError("UncertainGame: moment order must be >= 0");
  if (k == 0) return 1.0;
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, NoNoise>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (k % 2 == 1) return 0.0;
          return pow_i(law.sigma, static_cast<unsigned>(k)) *
                 double_factorial_odd(k);
        } else if constexpr (std::is_same_v<T, BernoulliOffsetNoise>) {
          return law.p * pow_i(law.c, static_cast<unsigned>(k));
        } else if constexpr (std::is_same_v<T, TableNoise>) {
          if (k == 1) return law.means[s.bits()];
          if (k == 2) return law.second_moments[s.bits()];
          throw UnsupportedAnalyticsError(
              "UncertainGame: table noise declares moments up to order 2, "
              "order " + std::to_string(k) + " requested");
        } else {
          if (!law.moment) {
            throw UnsupportedAnalyticsError(
                "UncertainGame: custom noise declares no analytic moments");
          }
          return law.moment(s, k);
        }
      },
      noise_.law());
}

double UncertainGame::epsilon_moment(int i, const Coalition& s, int k) const {
  if (k < 0) throw DomainError("UncertainGame: moment order must be >= 0");
  if (s.contains(i)) {
    throw DomainError("UncertainGame: player " + std::to_string(i) +
                      " already belongs to the coalition");
  }
  if (k == 0) return 1.0;
  const Coalition with_i = s.with(i);
  // E[(A - B)^k] for independent A = nu(S u {i}), B = nu(S).
  KahanAccumulator acc;
  for (int j = 0; j <= k; ++j) {
    const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
    const double coeff = static_cast<double>(
        binomial_u64(static_cast<unsigned>(k), static_cast<unsigned>(j)));
    acc.add(sign * coeff * noise_moment(with_i, j) * noise_moment(s, k - j));
  }
  return acc.value();
}

}  // namespace shapuq
