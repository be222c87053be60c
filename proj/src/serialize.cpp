#include "shapuq/serialize.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "shapuq/errors.hpp"
#include "shapuq/version.hpp"

namespace shapuq {

namespace {

std::uint64_t parse_coalition_key(const std::string& key, int n) {
  if (!key.empty() && key.front() == '[') {
    Json arr;
    try {
      arr = Json::parse(key);
    } catch (const Json::parse_error&) {
      throw MalformedGameError("coalition key '" + key +
                               "' is not a player list");
    }
    if (!arr.is_array()) {
      throw MalformedGameError("coalition key '" + key +
                               "' is not a player list");
    }
    std::uint64_t bits = 0;
    for (const auto& entry : arr) {
      if (!entry.is_number_integer()) {
        throw MalformedGameError("coalition key '" + key +
                                 "' holds a non-integer player");
      }
      const long long p = entry.get<long long>();
      if (p < 1 || p > n) {
        throw MalformedGameError("coalition key '" + key + "': player " +
                                 std::to_string(p) + " outside [1, " +
                                 std::to_string(n) + "]");
      }
      bits |= std::uint64_t{1} << (p - 1);
    }
    return bits;
  }
  std::uint64_t bits = 0;
  if (key.empty()) throw MalformedGameError("empty coalition key");
  for (char ch : key) {
    if (ch < '0' || ch > '9') {
      throw MalformedGameError("coalition key '" + key +
                               "' is not a decimal bitmask");
    }
    bits = bits * 10 + static_cast<std::uint64_t>(ch - '0');
    if (bits >> 60) {
      throw MalformedGameError("coalition key '" + key + "' overflows");
    }
  }
  if (n < 64 && (bits >> n) != 0) {
    throw MalformedGameError("coalition key '" + key +
                             "' has players above index " +
                             std::to_string(n));
  }
  return bits;
}

std::vector<double> parse_value_table(const Json& obj, int n,
                                      const char* what) {
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> values(count, 0.0);
  std::vector<bool> seen(count, false);
  for (const auto& [key, value] : obj.items()) {
    const std::uint64_t bits = parse_coalition_key(key, n);
    if (!value.is_number()) {
      throw MalformedGameError(std::string(what) + ": value for coalition '" +
                               key + "' is not a number");
    }
    const double v = value.get<double>();
    if (!std::isfinite(v)) {
      throw MalformedGameError(std::string(what) + ": non-finite value for "
                               "coalition '" + key + "'");
    }
    if (seen[bits]) {
      throw MalformedGameError(std::string(what) + ": coalition '" + key +
                               "' listed twice");
    }
    seen[bits] = true;
    values[bits] = v;
  }
  for (std::size_t s = 0; s < count; ++s) {
    if (!seen[s]) {
      throw MalformedGameError(std::string(what) + ": coalition bitmask " +
                               std::to_string(s) + " is missing");
    }
  }
  return values;
}

int table_player_count(const Json& obj, const char* what) {
  const std::size_t count = obj.size();
  if (count == 0 || (count & (count - 1)) != 0) {
    throw MalformedGameError(std::string(what) + ": table holds " +
                             std::to_string(count) +
                             " coalitions, expected a power of two");
  }
  int n = 0;
  while ((std::size_t{1} << n) < count) ++n;
  return n;
}

Json value_table_to_json(const std::vector<double>& values) {
  Json obj = Json::object();
  for (std::size_t s = 0; s < values.size(); ++s) {
    obj[std::to_string(s)] = values[s];
  }
  return obj;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf);
}

DeterministicGame game_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("values")) {
    throw MalformedGameError(
        "game: expected an object with 'n' and 'values'");
  }
  if (!j["n"].is_number_integer()) {
    throw MalformedGameError("game: 'n' must be an integer");
  }
  const long long n = j["n"].get<long long>();
  if (n < 1) throw MalformedGameError("game: 'n' must be >= 1");
  if (n > kMaxExactPlayers) {
    throw CapacityError("game: n = " + std::to_string(n) +
                        " exceeds the table cap of " +
                        std::to_string(kMaxExactPlayers));
  }
  if (!j["values"].is_object()) {
    throw MalformedGameError("game: 'values' must be an object");
  }
  return DeterministicGame::from_table(
      static_cast<int>(n),
      parse_value_table(j["values"], static_cast<int>(n), "game"));
}

Json game_to_json(const DeterministicGame& game) {
  Json j;
  j["n"] = game.player_count();
  j["values"] = value_table_to_json(game.materialize());
  return j;
}

DeterministicGame load_game(const std::filesystem::path& path) {
  return game_from_json(load_json(path));
}

void save_game(const DeterministicGame& game,
               const std::filesystem::path& path) {
  write_text_file(path, game_to_json(game).dump(2) + "\n");
}

NoiseModel noise_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw MalformedGameError("noise: expected an object with a 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "none") return NoiseModel::none();
  if (type == "gaussian") {
    if (!j.contains("sigma") || !j["sigma"].is_number()) {
      throw MalformedGameError("noise: gaussian needs a numeric 'sigma'");
    }
    return NoiseModel::gaussian(j["sigma"].get<double>());
  }
  if (type == "bernoulli" || type == "bernoulli_offset") {
    if (!j.contains("p") || !j["p"].is_number() || !j.contains("c") ||
        !j["c"].is_number()) {
      throw MalformedGameError("noise: bernoulli needs numeric 'p' and 'c'");
    }
    return NoiseModel::bernoulli_offset(j["p"].get<double>(),
                                        j["c"].get<double>());
  }
  if (type == "table") {
    if (!j.contains("means") || !j["means"].is_object()) {
      throw MalformedGameError("noise: table needs a 'means' object");
    }
    const int n = table_player_count(j["means"], "noise");
    std::vector<double> means = parse_value_table(j["means"], n, "noise");
    if (!j.contains("second_moments")) {
      return NoiseModel::bias_table(std::move(means));
    }
    if (!j["second_moments"].is_object()) {
      throw MalformedGameError("noise: 'second_moments' must be an object");
    }
    return NoiseModel::table(
        std::move(means),
        parse_value_table(j["second_moments"], n, "noise"));
  }
  throw MalformedGameError("noise: unknown type '" + type + "'");
}

Json noise_to_json(const NoiseModel& noise) {
  Json j;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, NoNoise>) {
          j["type"] = "none";
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          j["type"] = "gaussian";
          j["sigma"] = law.sigma;
        } else if constexpr (std::is_same_v<T, BernoulliOffsetNoise>) {
          j["type"] = "bernoulli";
          j["p"] = law.p;
          j["c"] = law.c;
        } else if constexpr (std::is_same_v<T, TableNoise>) {
          j["type"] = "table";
          j["means"] = value_table_to_json(law.means);
          j["second_moments"] = value_table_to_json(law.second_moments);
        } else {
          throw DomainError("noise: custom noise has no JSON form");
        }
      },
      noise.law());
  return j;
}

NoiseModel load_noise(const std::filesystem::path& path) {
  return noise_from_json(load_json(path));
}

Json shapley_result_to_json(const ShapleyResult& result) {
  Json players = Json::array();
  for (std::size_t i = 0; i < result.phi.size(); ++i) {
    Json row;
    row["player"] = i + 1;
    row["phi"] = result.phi[i];
    row["sigma2"] = result.sigma2[i];
    players.push_back(std::move(row));
  }
  Json j;
  j["n"] = result.phi.size();
  j["players"] = std::move(players);
  return j;
}

std::string shapley_result_to_csv(const ShapleyResult& result) {
  std::string csv = "player,phi,sigma2\n";
  for (std::size_t i = 0; i < result.phi.size(); ++i) {
    csv += std::to_string(i + 1) + ',' + format_real(result.phi[i]) + ',' +
           format_real(result.sigma2[i]) + '\n';
  }
  return csv;
}

Json uncertain_result_to_json(const UncertainShapleyResult& result) {
  Json players = Json::array();
  for (std::size_t i = 0; i < result.phi.size(); ++i) {
    Json row;
    row["player"] = i + 1;
    row["phi"] = result.phi[i];
    row["gamma"] = result.gamma[i];
    row["phi_tilde"] = result.phi_tilde[i];
    row["sigma2_intrinsic"] = result.sigma2_intrinsic[i];
    row["sigma2_gamma"] = result.sigma2_gamma[i];
    row["xi"] = result.xi[i];
    row["sigma2_total"] = result.sigma2_total[i];
    players.push_back(std::move(row));
  }
  Json j;
  j["n"] = result.phi.size();
  j["players"] = std::move(players);
  return j;
}

std::string uncertain_result_to_csv(const UncertainShapleyResult& result) {
  std::string csv =
      "player,phi,sigma2,gamma,phi_tilde,sigma2_gamma,xi,sigma2_total\n";
  for (std::size_t i = 0; i < result.phi.size(); ++i) {
    csv += std::to_string(i + 1) + ',' + format_real(result.phi[i]) + ',' +
           format_real(result.sigma2_intrinsic[i]) + ',' +
           format_real(result.gamma[i]) + ',' +
           format_real(result.phi_tilde[i]) + ',' +
           format_real(result.sigma2_gamma[i]) + ',' +
           format_real(result.xi[i]) + ',' +
           format_real(result.sigma2_total[i]) + '\n';
  }
  return csv;
}

Json estimates_to_json(const std::vector<Estimate>& estimates) {
  Json players = Json::array();
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Estimate& e = estimates[i];
    Json row;
    row["player"] = i + 1;
    row["mean"] = e.mean;
    row["std_error"] = e.std_error;
    row["ci_low"] = e.ci_low;
    row["ci_high"] = e.ci_high;
    row["evaluations"] = e.evaluations_used;
    players.push_back(std::move(row));
  }
  Json j;
  j["n"] = estimates.size();
  j["players"] = std::move(players);
  return j;
}

std::string estimates_to_csv(const std::vector<Estimate>& estimates) {
  std::string csv = "player,mean,std_error,ci_low,ci_high,evaluations\n";
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Estimate& e = estimates[i];
    csv += std::to_string(i + 1) + ',' + format_real(e.mean) + ',' +
           format_real(e.std_error) + ',' + format_real(e.ci_low) + ',' +
           format_real(e.ci_high) + ',' +
           std::to_string(e.evaluations_used) + '\n';
  }
  return csv;
}

void append_distribution_rows(std::string& csv,
                              const MarginalDistribution& dist) {
  for (const auto& atom : dist.atoms) {
    csv += std::to_string(dist.player) + ',' + format_real(atom.value) + ',' +
           format_real(atom.mass) + '\n';
  }
}

void append_mixture_rows(std::string& csv, const MixtureDensity& density) {
  if (density.kind == MixtureDensity::Kind::kDiscrete) {
    for (const auto& atom : density.atoms) {
      csv += std::to_string(density.player) + ',' + format_real(atom.value) +
             ',' + format_real(atom.mass) + '\n';
    }
    return;
  }
  for (std::size_t g = 0; g < density.grid.size(); ++g) {
    csv += std::to_string(density.player) + ',' + format_real(density.grid[g]) +
           ',' + format_real(density.density[g]) + '\n';
  }
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["seed"] = seed;
  j["version"] = version;
  j["timestamp"] = timestamp;
  return j;
}

RunManifest make_manifest(std::string command, Json parameters,
                          std::uint64_t seed) {
  RunManifest m;
  m.command = std::move(command);
  m.parameters = std::move(parameters);
  m.seed = seed;
  m.version = kVersionString;
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  m.timestamp = buf;
  return m;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MalformedGameError("cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw MalformedGameError("invalid JSON in " + path.string() + ": " +
                             e.what());
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw DomainError("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out.good()) {
    throw DomainError("write failed for " + path.string());
  }
}

}  // namespace shapuq
