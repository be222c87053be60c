#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapuq/estimator.hpp"
#include "shapuq/game.hpp"
#include "shapuq/shapley_exact.hpp"
#include "shapuq/shapley_uncertain.hpp"

namespace shapuq {

using Json = nlohmann::ordered_json;

/// Full round-trip formatting: 17 significant digits.
std::string format_real(double value);

// Games travel as {"n": <int>, "values": {"<coalition>": <real>, ...}}.
// A coalition key is a decimal bitmask string ("5") or a 1-based player
// list ("[1,3]"); emitted form is always the decimal bitmask.
DeterministicGame game_from_json(const Json& j);
Json game_to_json(const DeterministicGame& game);
DeterministicGame load_game(const std::filesystem::path& path);
void save_game(const DeterministicGame& game,
               const std::filesystem::path& path);

// Noise travels as {"type": "none"} | {"type": "gaussian", "sigma": s}
// | {"type": "bernoulli", "p": p, "c": c}
// | {"type": "table", "means": {...}, "second_moments": {...}}.
// Omitted second moments declare a deterministic offset (nu(S) == mean(S)).
NoiseModel noise_from_json(const Json& j);
Json noise_to_json(const NoiseModel& noise);
NoiseModel load_noise(const std::filesystem::path& path);

Json shapley_result_to_json(const ShapleyResult& result);
std::string shapley_result_to_csv(const ShapleyResult& result);

Json uncertain_result_to_json(const UncertainShapleyResult& result);
std::string uncertain_result_to_csv(const UncertainShapleyResult& result);

Json estimates_to_json(const std::vector<Estimate>& estimates);
std::string estimates_to_csv(const std::vector<Estimate>& estimates);

/// Appends `player,value,mass` rows (no header).
void append_distribution_rows(std::string& csv,
                              const MarginalDistribution& dist);
/// Appends `player,value,mass` or `player,value,density` rows (no header).
void append_mixture_rows(std::string& csv, const MixtureDensity& density);

/// Provenance stamp written next to every output file; rerunning the
/// recorded command with the recorded parameters and seed reproduces the
/// data files bit for bit.
struct RunManifest {
  std::string command;
  Json parameters;
  std::uint64_t seed = 0;
  std::string version;
  std::string timestamp;

  Json to_json() const;
};

RunManifest make_manifest(std::string command, Json parameters,
                          std::uint64_t seed);

Json load_json(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace shapuq
