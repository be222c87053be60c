// shapuq: exact Shapley values for cooperative games, with first-class
// support for value functions that can only be evaluated with noise.
//
// Exit codes: 0 success, 2 invalid input, 3 over capacity, 4 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapuq/errors.hpp"
#include "shapuq/estimator.hpp"
#include "shapuq/mlvf.hpp"
#include "shapuq/numeric.hpp"
#include "shapuq/serialize.hpp"
#include "shapuq/shapley_exact.hpp"
#include "shapuq/shapley_uncertain.hpp"
#include "shapuq/version.hpp"

namespace fs = std::filesystem;
using namespace shapuq;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag) {
  if (seed_opt->count() > 0) return flag;
  if (const char* env = std::getenv("SHAPUQ_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw DomainError("SHAPUQ_SEED is not an unsigned integer: " +
                        std::string(env));
    }
    return static_cast<std::uint64_t>(v);
  }
  return kDefaultSeed;
}

bool wants_csv(const std::string& format, const std::string& out) {
  if (format == "csv") return true;
  if (format == "json") return false;
  return out.size() > 4 && out.substr(out.size() - 4) == ".csv";
}

void emit(const Json& as_json, const std::string& as_csv,
          const std::string& out, const std::string& format,
          const RunManifest& manifest) {
  const std::string text =
      wants_csv(format, out) ? as_csv : as_json.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  write_text_file(out, text);
  write_text_file(out + ".manifest.json", manifest.to_json().dump(2) + "\n");
}

int run(int argc, char** argv) {
  CLI::App app{"Shapley values for games with exact or noisy evaluations"};
  app.set_version_flag("--version", kVersionString);
  app.require_subcommand(1);

  // --- solve ---
  auto* solve = app.add_subcommand(
      "solve", "Exact Shapley values and intrinsic variances");
  std::string solve_game, solve_out, solve_format;
  int solve_threads = 0;
  solve->add_option("game", solve_game, "Game JSON file")->required();
  solve->add_option("-o,--out", solve_out, "Output file");
  solve->add_option("--format", solve_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  solve->add_option("--threads", solve_threads, "Worker threads (0 = all)");

  // --- uncertain ---
  auto* unc = app.add_subcommand(
      "uncertain",
      "Shapley values under evaluation noise: bias, shift, variance split");
  std::string unc_game, unc_noise, unc_out, unc_format, unc_shifted;
  int unc_threads = 0;
  unc->add_option("game", unc_game, "Game JSON file")->required();
  unc->add_option("noise", unc_noise, "Noise JSON file")->required();
  unc->add_option("-o,--out", unc_out, "Output file");
  unc->add_option("--format", unc_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  unc->add_option("--emit-shifted", unc_shifted,
                  "Also write the bias-shifted game to this JSON file");
  unc->add_option("--threads", unc_threads, "Worker threads (0 = all)");

  // --- estimate ---
  auto* est = app.add_subcommand(
      "estimate", "Sample-mean estimates with confidence intervals");
  std::string est_game, est_noise, est_out, est_format;
  int est_repeats = 100;
  std::int64_t est_perms = 0;
  std::uint64_t est_seed = 0;
  double est_conf = 0.95;
  int est_threads = 0;
  est->add_option("game", est_game, "Game JSON file")->required();
  est->add_option("noise", est_noise, "Noise JSON file")->required();
  auto* est_rep_opt = est->add_option(
      "--repeats", est_repeats, "Draws per coalition (enumeration mode)");
  auto* est_perm_opt = est->add_option(
      "--permutations", est_perms,
      "Sampled orderings (switches to permutation sampling)");
  est_rep_opt->excludes(est_perm_opt);
  auto* est_seed_opt = est->add_option("--seed", est_seed, "Master seed");
  est->add_option("--confidence", est_conf, "Confidence level, e.g. 0.95");
  est->add_option("-o,--out", est_out, "Output file");
  est->add_option("--format", est_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  est->add_option("--threads", est_threads, "Worker threads (0 = all)");

  // --- dist ---
  auto* dist = app.add_subcommand(
      "dist", "Marginal-contribution distributions as CSV");
  std::string dist_game, dist_noise, dist_out;
  int dist_player = 0;
  double dist_gmin = 0.0, dist_gmax = 0.0;
  int dist_gpoints = 1024;
  int dist_threads = 0;
  dist->add_option("game", dist_game, "Game JSON file")->required();
  dist->add_option("noise", dist_noise, "Noise JSON file (optional)");
  dist->add_option("--player", dist_player, "Player (0 = all)");
  auto* gmin_opt = dist->add_option("--grid-min", dist_gmin,
                                    "Grid start (continuous mixtures)");
  auto* gmax_opt = dist->add_option("--grid-max", dist_gmax,
                                    "Grid end (continuous mixtures)");
  dist->add_option("--grid-points", dist_gpoints, "Grid size")
      ->check(CLI::Range(2, 1 << 22));
  gmin_opt->needs(gmax_opt);
  gmax_opt->needs(gmin_opt);
  dist->add_option("-o,--out", dist_out, "Output CSV file");
  dist->add_option("--threads", dist_threads, "Worker threads (0 = all)");

  // --- experiment ---
  auto* exp = app.add_subcommand(
      "experiment",
      "Synthetic-regression feature attribution with noisy R^2 evaluations");
  std::size_t exp_samples = 0, exp_features = 0;
  double exp_noise_level = 0.1;
  std::string exp_vf_noise = "bernoulli";
  std::uint64_t exp_seed = 0;
  int exp_repeats = 0;
  std::string exp_outdir = "experiment_out";
  bool exp_save_data = false;
  int exp_threads = 0;
  exp->add_option("--samples", exp_samples, "Data points")->required();
  exp->add_option("--features", exp_features, "Features (= players)")
      ->required();
  exp->add_option("--noise-level", exp_noise_level,
                  "Target noise level of the generated data");
  exp->add_option("--vf-noise", exp_vf_noise,
                  "Evaluation noise on the value function")
      ->check(CLI::IsMember({"none", "bernoulli", "gaussian"}));
  auto* exp_seed_opt = exp->add_option("--seed", exp_seed, "Master seed");
  exp->add_option("--repeats", exp_repeats,
                  "Also write sample-mean estimates from this many draws "
                  "per coalition");
  exp->add_option("--outdir", exp_outdir, "Output directory");
  exp->add_flag("--save-data", exp_save_data, "Also write dataset.csv");
  exp->add_option("--threads", exp_threads, "Worker threads (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*solve) {
    const DeterministicGame game = load_game(solve_game);
    const ShapleyResult result = shapley_all(game, solve_threads);
    Json params;
    params["game"] = solve_game;
    emit(shapley_result_to_json(result), shapley_result_to_csv(result),
         solve_out, solve_format, make_manifest("solve", params, 0));
    return 0;
  }

  if (*unc) {
    const DeterministicGame game = load_game(unc_game);
    const NoiseModel noise = load_noise(unc_noise);
    const UncertainGame ugame(game, noise);
    const UncertainShapleyResult result = uncertain_shapley(ugame, unc_threads);
    Json params;
    params["game"] = unc_game;
    params["noise"] = unc_noise;
    if (!unc_shifted.empty()) params["emit_shifted"] = unc_shifted;
    const RunManifest manifest = make_manifest("uncertain", params, 0);
    if (!unc_shifted.empty()) {
      save_game(shifted_game(ugame), unc_shifted);
      write_text_file(unc_shifted + ".manifest.json",
                      manifest.to_json().dump(2) + "\n");
    }
    emit(uncertain_result_to_json(result), uncertain_result_to_csv(result),
         unc_out, unc_format, manifest);
    return 0;
  }

  if (*est) {
    const DeterministicGame game = load_game(est_game);
    const NoiseModel noise = load_noise(est_noise);
    const UncertainGame ugame(game, noise);
    EstimatorConfig config;
    config.repeats = est_repeats;
    config.seed = resolve_seed(est_seed_opt, est_seed);
    config.confidence_level = est_conf;
    if (est_perm_opt->count() > 0) {
      config.mode = EstimatorMode::kPermutationSampling;
      config.permutations = est_perms;
    }
    const std::vector<Estimate> estimates =
        estimate_all(ugame, config, est_threads);
    Json params;
    params["game"] = est_game;
    params["noise"] = est_noise;
    params["confidence"] = est_conf;
    if (config.mode == EstimatorMode::kPermutationSampling) {
      params["permutations"] = config.permutations;
    } else {
      params["repeats"] = config.repeats;
    }
    emit(estimates_to_json(estimates), estimates_to_csv(estimates), est_out,
         est_format, make_manifest("estimate", params, config.seed));
    return 0;
  }

  if (*dist) {
    const DeterministicGame game = load_game(dist_game);
    const int n = game.player_count();
    if (dist_player < 0 || dist_player > n) {
      throw DomainError("dist: player " + std::to_string(dist_player) +
                        " outside [0, " + std::to_string(n) + "]");
    }
    std::vector<int> players;
    if (dist_player == 0) {
      for (int i = 1; i <= n; ++i) players.push_back(i);
    } else {
      players.push_back(dist_player);
    }
    std::string csv;
    Json params;
    params["game"] = dist_game;
    params["player"] = dist_player;
    if (dist_noise.empty()) {
      csv = "player,value,mass\n";
      for (int i : players) {
        append_distribution_rows(csv, marginal_distribution(game, i));
      }
    } else {
      params["noise"] = dist_noise;
      const UncertainGame ugame(game, load_noise(dist_noise));
      std::vector<double> grid;
      if (gmin_opt->count() > 0) {
        if (!(dist_gmax > dist_gmin)) {
          throw DomainError("dist: --grid-max must exceed --grid-min");
        }
        grid.resize(static_cast<std::size_t>(dist_gpoints));
        const double step =
            (dist_gmax - dist_gmin) / (dist_gpoints - 1);
        for (int g = 0; g < dist_gpoints; ++g) {
          grid[static_cast<std::size_t>(g)] = dist_gmin + step * g;
        }
        grid.back() = dist_gmax;
        params["grid_min"] = dist_gmin;
        params["grid_max"] = dist_gmax;
        params["grid_points"] = dist_gpoints;
      }
      bool wrote_header = false;
      for (int i : players) {
        const MixtureDensity d = mixture_density(
            ugame, i, std::span<const double>(grid.data(), grid.size()));
        if (!wrote_header) {
          csv = d.kind == MixtureDensity::Kind::kDiscrete
                    ? "player,value,mass\n"
                    : "player,value,density\n";
          wrote_header = true;
        }
        append_mixture_rows(csv, d);
      }
    }
    const RunManifest manifest = make_manifest("dist", params, 0);
    if (dist_out.empty()) {
      std::cout << csv;
    } else {
      write_text_file(dist_out, csv);
      write_text_file(dist_out + ".manifest.json",
                      manifest.to_json().dump(2) + "\n");
    }
    return 0;
  }

  if (*exp) {
    const std::uint64_t seed = resolve_seed(exp_seed_opt, exp_seed);
    if (exp_features > static_cast<std::size_t>(kMaxExactPlayers)) {
      throw CapacityError("experiment: " + std::to_string(exp_features) +
                          " features exceed the exact cap of " +
                          std::to_string(kMaxExactPlayers));
    }
    if (exp_features > 16) {
      std::cerr << "note: " << exp_features
                << " features means " << (std::size_t{1} << exp_features)
                << " coalitions; expect a long run\n";
    }
    const Dataset data = generate_regression(exp_samples, exp_features,
                                             exp_noise_level, seed);
    const LinearModel model = fit_linear_regression(data);
    const double r2_full = r2_score(model, data);
    const DeterministicGame game =
        zero_imputed_vf(model, data, {}, exp_threads);
    NoiseModel noise = NoiseModel::none();
    if (exp_vf_noise == "bernoulli") {
      noise = experiment_noise(ExperimentNoiseKind::kBernoulli);
    } else if (exp_vf_noise == "gaussian") {
      noise = experiment_noise(ExperimentNoiseKind::kGaussian);
    }
    const UncertainGame ugame(game, noise);
    const UncertainShapleyResult result =
        uncertain_shapley(ugame, exp_threads);

    fs::create_directories(exp_outdir);
    const fs::path outdir(exp_outdir);
    write_text_file(outdir / "values.csv", uncertain_result_to_csv(result));

    std::string dist_csv = "player,value,mass\n";
    for (int i = 1; i <= game.player_count(); ++i) {
      append_distribution_rows(dist_csv, marginal_distribution(game, i));
    }
    write_text_file(outdir / "distribution.csv", dist_csv);

    if (!noise.is_none()) {
      std::string noisy_csv;
      for (int i = 1; i <= game.player_count(); ++i) {
        const MixtureDensity d = mixture_density(ugame, i);
        if (i == 1) {
          noisy_csv = d.kind == MixtureDensity::Kind::kDiscrete
                          ? "player,value,mass\n"
                          : "player,value,density\n";
        }
        append_mixture_rows(noisy_csv, d);
      }
      write_text_file(outdir / "distribution_noisy.csv", noisy_csv);
    }

    if (exp_repeats > 0) {
      EstimatorConfig config;
      config.repeats = exp_repeats;
      config.seed = seed;
      write_text_file(outdir / "estimates.csv",
                      estimates_to_csv(estimate_all(ugame, config,
                                                    exp_threads)));
    }
    if (exp_save_data) save_dataset_csv(data, outdir / "dataset.csv");

    const std::vector<double>& table = game.table();
    const double v_empty = table.front();
    const double v_grand = table.back();
    KahanAccumulator sum_phi, sum_phi_tilde, gamma_grand;
    for (int i = 0; i < result.player_count(); ++i) {
      sum_phi.add(result.phi[static_cast<std::size_t>(i)]);
      sum_phi_tilde.add(result.phi_tilde[static_cast<std::size_t>(i)]);
      gamma_grand.add(result.gamma[static_cast<std::size_t>(i)]);
    }
    Json summary;
    summary["num_points"] = exp_samples;
    summary["num_features"] = exp_features;
    summary["noise_level"] = exp_noise_level;
    summary["vf_noise"] = exp_vf_noise;
    summary["seed"] = seed;
    summary["r2_full"] = r2_full;
    summary["v_empty"] = v_empty;
    summary["v_grand"] = v_grand;
    summary["sum_phi"] = sum_phi.value();
    summary["sum_phi_tilde"] = sum_phi_tilde.value();
    summary["gamma_grand"] = gamma_grand.value();
    summary["efficiency_gap"] =
        std::abs(sum_phi.value() - (v_grand - v_empty));
    summary["players"] = uncertain_result_to_json(result)["players"];
    write_text_file(outdir / "summary.json", summary.dump(2) + "\n");

    Json params;
    params["samples"] = exp_samples;
    params["features"] = exp_features;
    params["noise_level"] = exp_noise_level;
    params["vf_noise"] = exp_vf_noise;
    params["repeats"] = exp_repeats;
    params["outdir"] = exp_outdir;
    const RunManifest manifest = make_manifest("experiment", params, seed);
    write_text_file(outdir / "manifest.json",
                    manifest.to_json().dump(2) + "\n");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
