#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "shapuq/errors.hpp"
#include "shapuq/serialize.hpp"
#include "shapuq/version.hpp"

using namespace shapuq;

TEST_SUITE_BEGIN("serialize");

TEST_CASE("real formatting survives a round trip") {
  RngStream stream(6021, 0, 0, 1);
  for (int r = 0; r < 2000; ++r) {
    const double x = std::ldexp(2.0 * stream.next_uniform() - 1.0,
                                static_cast<int>(stream.next_below(80)) - 40);
    CHECK(std::stod(format_real(x)) == x);
  }
  CHECK(format_real(0.0) == "0");
  CHECK(std::stod(format_real(0.1)) == 0.1);
}

TEST_CASE("game json round trip with bitmask keys") {
  auto j = Json::parse(R"({"n": 2, "values": {"0": 0, "1": 1, "2": 2, "3": 4}})");
  auto g = game_from_json(j);
  CHECK(g.player_count() == 2);
  CHECK(g.evaluate(Coalition(0b11, 2)) == 4.0);

  auto out = game_to_json(g);
  auto g2 = game_from_json(out);
  CHECK(g2.table() == g.table());
}

TEST_CASE("game json accepts player-list keys") {
  auto j = Json::parse(R"({
    "n": 2,
    "values": {"[]": 0, "[1]": 1, "[2]": 2, "[1,2]": 4}
  })");
  auto g = game_from_json(j);
  CHECK(g.evaluate(Coalition::empty(2)) == 0.0);
  CHECK(g.evaluate(Coalition(0b01, 2)) == 1.0);
  CHECK(g.evaluate(Coalition(0b10, 2)) == 2.0);
  CHECK(g.evaluate(Coalition::grand(2)) == 4.0);

  // Mixed key styles address the same table.
  auto mixed = Json::parse(R"({
    "n": 2,
    "values": {"0": 5, "[1]": 6, "2": 7, "[1,2]": 8}
  })");
  auto gm = game_from_json(mixed);
  CHECK(gm.table() == std::vector<double>{5.0, 6.0, 7.0, 8.0});
}

TEST_CASE("game json validation") {
  CHECK_THROWS_AS(game_from_json(Json::parse("[]")), MalformedGameError);
  CHECK_THROWS_AS(game_from_json(Json::parse(R"({"values": {}})")),
                  MalformedGameError);
  CHECK_THROWS_AS(game_from_json(Json::parse(R"({"n": 0, "values": {}})")),
                  MalformedGameError);
  CHECK_THROWS_AS(
      game_from_json(Json::parse(R"({"n": 25, "values": {}})")),
      CapacityError);
  // Missing coalition 3.
  CHECK_THROWS_AS(game_from_json(Json::parse(
                      R"({"n": 2, "values": {"0": 0, "1": 1, "2": 2}})")),
                  MalformedGameError);
  // Duplicate coalition via the two key styles.
  CHECK_THROWS_AS(
      game_from_json(Json::parse(
          R"({"n": 2, "values": {"0": 0, "1": 1, "[1]": 9, "2": 2, "3": 3}})")),
      MalformedGameError);
  // Out-of-range mask and malformed keys.
  CHECK_THROWS_AS(
      game_from_json(Json::parse(
          R"({"n": 1, "values": {"0": 0, "1": 1, "4": 2}})")),
      MalformedGameError);
  CHECK_THROWS_AS(game_from_json(Json::parse(
                      R"({"n": 1, "values": {"0": 0, "x": 1}})")),
                  MalformedGameError);
  // Non-numeric value.
  CHECK_THROWS_AS(game_from_json(Json::parse(
                      R"({"n": 1, "values": {"0": 0, "1": "one"}})")),
                  MalformedGameError);
}

TEST_CASE("game file round trip") {
  RngStream stream(6021, 0, 0, 2);
  auto g = oracle::random_game(4, stream);
  const auto path =
      std::filesystem::temp_directory_path() / "shapuq_test_game.json";
  save_game(g, path);
  auto loaded = load_game(path);
  CHECK(loaded.player_count() == 4);
  CHECK(loaded.table() == g.table());  // %.17g keys keep doubles bitwise
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_game("/nonexistent/game.json"), MalformedGameError);
}

TEST_CASE("noise json round trips") {
  SUBCASE("none") {
    auto n = noise_from_json(Json::parse(R"({"type": "none"})"));
    CHECK(n.is_none());
    CHECK(noise_to_json(n)["type"] == "none");
  }
  SUBCASE("gaussian") {
    auto n = noise_from_json(Json::parse(R"({"type": "gaussian", "sigma": 0.01})"));
    auto j = noise_to_json(n);
    CHECK(j["type"] == "gaussian");
    CHECK(j["sigma"].get<double>() == 0.01);
  }
  SUBCASE("bernoulli") {
    auto n = noise_from_json(
        Json::parse(R"({"type": "bernoulli", "p": 0.33, "c": 0.05})"));
    auto j = noise_to_json(n);
    CHECK(j["p"].get<double>() == 0.33);
    CHECK(j["c"].get<double>() == 0.05);
    // The long alias is accepted too.
    auto n2 = noise_from_json(
        Json::parse(R"({"type": "bernoulli_offset", "p": 0.33, "c": 0.05})"));
    CHECK(noise_to_json(n2)["c"].get<double>() == 0.05);
  }
  SUBCASE("table with and without second moments") {
    auto with = noise_from_json(Json::parse(R"({
      "type": "table",
      "means": {"0": 0.1, "1": 0.2},
      "second_moments": {"0": 0.05, "1": 0.08}
    })"));
    CHECK(with.has_analytic_moments(2));
    auto j = noise_to_json(with);
    auto again = noise_from_json(j);
    CHECK(noise_to_json(again) == j);

    // No second moments: deterministic offset, nu(S) == mean(S) surely.
    auto bias = noise_from_json(Json::parse(R"({
      "type": "table", "means": {"0": 0.1, "1": 0.2}
    })"));
    auto g = DeterministicGame::from_table(1, {0.0, 1.0});
    UncertainGame ug(g, bias);
    RngStream stream(3);
    CHECK(ug.sample(Coalition::empty(1), stream) == doctest::Approx(0.1));
    CHECK(ug.sample(Coalition::empty(1), stream) == doctest::Approx(0.1));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(noise_from_json(Json::parse(R"({"type": "exotic"})")),
                    MalformedGameError);
    CHECK_THROWS_AS(noise_from_json(Json::parse(R"({"type": "gaussian"})")),
                    MalformedGameError);
    CHECK_THROWS_AS(noise_from_json(Json::parse("42")), MalformedGameError);
    CHECK_THROWS_AS(
        noise_from_json(Json::parse(R"({"type": "bernoulli", "p": 2, "c": 1})")),
        DomainError);
  }
}

TEST_CASE("result serialization shapes") {
  ShapleyResult res{{1.5, 2.5}, {0.25, 0.25}};
  auto j = shapley_result_to_json(res);
  CHECK(j["n"] == 2);
  CHECK(j["players"][0]["phi"].get<double>() == 1.5);
  CHECK(j["players"][1]["player"] == 2);

  auto csv = shapley_result_to_csv(res);
  CHECK(csv == "player,phi,sigma2\n1,1.5,0.25\n2,2.5,0.25\n");

  UncertainShapleyResult ur;
  ur.phi = {1.5};
  ur.gamma = {0.25};
  ur.phi_tilde = {1.75};
  ur.sigma2_intrinsic = {0.25};
  ur.sigma2_gamma = {0.03125};
  ur.xi = {0.0};
  ur.sigma2_total = {0.28125};
  auto uj = uncertain_result_to_json(ur);
  CHECK(uj["players"][0]["phi_tilde"].get<double>() == 1.75);
  auto ucsv = uncertain_result_to_csv(ur);
  CHECK(ucsv ==
        "player,phi,sigma2,gamma,phi_tilde,sigma2_gamma,xi,sigma2_total\n"
        "1,1.5,0.25,0.25,1.75,0.03125,0,0.28125\n");

  Estimate e{1.5, 0.25, 1.0, 2.0, 800};
  auto ej = estimates_to_json({e});
  CHECK(ej["players"][0]["evaluations"] == 800);
  auto ecsv = estimates_to_csv({e});
  CHECK(ecsv ==
        "player,mean,std_error,ci_low,ci_high,evaluations\n"
        "1,1.5,0.25,1,2,800\n");
}

TEST_CASE("distribution csv rows") {
  MarginalDistribution dist;
  dist.player = 1;
  dist.atoms = {{1.0, 0.5}, {2.0, 0.5}};
  std::string csv = "player,value,mass\n";
  append_distribution_rows(csv, dist);
  CHECK(csv == "player,value,mass\n1,1,0.5\n1,2,0.5\n");

  MixtureDensity mix;
  mix.player = 2;
  mix.kind = MixtureDensity::Kind::kDiscrete;
  mix.atoms = {{0.75, 0.25}, {1.0, 0.5}};
  std::string mcsv;
  append_mixture_rows(mcsv, mix);
  CHECK(mcsv == "2,0.75,0.25\n2,1,0.5\n");
  // Non-dyadic reals print with all 17 significant digits and parse back
  // to the identical double.
  MixtureDensity odd;
  odd.player = 1;
  odd.atoms = {{0.95, 1.0}};
  std::string ocsv;
  append_mixture_rows(ocsv, odd);
  CHECK(std::stod(ocsv.substr(2, ocsv.find(',', 2) - 2)) == 0.95);
}

TEST_CASE("manifest carries command, seed and version") {
  auto manifest = make_manifest("solve", Json{{"game", "g.json"}}, 42);
  auto j = manifest.to_json();
  CHECK(j["command"] == "solve");
  CHECK(j["seed"] == 42);
  CHECK(j["version"].get<std::string>() ==
        std::string(kVersionString));
  // ISO-8601 UTC timestamp: YYYY-MM-DDTHH:MM:SSZ.
  const auto ts = j["timestamp"].get<std::string>();
  CHECK(ts.size() == 20);
  CHECK(ts[4] == '-');
  CHECK(ts[10] == 'T');
  CHECK(ts.back() == 'Z');
  CHECK(j["parameters"]["game"] == "g.json");
}

TEST_SUITE_END();
