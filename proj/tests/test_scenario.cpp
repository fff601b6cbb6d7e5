#include "lqts/linalg.hpp"
#include "lqts/riccati.hpp"
#include "lqts/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace lqts {
namespace {

TEST(Scenario, RegistryOrder) {
  EXPECT_EQ(builtin_scenario_names(), (std::vector<std::string>{"x29a", "b747", "glucose"}));
  EXPECT_THROW(builtin_scenario("f16"), ConfigError);
}

TEST(Scenario, X29aMatrices) {
  const Scenario sc = builtin_scenario("x29a");
  ASSERT_EQ(sc.p(), 4);
  ASSERT_EQ(sc.q(), 2);
  EXPECT_EQ(sc.truth.A(0, 0), -0.16);
  EXPECT_EQ(sc.truth.A(1, 0), -15.2);
  EXPECT_EQ(sc.truth.A(2, 0), 6.84);
  EXPECT_EQ(sc.truth.A(3, 2), 0.07);
  EXPECT_EQ(sc.truth.B(0, 0), -0.0006);
  EXPECT_EQ(sc.truth.B(1, 0), 1.343);
  EXPECT_EQ(sc.truth.B(2, 1), -0.071);
  EXPECT_EQ(sc.truth.B.row(3), Matrix::Zero(1, 2));
}

TEST(Scenario, B747Matrices) {
  const Scenario sc = builtin_scenario("b747");
  EXPECT_EQ(sc.truth.A(0, 2), -0.980);
  EXPECT_EQ(sc.truth.A(1, 0), -3.868);
  EXPECT_EQ(sc.truth.A(3, 1), 0.958);
  EXPECT_EQ(sc.truth.B(2, 1), -0.908);
  EXPECT_EQ(sc.truth.B(3, 0), 0.015);
  // Open-loop stable, unlike the other two.
  EXPECT_TRUE(is_hurwitz(sc.truth.A));
}

TEST(Scenario, GlucoseMatrices) {
  const Scenario sc = builtin_scenario("glucose");
  ASSERT_EQ(sc.p(), 3);
  ASSERT_EQ(sc.q(), 1);
  EXPECT_EQ(sc.truth.A.row(0), (Matrix{{1.91, -2.82, 0.91}}));
  EXPECT_EQ(sc.truth.A.row(1), (Matrix{{1, -1, 0}}));
  EXPECT_EQ(sc.truth.A.row(2), (Matrix{{0, 1, -1}}));
  EXPECT_EQ(sc.truth.B, (Matrix{{-0.0992}, {0}, {0}}));
}

TEST(Scenario, SharedWeightsAndDefaults) {
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    const Index p = sc.p();
    EXPECT_EQ(sc.noise.C, 0.25 * Matrix::Identity(p, p)) << name;
    EXPECT_EQ(sc.cost.Qx, Matrix::Identity(p, p)) << name;
    EXPECT_EQ(sc.cost.Qu, 0.1 * Matrix::Identity(sc.q(), sc.q())) << name;
    EXPECT_EQ(sc.dt, 1e-3);
    EXPECT_EQ(sc.tau0, 20.0);
    EXPECT_EQ(sc.growth, 0.1);
    EXPECT_EQ(sc.dither.sigma, 5.0);
    EXPECT_EQ(sc.dither.rule, KappaRule::kPow1_5);
    EXPECT_NO_THROW(sc.validate()) << name;
    EXPECT_TRUE(is_hurwitz(sc.truth.A + sc.truth.B * sc.initial_gain)) << name;
  }
}

TEST(Scenario, StoredGainsAreReproducible) {
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    Rng rng = make_rng(2024, 7);
    EXPECT_EQ(find_random_stabilizer(sc.truth, rng, 1.0), sc.initial_gain) << name;
  }
}

TEST(Scenario, CareMargins) {
  const double expected[] = {0.249, 1.013, 0.506};
  int i = 0;
  for (const auto& name : builtin_scenario_names()) {
    const RiccatiSolution sol = solve_care(builtin_scenario(name).truth, builtin_scenario(name).cost);
    EXPECT_NEAR(sol.margin, expected[i++], 1e-3) << name;
  }
}

TEST(KappaRule, NamesRoundTrip) {
  for (KappaRule r : {KappaRule::kPow1_5, KappaRule::kPow2, KappaRule::kFixed}) {
    EXPECT_EQ(parse_kappa_rule(kappa_rule_name(r)), r);
  }
  EXPECT_EQ(parse_kappa_rule("pow1.5"), KappaRule::kPow1_5);
  EXPECT_THROW(parse_kappa_rule("cubic"), ConfigError);
}

TEST(ScenarioJson, RoundTripIsExact) {
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    const Scenario back = scenario_from_json(scenario_to_json(sc));
    EXPECT_EQ(back.name, sc.name);
    EXPECT_EQ(back.truth.A, sc.truth.A);
    EXPECT_EQ(back.truth.B, sc.truth.B);
    EXPECT_EQ(back.cost.Qx, sc.cost.Qx);
    EXPECT_EQ(back.cost.Qu, sc.cost.Qu);
    EXPECT_EQ(back.noise.C, sc.noise.C);
    EXPECT_EQ(back.dt, sc.dt);
    EXPECT_EQ(back.tau0, sc.tau0);
    EXPECT_EQ(back.growth, sc.growth);
    EXPECT_EQ(back.dither.sigma, sc.dither.sigma);
    EXPECT_EQ(back.dither.rule, sc.dither.rule);
    EXPECT_EQ(back.initial_gain, sc.initial_gain);
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(sc));
  }
}

TEST(ScenarioJson, SchemaViolations) {
  EXPECT_THROW(scenario_from_json("not json"), ConfigError);
  EXPECT_THROW(scenario_from_json("{}"), ConfigError);
  const std::string good = scenario_to_json(builtin_scenario("glucose"));
  std::string ragged = good;
  const auto pos = ragged.find("1.91");
  ASSERT_NE(pos, std::string::npos);
  ragged.replace(pos, 4, "\"x\"");
  EXPECT_THROW(scenario_from_json(ragged), ConfigError);
}

TEST(ScenarioJson, NonStabilizingGainRejected) {
  Scenario sc = builtin_scenario("x29a");
  sc.initial_gain.setZero();  // open loop is unstable
  EXPECT_THROW(scenario_from_json(scenario_to_json(sc)), ConfigError);
}

TEST(ScenarioJson, NonStabilizablePairRejected) {
  Scenario sc = builtin_scenario("glucose");
  sc.truth.A = Matrix{{-1.0, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, -1.0}};
  sc.truth.B = Matrix{{1.0}, {0.0}, {0.0}};
  sc.initial_gain = Matrix::Zero(1, 3);
  EXPECT_THROW(sc.validate(), ConfigError);
}

TEST(ScenarioJson, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "lqts_scenario_test.json";
  Scenario sc = builtin_scenario("b747");
  sc.name = "custom";
  sc.growth = 0.2;
  save_scenario(sc, path.string());
  const Scenario back = load_scenario(path.string());
  EXPECT_EQ(back.name, "custom");
  EXPECT_EQ(back.growth, 0.2);
  EXPECT_EQ(back.truth.A, sc.truth.A);
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario(path.string()), ConfigError);
}

}  // namespace
}  // namespace lqts
