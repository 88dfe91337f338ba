#include <gtest/gtest.h>

#include "vagt/config.hpp"

using namespace vagt;
using nlohmann::json;

namespace {

ErrorKind kind_of(const json &j) {
  try {
    parse_run_config(j);
  } catch (const Error &e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Config, DefaultsPerModel) {
  const RunConfig c = parse_run_config({{"model", {{"name", "spin_chain"}}}});
  EXPECT_EQ(c.model_params.at("n"), 4);
  EXPECT_EQ(c.model_params.at("h"), 4.5);
  EXPECT_EQ(c.model_params.at("u0"), "eigenbasis");
  EXPECT_EQ(c.ansatz_name, "spinchain140");
  EXPECT_EQ(c.strategy.mode, StrategyMode::Analytic);
  EXPECT_EQ(c.strategy.cutoff, 1e-10);
  EXPECT_EQ(parse_run_config({{"model", {{"name", "random_2q"}}}}).ansatz_name, "universal2q15");
  EXPECT_EQ(parse_run_config({{"model", {{"name", "low_energy"}}}}).ansatz_name, "lowenergy36");
}

TEST(Config, RoundTrip) {
  const json j = {{"model", {{"name", "random_2q"}, {"seed", 3}}},
                  {"steps", 7},
                  {"lambda", 0.5},
                  {"strategy", {{"mode", "circuit-shots"}, {"shots", 40}, {"cutoff", 1e-3}}},
                  {"seed", 9},
                  {"residual", "full"},
                  {"outputs", {"heff", "correlations"}}};
  const RunConfig a = parse_run_config(j);
  const RunConfig b = parse_run_config(to_json(a));
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(b.strategy.shots, 40u);
  EXPECT_EQ(b.strategy.cutoff, 1e-3);
  EXPECT_EQ(b.steps, 7);
  EXPECT_TRUE(b.wants("heff"));
  EXPECT_FALSE(b.wants("fidelities"));
}

TEST(Config, Rejections) {
  EXPECT_EQ(kind_of({{"model", {{"name", "nope"}}}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "random_2q"}, {"sed", 1}}}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "random_2q"}}}, {"strategy", "circuit-shots"}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "random_2q"}}}, {"strategy", {{"cutoff", 0.0}}}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "random_2q"}}}, {"strategy", {{"cutoff", 1.0}}}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "spin_chain"}, {"u0", "fourier"}}}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "random_2q"}}}, {"outputs", {"movie"}}}), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of({{"model", {{"name", "custom"}, {"h0", "ZI"}}}}), ErrorKind::ConfigError);
}

TEST(Config, SpinChainIdentityU0) {
  const RunConfig eig = parse_run_config({{"model", {{"name", "spin_chain"}}}});
  EXPECT_TRUE(build_model(eig).u0_dense.has_value());
  const RunConfig id = parse_run_config({{"model", {{"name", "spin_chain"}, {"u0", "identity"}}}});
  const HamiltonianPair p = build_model(id);
  EXPECT_FALSE(p.u0_dense.has_value());
  EXPECT_EQ(p.sector_labels.size(), 16u);
}

TEST(Config, ProjectorDefaults) {
  const RunConfig c = parse_run_config({{"model", {{"name", "low_energy"}}}});
  const LowEnergyProjector p = build_projector(c, 3);
  EXPECT_EQ(p.effective(), (std::vector<int>{0, 1}));
  EXPECT_EQ(p.pinned_bits(), (std::vector<int>{0}));
}
