#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "edgepower/experiments.hpp"

using namespace edgepower;

namespace {

std::filesystem::path config_path(const std::string& name) { return std::filesystem::path(EDGEPOWER_CONFIG_DIR) / name; }

ExperimentConfig load(const std::string& name) { return load_config(config_path(name)); }

std::string config_error(const nlohmann::json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  const auto cfg = parse_config(nlohmann::json::object());
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.matrix.size(), 5);
  EXPECT_EQ(cfg.profile.name(), default_profile().name());
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(config_error({{"bogus", 1}}).find("bogus"), std::string::npos);
  EXPECT_NE(config_error({{"policies", {{{"name", "a"}, {"kind", "reactive"}}, {{"name", "b"}, {"kind", "magic"}}}}})
                .find("policies[1].kind"),
            std::string::npos);
  EXPECT_NE(config_error({{"workload", {{"kind", "poisson"}, {"lambda", -1}}}}).find("lambda"),
            std::string::npos);
  EXPECT_NE(config_error({{"simulation", {{"initial_state", "Hibernate"}}}}).find("simulation.initial_state"),
            std::string::npos);
}

TEST(Config, InvalidRowSumNamesTheRow) {
  try {
    load("invalid_row_sum.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("invalid_row_sum.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 0"), std::string::npos) << msg;
  }
}

TEST(Config, ReducibleChainIsRejectedBySteady) {
  const auto cfg = load("reducible.json");
  EXPECT_THROW(cmd_steady(cfg), NonUniqueStationary);
}

TEST(Config, MissingFile) { EXPECT_THROW(load("no_such_config.json"), ConfigError); }

TEST(Config, PolicyJsonRoundTrip) {
  const auto cfg = load("default.json");
  ASSERT_GE(cfg.policies.size(), 4u);
  for (const auto& p : cfg.policies) {
    const auto back = policy_from_json(policy_to_json(p));
    EXPECT_EQ(back.name, p.name);
    EXPECT_EQ(back.capacity, p.capacity);
    EXPECT_EQ(kind_name(back.kind), kind_name(p.kind));
    EXPECT_EQ(policy_to_json(back), policy_to_json(p));
  }
}

TEST(Config, SeedOverride) {
  auto cfg = load("default.json");
  cfg.override_seed(7);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.simulation.seed, 7u);
}

TEST(Config, TracePathResolvesAgainstConfigDirectory) {
  const auto cfg = load("trace_compare.json");
  const auto trace = make_trace(cfg);
  EXPECT_EQ(trace.size(), 20u);
}

TEST(Steady, OneStateChain) {
  const auto out = cmd_steady(load("one_state.json"));
  const auto* csv = out.find("steady.csv");
  ASSERT_NE(csv, nullptr);
  const auto rows = lines(*csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], "0,On,1,3.5,3.5");
  const auto report = steady_report(load("one_state.json"));
  EXPECT_DOUBLE_EQ(report.watts, 3.5);
}

TEST(Steady, ReferenceModel) {
  const auto report = steady_report(load("default.json"));
  EXPECT_NEAR(report.watts, 636.0 / 89.0, 1e-12);
  EXPECT_LT(report.residual, 1e-12);
}

TEST(Converge, CycleTvdIsZero) {
  const auto report = convergence_report(load("cycle.json"));
  for (const auto& c : report.checkpoints) EXPECT_DOUBLE_EQ(c.tvd, 0.0);
  const auto out = cmd_converge(load("cycle.json"));
  EXPECT_NE(out.find("convergence.csv"), nullptr);
  EXPECT_NE(out.find("convergence_ci.csv"), nullptr);
}

TEST(Sweep, UnperturbedValueReproducesSteady) {
  auto cfg = load("default.json");
  const auto base = steady_report(cfg);
  cfg.sweep = SweepSpec{3, 4, {0.15}};
  const auto points = run_sweep(cfg);
  ASSERT_EQ(points.size(), 1u);
  ASSERT_TRUE(points[0].pi.has_value());
  EXPECT_LE((*points[0].pi - base.pi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(points[0].watts, base.watts, 1e-12);
}

TEST(Sweep, InfeasiblePointsAreReported) {
  const auto cfg = load("sweep_infeasible.json");
  const auto points = run_sweep(cfg);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_TRUE(points[0].pi.has_value());
  EXPECT_FALSE(points[1].pi.has_value());
  EXPECT_FALSE(points[1].error.empty());
  const auto out = cmd_sweep(cfg);
  EXPECT_EQ(lines(*out.find("sweep.csv")).size(), 2u);
  EXPECT_NE(out.find("sweep_summary.txt")->find("infeasible"), std::string::npos);
}

TEST(Sweep, NeedsSweepSection) { EXPECT_THROW(run_sweep(load("cycle.json")), ConfigError); }

TEST(Compare, RelativeDelta) {
  EXPECT_DOUBLE_EQ(relative_delta_pct(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_delta_pct(100.0, 80.0), 20.0);
  EXPECT_DOUBLE_EQ(relative_delta_pct(100.0, 130.0), -30.0);
}

TEST(Compare, NeedsReactiveBaseline) {
  auto cfg = load("identity_compare.json");
  for (auto& p : cfg.policies) p.kind = FixedMatrixPolicy{};
  EXPECT_THROW(compare_policies(cfg), MissingBaseline);
  cfg.policies.resize(1);
  EXPECT_THROW(compare_policies(cfg), ConfigError);
}

TEST(Compare, IdenticalPoliciesHaveZeroDeltas) {
  const auto report = compare_policies(load("identity_compare.json"));
  ASSERT_EQ(report.results.size(), 2u);
  const auto& copy = report.results[1];
  EXPECT_DOUBLE_EQ(copy.energy_delta_pct, 0.0);
  EXPECT_DOUBLE_EQ(copy.overload_delta_pct, 0.0);
  EXPECT_DOUBLE_EQ(copy.late_service_delta_pct, 0.0);
  EXPECT_EQ(copy.energy_total, report.results[0].energy_total);
}

TEST(Compare, ZeroDemandReactiveSettlesOff) {
  const auto report = compare_policies(load("zero_demand.json"));
  EXPECT_EQ(report.trace_arrivals, 0u);
  const auto& reactive = report.results[report.baseline];
  // Active -> Idle -> Sleep -> Off, one step per patience window.
  EXPECT_LT(reactive.mean_power, 0.01);
  EXPECT_EQ(reactive.wake_up_delays, 0u);
  EXPECT_EQ(reactive.overload_entries, 0u);
  EXPECT_DOUBLE_EQ(reactive.late_service_fraction, 0.0);
  for (const auto& r : report.results) EXPECT_EQ(r.unserved_task_ticks, 0u);
}

TEST(Compare, OutputsIncludeSummary) {
  const auto out = cmd_compare(load("identity_compare.json"));
  const auto* csv = out.find("comparison.csv");
  ASSERT_NE(csv, nullptr);
  EXPECT_EQ(lines(*csv).size(), 3u);
  EXPECT_NE(out.find("comparison_summary.txt"), nullptr);
}

TEST(Fleet, SingleNodeMatchesCompare) {
  const auto cfg = load("fleet_single.json");
  const auto fleet = run_fleet(cfg);
  ASSERT_EQ(fleet.size(), 1u);
  const auto report = compare_policies(cfg);
  EXPECT_DOUBLE_EQ(fleet[0].per_node_energy(0), report.results[report.baseline].energy_total);
  EXPECT_EQ(fleet[0].unserved_task_ticks, report.results[report.baseline].unserved_task_ticks);
}

TEST(Fleet, NeedsFleetSection) { EXPECT_THROW(run_fleet(load("cycle.json")), ConfigError); }

TEST(Fleet, OutputFiles) {
  const auto out = cmd_fleet(load("fleet_single.json"));
  for (const char* name : {"fleet_nodes.csv", "fleet_occupancy.csv", "fleet_summary.csv", "fleet_summary.txt"})
    EXPECT_NE(out.find(name), nullptr) << name;
}

TEST(Reproducibility, CommandsAreByteIdentical) {
  const auto compare = load("trace_compare.json");
  const auto fleet = load("fleet_single.json");
  const auto sweep = load("sweep_p23.json");
  const auto cycle = load("cycle.json");
  const auto pairs = {std::pair{cmd_compare(compare), cmd_compare(compare)},
                      std::pair{cmd_fleet(fleet), cmd_fleet(fleet)}, std::pair{cmd_sweep(sweep), cmd_sweep(sweep)},
                      std::pair{cmd_converge(cycle), cmd_converge(cycle)}};
  for (const auto& [a, b] : pairs) {
    ASSERT_EQ(a.files.size(), b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
      EXPECT_EQ(a.files[i].name, b.files[i].name);
      EXPECT_EQ(a.files[i].content, b.files[i].content) << a.files[i].name;
    }
  }
}

TEST(Reproducibility, WriteToCreatesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "edgepower_write_to_test";
  std::filesystem::remove_all(dir);
  const auto out = cmd_steady(load("one_state.json"));
  out.write_to(dir);
  for (const auto& f : out.files) EXPECT_TRUE(std::filesystem::exists(dir / f.name)) << f.name;
  std::filesystem::remove_all(dir);
}
