#include "edgepower/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "edgepower/csv.hpp"

namespace edgepower {

namespace {

std::string state_label(const DeviceProfile& profile, Index i) {
  return profile.labels().at(static_cast<std::size_t>(i));
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + csv::number(v(i));
  return out + "]";
}

void write_header(std::ostringstream& s, std::string_view command, const ExperimentConfig& cfg) {
  s << "command: " << command << "\n";
  s << "seed: " << cfg.seed << "\n";
  s << "generator: " << Rng::kAlgorithm << "\n";
  s << "profile: " << cfg.profile.name() << " " << vector_text(cfg.profile.state_power()) << " W\n";
  s << "tick_seconds: " << csv::number(kTickSeconds) << "\n";
}

std::string workload_text(const WorkloadTrace& trace) {
  std::uint64_t total = 0;
  for (auto d : trace.demands) total += d;
  return trace.source + ", " + std::to_string(trace.size()) + " ticks, " + std::to_string(total) + " tasks";
}

std::string interval_text(const Interval& i) {
  return "[" + csv::number(i.lower) + ", " + csv::number(i.upper) + "]";
}

}  // namespace

const std::string* CommandOutput::find(std::string_view name) const {
  for (const auto& f : files)
    if (f.name == name) return &f.content;
  return nullptr;
}

void CommandOutput::write_to(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / f.name).string());
    out << f.content;
    if (!out) throw Error("failed writing " + (dir / f.name).string());
  }
}

WorkloadTrace make_trace(const ExperimentConfig& cfg) {
  const std::uint64_t ticks = cfg.workload.ticks ? cfg.workload.ticks : cfg.simulation.steps;
  switch (cfg.workload.kind) {
    case WorkloadSource::Kind::Poisson:
      return generate_poisson(cfg.workload.lambda, ticks, cfg.workload.seed.value_or(cfg.seed));
    case WorkloadSource::Kind::File:
      return load_trace_file(cfg.workload.path.string());
    case WorkloadSource::Kind::Zero:
      return WorkloadTrace{std::vector<std::uint64_t>(ticks, 0), "zero"};
  }
  return {};
}

// -----------------------------------------------------------------------------
// steady
// -----------------------------------------------------------------------------

SteadyReport steady_report(const ExperimentConfig& cfg) {
  const auto pi = steady_state(cfg.matrix);
  return {pi.probs(), expected_power(pi, cfg.profile), stationary_residual(pi, cfg.matrix)};
}

CommandOutput cmd_steady(const ExperimentConfig& cfg) {
  const auto report = steady_report(cfg);
  csv::Writer states({"state", "label", "probability", "state_power_watts", "contribution_watts"});
  for (Index i = 0; i < report.pi.size(); ++i) {
    const double power = cfg.profile.state_power()(i);
    states.cell(static_cast<std::uint64_t>(i)).cell(state_label(cfg.profile, i)).cell(report.pi(i));
    states.cell(power).cell(report.pi(i) * power).end_row();
  }
  csv::Writer totals({"expected_power_watts", "residual_inf"});
  totals.cell(report.watts).cell(report.residual).end_row();

  std::ostringstream s;
  write_header(s, "steady", cfg);
  s << "pi: " << vector_text(report.pi) << "\n";
  s << "expected_power_watts: " << csv::number(report.watts) << "\n";
  s << "residual_inf: " << csv::number(report.residual) << "\n";
  return {{{"steady.csv", states.str()}, {"steady_totals.csv", totals.str()}, {"steady_summary.txt", s.str()}}};
}

// -----------------------------------------------------------------------------
// converge
// -----------------------------------------------------------------------------

ConvergenceReport convergence_report(const ExperimentConfig& cfg) {
  return convergence_study(cfg.matrix, cfg.profile, cfg.seed, cfg.convergence.checkpoints,
                           cfg.convergence.replicas, cfg.simulation.initial_state);
}

CommandOutput cmd_converge(const ExperimentConfig& cfg) {
  const auto report = convergence_report(cfg);
  csv::Writer checkpoints({"steps", "tvd", "mean_tvd"});
  for (const auto& c : report.checkpoints) checkpoints.cell(c.steps).cell(c.tvd).cell(c.mean_tvd).end_row();

  csv::Writer ci({"state", "label", "analytical", "estimate", "sigma", "ci_method", "lower", "upper",
                  "contains_analytical"});
  for (const auto& si : report.intervals) {
    for (auto method : {CiMethod::SqrtSigma, CiMethod::Wald}) {
      const Interval& iv = method == CiMethod::Wald ? si.wald : si.sqrt_sigma;
      ci.cell(static_cast<std::uint64_t>(si.state)).cell(state_label(cfg.profile, si.state));
      ci.cell(si.analytical).cell(si.estimate).cell(si.sigma).cell(to_string(method));
      ci.cell(iv.lower).cell(iv.upper).cell(iv.contains(si.analytical) ? "true" : "false").end_row();
    }
  }

  std::ostringstream s;
  write_header(s, "converge", cfg);
  s << "replicas: " << report.replicas << "\n";
  s << "analytical: " << vector_text(report.analytical) << "\n";
  for (const auto& c : report.checkpoints)
    s << "steps " << c.steps << ": tvd " << csv::number(c.tvd) << ", mean tvd " << csv::number(c.mean_tvd)
      << "\n";
  s << "final_tvd: " << csv::number(report.final_tvd) << "\n";
  for (const auto& si : report.intervals)
    s << state_label(cfg.profile, si.state) << ": estimate " << csv::number(si.estimate) << ", sqrt-sigma "
      << interval_text(si.sqrt_sigma) << ", wald " << interval_text(si.wald) << "\n";
  return {{{"convergence.csv", checkpoints.str()},
           {"convergence_ci.csv", ci.str()},
           {"convergence_summary.txt", s.str()}}};
}

// -----------------------------------------------------------------------------
// compare
// -----------------------------------------------------------------------------

double relative_delta_pct(double reactive, double candidate) {
  if (reactive == 0.0 && candidate == 0.0) return 0.0;
  return (reactive - candidate) / reactive * 100.0;
}

ComparisonReport compare_policies(const ExperimentConfig& cfg) {
  if (cfg.policies.size() < 2) throw ConfigError("policies: compare needs at least two policies");
  const auto baseline = std::find_if(cfg.policies.begin(), cfg.policies.end(), [](const PolicySpec& p) {
    return std::holds_alternative<ReactivePolicy>(p.kind);
  });
  if (baseline == cfg.policies.end())
    throw MissingBaseline("policies: compare needs a reactive policy as the baseline");

  const WorkloadTrace trace = make_trace(cfg);
  ComparisonReport report;
  report.baseline = static_cast<std::size_t>(baseline - cfg.policies.begin());
  report.trace_ticks = trace.size();
  for (auto d : trace.demands) report.trace_arrivals += d;

  const Index overloaded = cfg.profile.find_state(label(PowerState::Overloaded)).value_or(-1);
  for (const auto& spec : cfg.policies) {
    PolicyResult r;
    r.policy = spec;
    PolicySpec run_spec = spec;
    if (auto* q = std::get_if<QLearningPolicy>(&run_spec.kind)) {
      r.trained_table = train_q_policy(spec, cfg.profile, cfg.simulation.seed);
      q->table = std::make_shared<const QTable>(*r.trained_table);
    }
    const SimulationRun run = run_policy(run_spec, cfg.matrix, cfg.profile, trace, cfg.simulation);
    r.energy_total = run.energy_joules;
    r.mean_power = run.mean_power();
    r.overload_fraction = run.time_share(overloaded);
    r.late_service_fraction = run.late_service_fraction();
    r.wake_up_delays = run.count_events(EventKind::WakeUpDelay);
    r.overload_entries = run.count_events(EventKind::OverloadEntry);
    r.unserved_task_ticks = run.unserved_task_ticks;
    r.served = run.served;
    report.results.push_back(std::move(r));
  }
  const PolicyResult& base = report.results[report.baseline];
  for (auto& r : report.results) {
    r.energy_delta_pct = relative_delta_pct(base.energy_total, r.energy_total);
    r.overload_delta_pct = relative_delta_pct(base.overload_fraction, r.overload_fraction);
    r.late_service_delta_pct = relative_delta_pct(base.late_service_fraction, r.late_service_fraction);
  }
  return report;
}

CommandOutput cmd_compare(const ExperimentConfig& cfg) {
  const auto report = compare_policies(cfg);
  csv::Writer table({"policy", "kind", "energy_total_joules", "mean_power_watts", "overload_fraction",
                     "late_service_fraction", "wake_up_delays", "overload_entries", "unserved_task_ticks",
                     "served", "energy_delta_pct", "target_energy_delta_pct", "overload_delta_pct",
                     "target_overload_delta_pct", "late_service_delta_pct"});
  for (const auto& r : report.results) {
    table.cell(r.policy.name).cell(kind_name(r.policy.kind)).cell(r.energy_total).cell(r.mean_power);
    table.cell(r.overload_fraction).cell(r.late_service_fraction).cell(r.wake_up_delays).cell(r.overload_entries);
    table.cell(r.unserved_task_ticks).cell(r.served).cell(r.energy_delta_pct).cell(kTargetEnergyDeltaPct);
    table.cell(r.overload_delta_pct).cell(kTargetOverloadDeltaPct).cell(r.late_service_delta_pct).end_row();
  }

  CommandOutput out;
  out.files.push_back({"comparison.csv", table.str()});
  std::ostringstream s;
  write_header(s, "compare", cfg);
  s << "workload: " << workload_text(make_trace(cfg)) << "\n";
  s << "steps: " << cfg.simulation.steps << ", burn_in: " << cfg.simulation.burn_in << "\n";
  s << "baseline: " << report.results[report.baseline].policy.name << "\n";
  s << "deltas are (reactive - candidate) / reactive; reference targets are energy -"
    << csv::number(kTargetEnergyDeltaPct) << "% and overload -" << csv::number(kTargetOverloadDeltaPct)
    << "%\n";
  for (const auto& r : report.results) {
    s << "policy " << r.policy.name << " " << policy_to_json(r.policy).dump() << "\n";
    s << "  energy " << csv::number(r.energy_total) << " J (" << csv::number(r.energy_delta_pct)
      << "% vs baseline), overload share " << csv::number(r.overload_fraction) << " ("
      << csv::number(r.overload_delta_pct) << "%), late service " << csv::number(r.late_service_fraction)
      << "\n";
    if (r.trained_table) {
      std::ostringstream q;
      write_qtable_csv(q, *r.trained_table);
      out.files.push_back({"qtable_" + r.policy.name + ".csv", q.str()});
    }
  }
  out.files.push_back({"comparison_summary.txt", s.str()});
  return out;
}

// -----------------------------------------------------------------------------
// sweep
// -----------------------------------------------------------------------------

std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("sweep: section missing");
  std::vector<SweepPoint> points;
  for (double value : cfg.sweep->values) {
    SweepPoint p;
    p.value = value;
    try {
      const auto m = perturb_row(cfg.matrix, cfg.sweep->row, cfg.sweep->column, value);
      const auto pi = steady_state(m);
      p.pi = pi.probs();
      p.watts = expected_power(pi, cfg.profile);
      p.residual = stationary_residual(pi, m);
    } catch (const Error& e) {
      p.error = e.what();
    }
    points.push_back(std::move(p));
  }
  return points;
}

CommandOutput cmd_sweep(const ExperimentConfig& cfg) {
  const auto points = run_sweep(cfg);
  const Index n = cfg.matrix.size();
  std::vector<std::string> header{"value"};
  for (Index i = 0; i < n; ++i) header.push_back("pi" + std::to_string(i));
  header.push_back("watts");
  csv::Writer rows(header);
  for (const auto& p : points) {
    if (!p.pi) continue;
    rows.cell(p.value);
    for (Index i = 0; i < n; ++i) rows.cell((*p.pi)(i));
    rows.cell(p.watts).end_row();
  }

  std::ostringstream s;
  write_header(s, "sweep", cfg);
  s << "entry: row " << cfg.sweep->row << " (" << state_label(cfg.profile, cfg.sweep->row) << "), column "
    << cfg.sweep->column << " (" << state_label(cfg.profile, cfg.sweep->column) << ")\n";
  for (const auto& p : points) {
    s << "value " << csv::number(p.value) << ": ";
    if (p.pi)
      s << "pi " << vector_text(*p.pi) << ", watts " << csv::number(p.watts) << ", residual "
        << csv::number(p.residual) << "\n";
    else
      s << "infeasible: " << p.error << "\n";
  }
  return {{{"sweep.csv", rows.str()}, {"sweep_summary.txt", s.str()}}};
}

// -----------------------------------------------------------------------------
// fleet
// -----------------------------------------------------------------------------

std::vector<FleetReport> run_fleet(const ExperimentConfig& cfg) {
  if (!cfg.fleet) throw ConfigError("fleet: section missing");
  const WorkloadTrace trace = make_trace(cfg);
  std::vector<FleetReport> reports;
  for (auto strategy : cfg.fleet->strategies)
    reports.push_back(simulate_fleet(cfg.fleet->nodes, trace, cfg.fleet->coupling, strategy, cfg.simulation));
  return reports;
}

CommandOutput cmd_fleet(const ExperimentConfig& cfg) {
  const auto reports = run_fleet(cfg);
  const auto& nodes = cfg.fleet->nodes;
  std::vector<double> expected;
  for (const auto& node : nodes) {
    try {
      expected.push_back(expected_power(steady_state(node.matrix), node.profile));
    } catch (const NonUniqueStationary&) {
      expected.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }

  csv::Writer per_node({"strategy", "node", "policy", "capacity", "energy_joules", "mean_power_watts",
                        "matrix_expected_power_watts", "unserved_task_ticks", "wake_up_delays"});
  csv::Writer occupancy({"strategy", "node", "state", "label", "occupancy", "state_energy_joules"});
  csv::Writer summary({"strategy", "total_energy_joules", "disparity_cv", "unserved_total",
                       "unserved_task_ticks", "ticks"});
  std::ostringstream s;
  write_header(s, "fleet", cfg);
  s << "workload: " << workload_text(make_trace(cfg)) << "\n";
  s << "coupling: " << (cfg.fleet->coupling.kind == CouplingKind::None ? "none" : "load_share")
    << ", sensitivity " << csv::number(cfg.fleet->coupling.sensitivity) << "\n";
  for (const auto& node : nodes)
    s << "node " << node.name << ": capacity " << node.capacity << ", power "
      << vector_text(node.profile.state_power()) << " W, policy " << policy_to_json(node.policy).dump() << "\n";

  for (const auto& r : reports) {
    const auto strategy = to_string(r.strategy);
    for (std::size_t m = 0; m < nodes.size(); ++m) {
      const auto& run = r.node_runs[m];
      per_node.cell(strategy).cell(nodes[m].name).cell(nodes[m].policy.name).cell(nodes[m].capacity);
      per_node.cell(r.per_node_energy(static_cast<Index>(m))).cell(r.per_node_mean_power(static_cast<Index>(m)));
      per_node.cell(expected[m]).cell(run.unserved_task_ticks).cell(run.count_events(EventKind::WakeUpDelay));
      per_node.end_row();
      for (Index i = 0; i < nodes[m].profile.size(); ++i) {
        const double share = r.per_node_occupancy[m](i);
        occupancy.cell(strategy).cell(nodes[m].name).cell(static_cast<std::uint64_t>(i));
        occupancy.cell(state_label(nodes[m].profile, i)).cell(share);
        occupancy.cell(static_cast<double>(run.counts[static_cast<std::size_t>(i)]) *
                       nodes[m].profile.state_power()(i) * kTickSeconds);
        occupancy.end_row();
      }
    }
    summary.cell(strategy).cell(r.total_energy()).cell(r.disparity_cv).cell(r.unserved_total);
    summary.cell(r.unserved_task_ticks).cell(r.ticks).end_row();
    s << strategy << ": total energy " << csv::number(r.total_energy()) << " J, per node "
      << vector_text(r.per_node_energy) << ", disparity cv " << csv::number(r.disparity_cv) << ", unserved "
      << r.unserved_total << "\n";
  }
  return {{{"fleet_nodes.csv", per_node.str()},
           {"fleet_occupancy.csv", occupancy.str()},
           {"fleet_summary.csv", summary.str()},
           {"fleet_summary.txt", s.str()}}};
}

}  // namespace edgepower
