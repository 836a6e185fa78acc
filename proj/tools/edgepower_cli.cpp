#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "edgepower/config.hpp"
#include "edgepower/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
};

using Command = std::function<edgepower::CommandOutput(const edgepower::ExperimentConfig&)>;

void add_command(CLI::App& app, const std::string& name, const std::string& help, Options& options,
                 Command& chosen, Command command) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", options.config, "experiment config (JSON)")->required();
  sub->add_option("--seed", options.seed, "overrides the config seed");
  sub->add_option("--out", options.out, "output directory")->capture_default_str();
  sub->callback([&chosen, command] { chosen = command; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge-device power-state simulation and analysis"};
  app.require_subcommand(1);
  Options options;
  Command chosen;
  add_command(app, "steady", "stationary distribution and expected power", options, chosen,
              edgepower::cmd_steady);
  add_command(app, "converge", "Monte Carlo convergence study", options, chosen, edgepower::cmd_converge);
  add_command(app, "compare", "policy comparison against the reactive baseline", options, chosen,
              edgepower::cmd_compare);
  add_command(app, "sweep", "sensitivity sweep over one transition probability", options, chosen,
              edgepower::cmd_sweep);
  add_command(app, "fleet", "heterogeneous multi-node simulation", options, chosen, edgepower::cmd_fleet);
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = edgepower::load_config(options.config);
    if (options.seed) cfg.override_seed(*options.seed);
    const auto output = chosen(cfg);
    output.write_to(options.out);
    for (const auto& file : output.files) {
      if (file.name.ends_with(".txt")) std::cout << file.content;
    }
    std::cout << "wrote " << output.files.size() << " files to " << options.out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
