#include "commands.hpp"
#include "config.hpp"

#include "lgtsim/circuit.hpp"
#include "lgtsim/ode.hpp"
#include "lgtsim/parallel.hpp"
#include "lgtsim/readout.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

using namespace lgtsim::cli;

int main(int argc, char** argv) {
  CLI::App app{"Lattice gauge theory and circuit simulation runner"};
  app.set_version_flag("--version", std::string(LGTSIM_VERSION));
  app.require_subcommand(1);

  std::string config_path, output_dir = ".";
  std::int64_t seed = -1;
  int threads = -1;
  for (const auto& [name, cmd] : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--output", output_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for noise and fit starts (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    Config cfg = config_path.empty() ? Config::parse("{}") : Config::load(config_path);
    Section root = Section::root(cfg);
    RunContext ctx;
    ctx.command = name;
    const int cfg_seed = root.integer("seed", 1);
    const int cfg_threads = root.integer("threads", 1);
    const std::string cfg_out = root.text("output_dir", "");
    ctx.seed = static_cast<std::uint64_t>(seed >= 0 ? seed : cfg_seed);
    ctx.threads = lgtsim::resolve_threads(threads >= 0 ? threads : cfg_threads);
    ctx.output_dir = app.get_subcommands().front()->count("--output") || cfg_out.empty() ? output_dir : cfg_out;
    if (threads < -1 || cfg_threads < 0) throw ConfigError("'threads' must be >= 0");

    // Output location and thread count do not affect results and stay out of the hash.
    json effective = cfg.root();
    effective.erase("threads");
    effective.erase("output_dir");
    effective["seed"] = ctx.seed;
    effective["command"] = name;
    ctx.config_hash = config_hash(effective);

    ctx.config_read = [&cfg] { cfg.check_unknown(); };
    std::filesystem::create_directories(ctx.output_dir);
    const auto& cmd = commands().at(name);
    int status = kExitOk;
    std::string failure;
    try {
      cmd(root, ctx);
    } catch (const NumericalFailure& e) {
      status = kExitNumerical;
      failure = e.what();
    } catch (const lgtsim::readout::InvariantError& e) {
      status = kExitNumerical;
      failure = e.what();
    } catch (const lgtsim::readout::FitError& e) {
      status = kExitNumerical;
      failure = e.what();
    } catch (const lgtsim::circuit::LabelingError& e) {
      status = kExitNumerical;
      failure = e.what();
    } catch (const lgtsim::circuit::CutoffError& e) {
      status = kExitNumerical;
      failure = e.what();
    } catch (const lgtsim::OdeError& e) {
      status = kExitNumerical;
      failure = e.what();
    }
    write_manifest(ctx, effective);
    if (status != kExitOk) {
      std::cerr << name << ": numerical invariant failed: " << failure << '\n';
      return status;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << name << ": numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
