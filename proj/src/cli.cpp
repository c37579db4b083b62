#include "mflk/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mflk/experiments.hpp"
#include "mflk/properties.hpp"
#include "mflk/version.hpp"

namespace mflk {

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool timing = false;
};

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : config_from_table(load_config_file(o.config_path));
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.timing) cfg.timing = true;
  cfg.validate();
  return cfg;
}

void print_verdicts(const std::vector<ConvergenceReport>& reports) {
  for (const auto& rep : reports)
    for (const auto& v : rep.verdicts())
      std::cout << (v.ok() ? "PASS " : "FAIL ") << rep.experiment() << '/' << v.id << " [" << to_string(v.status)
                << "] " << v.details << '\n';
}

void write_outputs(const ExperimentConfig& cfg, const std::string& name, const std::vector<ConvergenceReport>& reports) {
  std::filesystem::create_directories(cfg.out);
  const std::filesystem::path base = std::filesystem::path(cfg.out) / name;
  std::ofstream csv(base.string() + ".csv"), js(base.string() + ".json");
  if (!csv || !js) throw std::runtime_error("cannot write results under " + cfg.out);
  write_csv(csv, reports);
  write_json(js, cfg, reports);
}

int run_experiments(const ExperimentConfig& cfg, const std::string& name) {
  std::vector<ConvergenceReport> reports;
  for (const auto& e : experiment_registry())
    if (name == "all" || name == e.name) reports.push_back(e.run(cfg));
  write_outputs(cfg, name, reports);
  print_verdicts(reports);
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.passed();
  return ok ? 0 : 1;
}

int run_selftest(const ExperimentConfig& cfg) {
  bool ok = true;
  for (const auto& r : run_property_suite(cfg.seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << ": " << r.details << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Mean-field limits of kernels and learning problems"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides o;
  std::string chosen;
  std::vector<std::string> names{"all", "selftest"};
  for (const auto& e : experiment_registry()) names.push_back(e.name);
  for (const auto& n : names) {
    auto* sub = app.add_subcommand(n, n == "all" ? "run every experiment" : n == "selftest" ? "run the property suite" : "run one experiment");
    sub->add_option("--config", o.config_path, "TOML configuration file");
    sub->add_option("--seed", o.seed, "root seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--timing", o.timing, "record wall-clock runtimes in the reports");
    sub->callback([&chosen, n] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }
  try {
    return chosen == "selftest" ? run_selftest(cfg) : run_experiments(cfg, chosen);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mflk
