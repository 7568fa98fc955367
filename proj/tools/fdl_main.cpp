#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdl/analysis.hpp"
#include "fdl/config.hpp"
#include "fdl/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

constexpr const char* kOutputEnv = "FDL_OUTPUT_DIR";

fdl::Json load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  fdl::Json j = fdl::read_json_file(path);
  for (const auto& o : overrides) fdl::apply_override(j, o);
  return j;
}

void print_errors(const std::vector<fdl::ConfigError>& errors) {
  for (const auto& e : errors) std::cerr << "  " << (e.path.empty() ? "<root>" : e.path) << ": " << e.message << "\n";
}

std::filesystem::path output_dir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return from_config;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& overrides) {
  const auto j = load_with_overrides(path, overrides);
  const auto errors = fdl::validate_config(j);
  if (!errors.empty()) {
    std::cerr << path << ": " << errors.size() << " error(s)\n";
    print_errors(errors);
    return kExitValidation;
  }
  const auto cfg = fdl::load_config(j);
  for (int i : cfg.scenario.gains.agents_with_weak_h2()) {
    std::cerr << "warning: H2 - H1 is not positive definite for agent " << i + 1 << "\n";
  }
  std::cout << path << ": ok (" << cfg.scenario.agents() << " agents, n = " << cfg.scenario.n() << ", "
            << cfg.scenario.grid->size() << " neurons)\n";
  return kExitOk;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides, const std::string& out_flag,
            bool quiet) {
  const auto cfg = fdl::load_config(load_with_overrides(path, overrides));
  for (int i : cfg.scenario.gains.agents_with_weak_h2()) {
    std::cerr << "warning: H2 - H1 is not positive definite for agent " << i + 1 << "\n";
  }
  const auto dir = output_dir(out_flag, cfg.output_dir);
  if (!quiet) {
    std::cerr << "running " << cfg.scenario.name << ": t_end " << cfg.run.t_end << " s, dt " << cfg.run.dt << "\n";
  }
  const auto log = fdl::run_scenario(cfg.scenario, cfg.run);
  fdl::write_run(dir, cfg, log);
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << "\n";
  if (log.status == fdl::RunStatus::Diverged) {
    std::cerr << "diverged: " << log.message << " (partial log in " << dir.string() << ")\n";
    return kExitDivergence;
  }
  if (!quiet) {
    std::cerr << "done in " << log.wall_seconds << " s, " << log.rows() << " rows -> " << dir.string() << "\n";
  }
  return kExitOk;
}

int cmd_analyze(const std::string& run_dir, const std::string& config_path,
                const std::vector<std::string>& overrides, const std::string& out_flag, bool strict) {
  const auto log = fdl::read_run(run_dir);
  fdl::Json j = config_path.empty() ? fdl::read_run_config(run_dir) : fdl::read_json_file(config_path);
  for (const auto& o : overrides) fdl::apply_override(j, o);
  const auto cfg = fdl::load_config(j);
  const auto report = fdl::analyze_run(log, cfg.scenario, cfg.analysis);
  const std::filesystem::path dir = out_flag.empty() ? std::filesystem::path(run_dir) / "report" : std::filesystem::path(out_flag);
  fdl::write_report(dir, report, log);
  bool failed = false;
  for (const auto& v : report.verdicts) {
    const char* tag = !v.applicable ? "n/a " : (v.pass ? "PASS" : "FAIL");
    if (v.applicable && !v.pass) failed = true;
    std::printf("[%s] %d %-24s %s\n", tag, v.criterion, v.name.c_str(), v.detail.c_str());
  }
  for (const auto& n : report.notes) std::printf("note: %s\n", n.c_str());
  std::printf("report -> %s\n", dir.string().c_str());
  return strict && failed ? kExitVerdict : kExitOk;
}

int cmd_golden(const std::string& path, const std::vector<std::string>& overrides) {
  const auto cfg = fdl::load_config(load_with_overrides(path, overrides));
  const auto state = cfg.scenario.initial_state();
  const auto d = fdl::system_derivative(cfg.scenario, 0.0, state);
  const auto lay = cfg.scenario.layout();
  fdl::Json out = fdl::Json::object();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (d(k) != 0.0) out[lay.component_name(k)] = d(k);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative deterministic-learning formation control simulator"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::string run_dir;
  bool quiet = false;
  bool strict = false;

  auto* validate = app.add_subcommand("validate", "Check a scenario config and list every problem");
  validate->add_option("config", config, "Scenario JSON")->required();
  validate->add_option("--override,-o", overrides, "key.path=value (value parsed as JSON)");

  auto* run = app.add_subcommand("run", "Integrate a scenario and write the run directory");
  run->add_option("config", config, "Scenario JSON")->required();
  run->add_option("--override,-o", overrides, "key.path=value (value parsed as JSON)");
  run->add_option("--out", out, std::string("Output directory (else $") + kOutputEnv + ", else output.dir)");
  run->add_flag("--quiet,-q", quiet, "No progress messages");

  auto* analyze = app.add_subcommand("analyze", "Compute metrics and verdicts for a run directory");
  analyze->add_option("run_dir", run_dir, "Directory written by 'run'")->required();
  analyze->add_option("--config", config, "Scenario JSON (default: the config echoed in the run metadata)");
  analyze->add_option("--override,-o", overrides, "key.path=value applied to the config");
  analyze->add_option("--out", out, "Report directory (default: <run_dir>/report)");
  analyze->add_flag("--strict", strict, "Exit with 1 when an applicable verdict fails");

  auto* golden = app.add_subcommand("golden", "Print the nonzero entries of the initial derivative as JSON");
  golden->add_option("config", config, "Scenario JSON")->required();
  golden->add_option("--override,-o", overrides, "key.path=value (value parsed as JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate) return cmd_validate(config, overrides);
    if (*run) return cmd_run(config, overrides, out, quiet);
    if (*analyze) return cmd_analyze(run_dir, config, overrides, out, strict);
    if (*golden) return cmd_golden(config, overrides);
  } catch (const fdl::ConfigInvalid& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const fdl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
