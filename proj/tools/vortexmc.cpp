// vortexmc: run / resume beta sweeps, re-emit tables, run the oracle suite.
//
// Exit codes: 0 success, 1 a check or chain failed, 2 bad config or I/O.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vortex/harness.hpp"
#include "vortex/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string config;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> max_sweeps;
  std::uint64_t interrupt_after = 0;
};

vortex::SweepConfig configure(const Overrides& o) {
  auto cfg = vortex::load_sweep_config(o.config);
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.max_sweeps) {
    cfg.sampler.max_burn_in_sweeps = *o.max_sweeps;
    cfg.sampler.burn_in_sweeps = std::min(cfg.sampler.burn_in_sweeps, *o.max_sweeps);
  }
  cfg.validate();
  return cfg;
}

int sweep(const Overrides& o, bool resume) {
  const auto cfg = configure(o);
  vortex::SweepOptions opt;
  opt.resume = resume;
  opt.stop_after_sweeps = o.interrupt_after;
  const auto res = vortex::run_sweep(cfg, opt);
  for (const auto& r : res.records) {
    std::cout << "beta " << r.beta << "  r2_mc " << r.observables.r2_mc.mean << " +- "
              << r.observables.r2_mc.std_error << "  r2_3d " << r.r2_3d_pred
              << (r.equilibrated ? "" : "  (not equilibrated)") << '\n';
  }
  if (res.interrupted > 0) {
    std::cout << res.interrupted << " chain(s) checkpointed; continue with `vortexmc resume`\n";
  } else {
    std::cout << "wrote " << (cfg.output_dir / "comparison.tsv").string() << '\n';
  }
  return kExitOk;
}

int table(const std::string& dir) {
  const auto records = vortex::load_records(dir);
  if (records.empty()) throw std::runtime_error("no records in " + dir);
  vortex::emit_comparison_table(records, dir);
  std::cout << vortex::comparison_table(records);
  return kExitOk;
}

int verify(double perturb, std::optional<std::uint64_t> seed) {
  vortex::VerifyOptions opt;
  opt.perturb_eta = perturb;
  if (seed) opt.seed = *seed;
  const auto results = vortex::run_verify(opt);
  vortex::print_report(std::cout, results);
  const bool ok = vortex::all_passed(results);
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

void add_sweep_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "sweep config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--output-dir", o.output_dir, "output directory (overrides config)");
  cmd->add_option("-s,--seed", o.seed, "master seed (overrides config)");
  cmd->add_option("-w,--workers", o.workers, "parallel chains, 0 = all cores");
  cmd->add_option("--max-sweeps", o.max_sweeps, "cap on burn-in sweeps per chain");
  cmd->add_option("--interrupt-after", o.interrupt_after,
                  "checkpoint and stop each chain after this many sweeps");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearly-parallel vortex filament equilibrium sampler"};
  app.require_subcommand(1);

  Overrides run_o, resume_o;
  auto* run = app.add_subcommand("run", "run a beta sweep");
  add_sweep_flags(run, run_o);
  auto* resume = app.add_subcommand("resume", "continue a sweep from its checkpoints and records");
  add_sweep_flags(resume, resume_o);

  std::string table_dir;
  auto* tbl = app.add_subcommand("table", "re-emit comparison tables from stored records");
  tbl->add_option("-o,--output-dir", table_dir, "sweep output directory")->required();

  double perturb = 0.0;
  std::optional<std::uint64_t> verify_seed;
  auto* ver = app.add_subcommand("verify", "run the oracle suite");
  ver->add_option("--perturb-eta", perturb, "relative perturbation of eta (failure injection)");
  ver->add_option("-s,--seed", verify_seed, "seed for the sampler checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return sweep(run_o, false);
    if (*resume) return sweep(resume_o, true);
    if (*tbl) return table(table_dir);
    if (*ver) return verify(perturb, verify_seed);
  } catch (const vortex::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vortex::format_error& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}
