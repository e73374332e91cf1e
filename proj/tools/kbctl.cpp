#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "kb/harness.hpp"

namespace hn = kb::harness;

int main(int argc, char** argv) {
  CLI::App app{"kernel-bound toolkit: hypothesis certification, constant "
               "pipeline, kernel solves and validation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode = "closed-form";
  bool dry_run = false;
  double t_run = 0.4;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI config file")->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--mode", mode, "constant source: measured|closed-form")
        ->check(CLI::IsMember({"measured", "closed-form"}));
    sub->add_flag("--dry-run", dry_run, "placeholder functional inputs");
    return sub;
  };

  auto* c_check = add_common(app.add_subcommand("check", "certify hypotheses"));
  auto* c_const =
      add_common(app.add_subcommand("constants", "constant pipeline"));
  c_const->add_option("--t", t_run, "running time for the window");
  auto* c_solve = add_common(app.add_subcommand("solve", "kernel solve"));
  auto* c_val =
      add_common(app.add_subcommand("validate", "envelope validation"));
  auto* c_cross =
      add_common(app.add_subcommand("crosscheck", "PDE vs Monte Carlo"));
  auto* c_approx =
      add_common(app.add_subcommand("approx", "cutoff approximation sweep"));

  CLI11_PARSE(app, argc, argv);

  try {
    hn::RunConfig cfg = hn::parse_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (c_check->parsed()) return hn::cmd_check(cfg);
    if (c_const->parsed()) return hn::cmd_constants(cfg, t_run, dry_run, mode);
    if (c_solve->parsed()) return hn::cmd_solve(cfg);
    if (c_val->parsed()) return hn::cmd_validate(cfg);
    if (c_cross->parsed()) return hn::cmd_crosscheck(cfg);
    if (c_approx->parsed()) return hn::cmd_approx(cfg);
  } catch (const kb::NonFinite& e) {
    std::fprintf(stderr, "non-finite value: %s\n", e.what());
    return hn::kNonFinite;
  } catch (const kb::ConstraintViolation& e) {
    std::fprintf(stderr, "constraint violation: %s\n", e.what());
    return hn::kHypothesisFail;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
