// kernrank command-line runner.
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "kernrank/errors.hpp"
#include "kernrank/experiment.hpp"

namespace {

using kernrank::ExperimentConfig;
using kernrank::Subcommand;

struct Common {
  std::string output;
  std::string precision = "double";
  double rel_threshold = 1e-10;
  double abs_floor = 1e-300;
  bool equilibrate = false;
};

void add_common(CLI::App* sub, ExperimentConfig& cfg, Common& common, bool needs_kernel = true) {
  auto* kopt = sub->add_option("--kernel", cfg.kernel, "kernel, e.g. sphere-geo-sq:n=2");
  if (needs_kernel) kopt->required();
  sub->add_option("--seed", cfg.seed, "master seed");
  sub->add_option("--output,-o", common.output, "output file (default: $KERNRANK_OUTPUT_DIR/<subcommand>-<seed>.<fmt>, else stdout)");
  sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--threads", cfg.threads, "worker threads, 0 = all cores");
  sub->add_option("--precision", common.precision, "double or extended")->check(CLI::IsMember({"double", "extended"}));
  sub->add_option("--rel-threshold", common.rel_threshold, "relative singular value threshold");
  sub->add_option("--abs-floor", common.abs_floor, "absolute singular value floor");
  sub->add_flag("--equilibrate", common.equilibrate, "scale rows and columns before the SVD");
}

std::string default_output(const ExperimentConfig& cfg) {
  const char* dir = std::getenv("KERNRANK_OUTPUT_DIR");
  if (!dir || !*dir) return {};
  return (std::filesystem::path(dir) / (kernrank::to_string(cfg.subcommand) + "-" + std::to_string(cfg.seed) + "." + cfg.format))
      .string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernrank: numerical rank and inversion experiments for integral kernels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kernrank::version());

  ExperimentConfig cfg;
  Common common;

  auto* rank_mc = app.add_subcommand("rank-mc", "Monte Carlo full-rank probe");
  add_common(rank_mc, cfg, common);
  rank_mc->add_option("--k", cfg.k, "matrix size");
  rank_mc->add_option("--trials", cfg.trials, "number of trials");

  auto* finite = app.add_subcommand("finite-rank", "finite-rank estimate from the rank profile");
  add_common(finite, cfg, common);
  finite->add_option("--kmax", cfg.k_max, "largest k");
  cfg.trials = 100;
  finite->add_option("--trials", cfg.trials, "trials per k (>= 20)");

  auto* lli = app.add_subcommand("lli-probe", "local linear independence witness search");
  add_common(lli, cfg, common, false);
  lli->add_option("--family", cfg.family, "powers, exp-neg-s-over-x or taylor")
      ->check(CLI::IsMember({"powers", "exp-neg-s-over-x", "taylor"}));
  lli->add_option("--k", cfg.k, "number of family members (default: number of --orders, else 10)");
  lli->add_option("--orders", cfg.orders, "Taylor orders (taylor family)")->delimiter(',');
  lli->add_option("--window", cfg.window, "lo,hi[,lo,hi...]")->delimiter(',')->required();
  lli->add_option("--budget", cfg.budget, "candidate draws per point");

  auto* taylor = app.add_subcommand("taylor", "Taylor jet along a slice, checked by finite differences");
  add_common(taylor, cfg, common);
  taylor->add_option("--x", cfg.x, "frozen first argument")->delimiter(',')->required();
  taylor->add_option("--p", cfg.p, "expansion point")->delimiter(',')->required();
  taylor->add_option("--dir", cfg.dir, "unit direction")->delimiter(',')->required();
  taylor->add_option("--order", cfg.order, "jet order");
  taylor->add_option("--radius", cfg.radius, "slice radius");
  taylor->add_option("--step", cfg.h, "finite-difference step relative to the radius");

  auto* invert = app.add_subcommand("invert", "local recovery from window measurements");
  add_common(invert, cfg, common);
  invert->add_option("--k", cfg.k, "cells");
  invert->add_option("--window", cfg.window, "lo,hi")->delimiter(',');
  invert->add_option("--method", cfg.method, "direct, tsvd or tikhonov")
      ->check(CLI::IsMember({"direct", "tsvd", "tikhonov"}));
  invert->add_option("--lambda", cfg.lambda, "Tikhonov parameter");
  invert->add_option("--r", cfg.r, "TSVD retained modes");
  invert->add_flag("--sweep", cfg.sweep, "logarithmic lambda sweep");
  invert->add_option("--selection", cfg.selection, "automatic, min_recovery_error or discrepancy");
  invert->add_option("--truth", cfg.truth, "exp_decay:rate | polynomial:c0,c1,... | gaussian_bump:center,width");
  invert->add_option("--noise", cfg.noise, "relative measurement noise");
  invert->add_option("--quad-nodes", cfg.quad_nodes, "Gauss nodes per panel of the forward rule");
  invert->add_option("--curve", cfg.curve, "csv curve: fhat or g");

  auto* null = app.add_subcommand("null-check", "null-vector check for the null-example kernel");
  add_common(null, cfg, common, false);
  null->add_option("--x-grid", cfg.x_grid, "x values")->delimiter(',');
  null->add_option("--S", cfg.S, "moment terms");

  std::string manifest_path;
  auto* verify = app.add_subcommand("verify", "re-run a manifest and compare payloads");
  verify->add_option("manifest", manifest_path, "manifest JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      kernrank::verify_manifest(manifest_path);
      std::cout << "verified " << manifest_path << "\n";
      return 0;
    }
    if (rank_mc->parsed()) cfg.subcommand = Subcommand::rank_mc;
    if (finite->parsed()) cfg.subcommand = Subcommand::finite_rank;
    if (lli->parsed()) {
      cfg.subcommand = Subcommand::lli_probe;
      if (lli->count("--k") == 0 && !cfg.orders.empty()) cfg.k = static_cast<int>(cfg.orders.size());
    }
    if (taylor->parsed()) cfg.subcommand = Subcommand::taylor;
    if (invert->parsed()) cfg.subcommand = Subcommand::invert;
    if (null->parsed()) cfg.subcommand = Subcommand::null_check;
    cfg.policy.rel_threshold = common.rel_threshold;
    cfg.policy.abs_floor = common.abs_floor;
    cfg.policy.precision =
        common.precision == "extended" ? kernrank::Precision::extended : kernrank::Precision::double_precision;
    cfg.policy.equilibrate = common.equilibrate;
    cfg.validate();

    const kernrank::RunManifest m = kernrank::run(cfg);
    const std::string text =
        cfg.format == "csv" ? kernrank::to_csv(cfg, m.result) : kernrank::to_json(m).dump(2) + "\n";
    const std::string out = common.output.empty() ? default_output(cfg) : common.output;
    if (out.empty()) {
      std::cout << text;
    } else {
      kernrank::write_atomic(out, text);
      std::cerr << "wrote " << out << "\n";
    }
    return 0;
  } catch (const kernrank::MismatchDetected& e) {
    std::cerr << "error: mismatch at " << e.field << ": " << e.what() << "\n";
    return kernrank::exit_code(e);
  } catch (const kernrank::SingularSystem& e) {
    std::cerr << "error: singular system (numerical rank " << e.rank << "): " << e.what() << "\n";
    return kernrank::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kernrank::exit_code(e);
  }
}
