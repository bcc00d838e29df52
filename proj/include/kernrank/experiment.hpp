#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

#include "kernrank/report.hpp"

namespace kernrank {

enum class Subcommand { rank_mc, finite_rank, lli_probe, taylor, invert, null_check };

std::string to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& s);

/// Everything needed to reproduce one run. Fields unused by a subcommand keep
/// their defaults and are still echoed.
struct ExperimentConfig {
  Subcommand subcommand = Subcommand::rank_mc;
  std::string kernel;
  std::uint64_t seed = 0;
  TolerancePolicy policy;
  int threads = 0;

  // rank-mc / finite-rank
  int k = 10;
  int trials = 100;
  int k_max = 8;

  // lli-probe: "powers", "exp-neg-s-over-x" or "taylor" (Taylor functions of `kernel`)
  std::string family = "powers";
  std::vector<int> orders;  // taylor family orders; empty: 0..k-1
  int budget = 64;

  // taylor
  std::vector<double> x, p, dir;
  int order = 6;
  double radius = 0.1;
  double h = 1e-2;

  // invert / lli-probe window, as lo,hi per axis (a single pair means a cube)
  std::vector<double> window;
  std::string method = "tikhonov";  // direct | tsvd | tikhonov
  double lambda = 1e-6;
  int r = 1;
  bool sweep = false;
  std::string selection = "automatic";  // automatic | min_recovery_error | discrepancy
  std::string truth = "gaussian_bump:0.5,0.15";
  double noise = 0.0;
  int quad_nodes = 64;

  // null-check
  std::vector<double> x_grid{-2, -1, 0, 1, 2};
  int S = 30;

  std::string format = "json";  // json | csv
  std::string curve = "fhat";   // invert csv: fhat | g

  /// Throws ValidationError, including for unknown kernel strings, before any computation.
  void validate() const;
};

Json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);

/// "exp_decay:1", "polynomial:1,0,2", "gaussian_bump:0.5,0.15".
TestFunction parse_test_function(const std::string& text);

/// The deterministic result payload of a config.
Json run_payload(const ExperimentConfig& c);

struct RunManifest {
  ExperimentConfig config;
  std::string version;
  double wall_clock_seconds = 0.0;
  Json result;
};

RunManifest run(const ExperimentConfig& c);
Json to_json(const RunManifest& m);

/// Two-column or tabular CSV for the vector payloads (taylor tables, invert curves).
std::string to_csv(const ExperimentConfig& c, const Json& result);

/// Writes via a sibling temporary file and rename, so readers never see partial output.
void write_atomic(const std::string& path, const std::string& content);

/// Re-runs the manifest's config and compares payloads. Throws MismatchDetected
/// naming the first differing field.
void verify_manifest_json(const Json& manifest);
void verify_manifest(const std::string& path);

const char* version();

/// Exit-code contract: 2 validation, 3 domain violation, 4 singular system,
/// 5 quadrature non-convergence, 6 mismatch, 1 anything else.
int exit_code(const std::exception& e);

}  // namespace kernrank
