#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kernrank/kernels.hpp"

namespace kernrank {

enum class Precision { double_precision, extended };

/// rank = #{ sigma_i > max(rel_threshold * sigma_max, abs_floor) }.
struct TolerancePolicy {
  double rel_threshold = 1e-10;
  double abs_floor = 1e-300;
  /// Working precision of kernel evaluation and SVD.
  Precision precision = Precision::double_precision;
  /// Two-sided diagonal scaling to unit max-norm rows and columns before the SVD.
  /// Rank is invariant under it; it stops tiny but exactly representable rows
  /// from reading as deficient. Singular values are reported for the scaled matrix.
  bool equilibrate = false;

  /// Extended working precision (100 digits) with a threshold well above its rounding floor.
  static TolerancePolicy extended_default() { return {1e-90, 1e-300, Precision::extended}; }
  void validate() const;
  /// Unit roundoff of the working precision.
  double working_epsilon() const;
};

struct RankResult {
  int rank = 0;
  std::vector<double> singular_values;  // nonincreasing

  double sigma_ratio() const;  // sigma_min / sigma_max, 0 for the zero matrix
};

RankResult numerical_rank(const Eigen::MatrixXd& m, const TolerancePolicy& policy = {});
RankResult numerical_rank(const MatT<Extended>& m, const TolerancePolicy& policy);

struct RankReport {
  std::string kernel;
  int k = 0;
  int trials = 0;
  int deficiency_count = 0;
  /// Deficiencies at the working-precision threshold k * eps, reported next to the policy's.
  int deficiency_count_machine = 0;
  double ratio_p5 = 0.0, ratio_p50 = 0.0, ratio_p95 = 0.0, ratio_min = 0.0;
  std::uint64_t seed = 0;
  TolerancePolicy policy;
  std::string conclusion;
};

struct MonteCarloOptions {
  int threads = 0;  // 0: hardware concurrency
  int max_k = 50;
};

/// Draws x_i from U (or subsetsU[i]) and y_j from V (or subsetsV[j]) per trial,
/// assembles the k x k kernel matrix and counts rank-deficient outcomes.
/// Trial t uses the stream derive_seed(seed, t); results are thread-count independent.
RankReport fullrank_mc(const KernelSpec& spec, int k, int trials, std::uint64_t seed,
                       const TolerancePolicy& policy = {}, const std::vector<Domain>& subsetsU = {},
                       const std::vector<Domain>& subsetsV = {}, const MonteCarloOptions& opts = {});

struct RankProfileRow {
  int k = 0;
  int max_rank = 0;
  int min_rank = 0;
  /// Largest sigma_j / sigma_max over the trials, for j = 0..k-1.
  std::vector<double> max_sigma_ratio;
};

struct FiniteRankEstimate {
  std::optional<int> rank;  // nullopt: ">= k_max"
  int k_max = 0;
  int trials_per_k = 0;
  std::uint64_t seed = 0;
  TolerancePolicy policy;
  std::vector<RankProfileRow> profile;

  std::string label() const;
};

/// Max observed rank for k = 1..k_max. The estimate is the plateau value r when
/// the max rank equals r < k for at least 3 consecutive k through k_max.
FiniteRankEstimate finite_rank_estimate(const KernelSpec& spec, int k_max, int trials_per_k, std::uint64_t seed,
                                        const TolerancePolicy& policy = {}, const MonteCarloOptions& opts = {});

/// A finite list of real functions on a common domain.
struct FunctionFamily {
  std::string label;
  Domain domain;
  std::vector<std::function<double(const Point&)>> members;

  std::size_t size() const noexcept { return members.size(); }

  /// x^{alpha} for each multi-index alpha.
  static FunctionFamily powers(const std::vector<std::vector<int>>& multi_indices, Domain domain);
  /// (x - a)^{alpha} for each (a, alpha).
  static FunctionFamily translated_powers(const std::vector<std::pair<Point, std::vector<int>>>& terms, Domain domain);
  /// f_s(x) = exp(-s/x) for x > 0, 0 otherwise; one-dimensional.
  static FunctionFamily exp_neg_s_over_x(const std::vector<int>& s_values, Domain domain);
  /// y -> psi(x_i, y) for frozen x_i; domain V.
  static FunctionFamily kernel_rows(const KernelSpec& spec, const std::vector<Point>& xs);
  /// x -> c_s(x), the Taylor coefficients of y -> psi(x, p + t dir) at t = 0.
  /// Domain is U, or the open unit chart ball for spherical kernels.
  static FunctionFamily taylor_functions(const KernelSpec& spec, const Point& p, const Eigen::VectorXd& dir,
                                         const std::vector<int>& orders);
};

struct WitnessSearch {
  bool found = false;
  std::vector<Point> points;
  int achieved_rank = 0;
  double sigma_ratio = 0.0;
};

/// Greedy incremental search: x_j drawn from subsets[j] maximizes the smallest
/// singular value of {f_i(x_l)}_{i,l<=j} over `budget` candidates.
/// Candidate streams are derive_seed(seed, j), so a larger budget extends the
/// same candidate sequence. Absence of a witness is a result, not an exception.
WitnessSearch constrained_fullrank_search(const FunctionFamily& fam, const std::vector<Domain>& subsets, int budget,
                                          std::uint64_t seed, const TolerancePolicy& policy = {});

enum class LliVerdict { witness_found, no_witness_in_budget };

struct LliProbe {
  LliVerdict verdict = LliVerdict::no_witness_in_budget;
  WitnessSearch search;
};

/// Witness search for the first k members with every subset equal to `window`.
LliProbe lli_probe(const FunctionFamily& fam, const Domain& window, int k, int budget, std::uint64_t seed,
                   const TolerancePolicy& policy = {});

std::string to_string(LliVerdict v);

}  // namespace kernrank
