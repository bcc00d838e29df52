#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "kernrank/kernels.hpp"
#include "kernrank/rank.hpp"

namespace kernrank {

namespace testfn {
struct ExpDecay {
  double rate = 1.0;
};
/// sum_i coeffs[i] y^i.
struct Polynomial {
  std::vector<double> coeffs;
};
struct GaussianBump {
  double center = 0.5;
  double width = 0.15;
};
}  // namespace testfn

/// Ground-truth density on a one-dimensional V.
struct TestFunction {
  std::variant<testfn::ExpDecay, testfn::Polynomial, testfn::GaussianBump> kind;

  double operator()(double y) const;
  std::string describe() const;
};

/// Quadrature form of the integral equation on cell representatives:
/// A(i, j) = psi(x_i, y_j) vol(V_j), W = diag(1 / vol(V_j)).
struct DiscreteSystem {
  std::vector<Point> xs;
  std::vector<Point> ys;
  std::vector<double> volumes;
  Eigen::MatrixXd A;
  Eigen::VectorXd W;

  int k() const noexcept { return static_cast<int>(xs.size()); }
  /// The bare kernel matrix {psi(x_i, y_j)} = A W.
  Eigen::MatrixXd kernel_matrix() const { return A * W.asDiagonal(); }
};

DiscreteSystem assemble(const KernelSpec& spec, const Partition& partU, const Partition& partV);

struct ForwardOptions {
  /// Panels of the composite Gauss-Legendre rule on bounded V.
  int cells = 16;
  /// Double the node count until successive results agree to `tol`, up to `max_nodes`.
  bool self_check = false;
  int max_nodes = 512;
  double tol = 1e-10;
};

/// g(x) = integral over V of psi(x, y) f(y) dy at each target. Bounded V uses a
/// composite Gauss-Legendre rule with quad_nodes per panel; a half line uses
/// Gauss-Laguerre with the exponential factor absorbed into the weight.
/// Throws QuadratureNotConverged when the self-check fails at the cap.
Eigen::VectorXd forward_apply(const KernelSpec& spec, const TestFunction& f, const std::vector<Point>& targets,
                              int quad_nodes, const ForwardOptions& opts = {});

enum class SolveMethod { direct, tsvd, tikhonov };
std::string to_string(SolveMethod m);

struct Solution {
  Eigen::VectorXd fhat;  // values on the V cells
  SolveMethod method = SolveMethod::direct;
  double parameter = 0.0;  // r for TSVD, lambda for Tikhonov
  double residual = 0.0;   // |A fhat - g| / |g|
  double condition_number = 0.0;
  int numerical_rank = 0;
};

/// fhat = W A_k^{-1} g with A_k the bare kernel matrix (equivalently A^{-1} g).
/// Throws SingularSystem carrying the numerical rank when A is rank deficient.
Solution solve_direct(const DiscreteSystem& sys, const Eigen::VectorXd& g, const TolerancePolicy& policy = {});
/// Pseudo-inverse restricted to the leading r singular triplets.
Solution solve_tsvd(const DiscreteSystem& sys, const Eigen::VectorXd& g, int r);
/// argmin |A x - g|^2 + lambda^2 |x|^2.
Solution solve_tikhonov(const DiscreteSystem& sys, const Eigen::VectorXd& g, double lambda);

/// Lambda choice along a sweep. automatic: discrepancy when noise is declared,
/// minimum recovery error (calibration against a known truth) otherwise.
enum class Selection { automatic, min_recovery_error, discrepancy };

/// How local_recover picks the regularization.
struct RecoveryMethod {
  SolveMethod method = SolveMethod::tikhonov;
  double parameter = 0.0;  // lambda or r; ignored when sweeping
  bool sweep = false;      // Tikhonov only: logarithmic lambda sweep
  Selection selection = Selection::automatic;
};

struct RecoveryOptions {
  int quad_nodes = 64;
  int quad_cells = 16;
  double noise = 0.0;  // relative, per measurement
  std::uint64_t seed = 0;
  int sweep_points = 25;
  double sweep_lo = 1e-12;
  double sweep_hi = 1.0;
  TolerancePolicy policy;
};

struct SweepPoint {
  double lambda;
  double residual;
  double recovery_error;
  double solution_norm;
};

struct InversionReport {
  std::string kernel;
  std::string truth;
  int k = 0;
  SolveMethod method = SolveMethod::direct;
  double parameter = 0.0;
  std::string selection;  // "fixed", "min_recovery_error", "discrepancy"
  double condition_number = 0.0;
  double residual = 0.0;
  double recovery_error = 0.0;
  std::string window;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> x_nodes, g, y_nodes, fhat;
  std::vector<SweepPoint> sweep;
};

/// Measures g = A_psi f_true at k cell centers inside `window`, partitions V
/// into k cells, assembles the window-restricted system and solves it.
/// With a sweep, lambda follows method.selection.
InversionReport local_recover(const KernelSpec& spec, const TestFunction& truth, const Domain& window, int k,
                              const RecoveryMethod& method, const RecoveryOptions& opts = {});

/// Relative L2 error on V of the piecewise-constant fhat (one value per cell of
/// a uniform k-partition of the bounded interval V) against `truth`.
double recovery_error(const Domain& V, const Eigen::VectorXd& fhat, const TestFunction& truth);

struct NullMomentRow {
  int s = 0;
  std::string moment_even;  // (2s)! / (2s)
  std::string moment_odd;   // (2s-1)!
  std::string difference;
};

struct NullMomentReport {
  std::vector<NullMomentRow> rows;
  bool exact_cancellation = true;
  std::vector<double> x_grid;
  std::vector<double> values;
  std::vector<bool> converged;
  bool all_converged = true;
  double constancy_gap = 0.0;     // max - min over converged grid points
  double measured_constant = 0.0; // mean over converged grid points
};

/// Moment identities int_0^inf (y^{2s}/(2s) - y^{2s-1}) e^{-y} dy = (2s)!/(2s) - (2s-1)!
/// in exact integer arithmetic for s = 1..S, and the quadrature value of
/// (A_psi e^{-y})(x) for the null-example kernel on the grid.
NullMomentReport null_moment_check(const std::vector<double>& x_grid, int S, const ForwardOptions& opts = {16, true, 512, 1e-10},
                                   int start_nodes = 32);

}  // namespace kernrank
