#pragma once

#include <utility>
#include <vector>

#include "kernrank/kernels.hpp"

namespace kernrank {

/// Truncated power series in t about t = 0: coeffs[s] = f^{(s)}(0) / s!.
/// Arithmetic between jets of order m stays at order m.
class TaylorJet {
 public:
  TaylorJet() = default;
  explicit TaylorJet(int order, double constant = 0.0);
  explicit TaylorJet(std::vector<double> coeffs);

  /// t -> c0 + c1 t.
  static TaylorJet linear(int order, double c0, double c1);

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  double operator[](int s) const { return c_[static_cast<std::size_t>(s)]; }
  double& operator[](int s) { return c_[static_cast<std::size_t>(s)]; }
  const std::vector<double>& coeffs() const noexcept { return c_; }
  double value() const { return c_.front(); }

  /// Partial sum at t.
  double evaluate(double t) const;

  TaylorJet& operator+=(const TaylorJet& o);
  TaylorJet& operator-=(const TaylorJet& o);
  TaylorJet& operator*=(double k);
  TaylorJet& operator+=(double k);

  friend TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
  friend TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
  friend TaylorJet operator*(TaylorJet a, double k) { return a *= k; }
  friend TaylorJet operator*(double k, TaylorJet a) { return a *= k; }
  friend TaylorJet operator+(TaylorJet a, double k) { return a += k; }
  friend TaylorJet operator+(double k, TaylorJet a) { return a += k; }
  friend TaylorJet operator-(TaylorJet a) { return a *= -1.0; }
  friend TaylorJet operator*(const TaylorJet& a, const TaylorJet& b);
  friend TaylorJet operator/(const TaylorJet& a, const TaylorJet& b);

  /// d/dt, one order lower.
  TaylorJet derivative() const;
  /// Antiderivative with the given constant term, one order higher.
  TaylorJet integral(double constant) const;

 private:
  std::vector<double> c_;
};

TaylorJet reciprocal(const TaylorJet& a);
TaylorJet sqrt(const TaylorJet& a);
TaylorJet exp(const TaylorJet& a);
TaylorJet expm1(const TaylorJet& a);
/// Returns (sin a, cos a).
std::pair<TaylorJet, TaylorJet> sincos(const TaylorJet& a);
TaylorJet cos(const TaylorJet& a);
/// w = arccos(z) via w' = -z' / sqrt(1 - z^2) and termwise integration.
/// Throws SingularExpansion when |z(0)| >= 1 - 1e-9.
TaylorJet acos(const TaylorJet& z);

/// A one-dimensional slice t -> psi(x, p + t dir) of a kernel.
/// For spherical kernels x, p and dir are hemisphere-chart coordinates in R^n.
struct SliceSpec {
  Point x;
  Point p;
  Eigen::VectorXd dir;
  int order = 6;
  /// The segment p + t dir, |t| < radius, must stay inside V (or the chart).
  double radius = 0.1;
};

/// Throws ValidationError if the slice breaks its invariants for this kernel.
void validate_slice(const KernelSpec& spec, const SliceSpec& slice);

/// Jet of t -> psi(x, p + t dir) to slice.order.
TaylorJet jet_propagate(const KernelSpec& spec, const SliceSpec& slice);

/// Kernel value along the slice, evaluated at Extended precision (the
/// finite-difference oracle path; independent of the jet arithmetic).
double slice_value(const KernelSpec& spec, const SliceSpec& slice, double t);

struct FiniteDiffRow {
  int order;
  double coefficient;
  double finite_diff;
  double rel_err;
};

struct FiniteDiffReport {
  std::vector<FiniteDiffRow> rows;
  double max_rel_err = 0.0;
};

/// Compares jet coefficients of orders 1..min(order, 6) with central differences
/// of the kernel along the slice at steps h and h/2 (h scaled by the slice
/// radius), combined by one Richardson extrapolation. Relative errors use
/// max(|finite_diff|, 1e-8) as the denominator.
FiniteDiffReport finite_diff_check(const KernelSpec& spec, const SliceSpec& slice, double h = 1e-2);

struct OddEvenReport {
  bool on_symmetry_slice = false;  // x_1 == 0
  double max_abs_odd = 0.0;
  std::vector<double> even_coeffs;  // coeffs[0], coeffs[2], ...
  std::vector<double> coeffs;
};

/// Expands a spherical kernel about the chart origin in direction e_1 with x frozen.
OddEvenReport odd_even_structure(const KernelSpec& spec, const Point& x, int order);

struct PolyFit {
  std::vector<double> coeffs;  // ascending powers
  double max_residual = 0.0;
};

/// Least-squares polynomial fit. Needs at least degree + 2 distinct t values;
/// throws IllConditionedFit if the Vandermonde system is numerically rank deficient.
PolyFit poly_fit_in_t(const std::vector<std::pair<double, double>>& samples, int degree);

}  // namespace kernrank
