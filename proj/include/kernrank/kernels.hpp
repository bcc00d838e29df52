#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "kernrank/domains.hpp"
#include "kernrank/precision.hpp"

namespace kernrank {

namespace family {

/// |x - y|^2 in R^n. Rank n + 2.
struct EuclideanSq {
  int n = 1;
};
/// (x - y)^2 on an interval of the circle parameter. Rank 3.
struct CircularSq {};
/// Great-circle distance arccos(p.q) on S^n.
struct SphereGeodesic {
  int n = 2;
};
/// Squared great-circle distance on S^n.
struct SphereGeodesicSq {
  int n = 2;
};

enum class DotFn { exp_neg, cos, arccos };
/// h(x.y) for h in {exp(-t), cos(t), arccos(t)}.
struct DotAnalytic {
  DotFn h = DotFn::exp_neg;
  int n = 3;
};

/// y^{s(x)} / s(x)! with s(x) the unique s with x in [s/(s+1), (s+1)/(s+2)).
struct IndicatorExample {};

/// 1 + sum_{s>=1} x^s/s! (y/(2s) - 1) y^{2s-1} on (finite box) x (0, inf).
struct NullExample {};

}  // namespace family

using KernelFamily = std::variant<family::EuclideanSq, family::CircularSq, family::SphereGeodesic,
                                  family::SphereGeodesicSq, family::DotAnalytic, family::IndicatorExample,
                                  family::NullExample>;

struct KernelSpec {
  KernelFamily family;
  Domain U;
  Domain V;

  /// Canonical CLI-facing name, e.g. "sphere-geo-sq:n=2"; non-default domains
  /// append lo/hi (or rate) so parse_kernel(name()) reproduces the spec.
  std::string name() const;
  /// Family and its parameters only.
  std::string family_name() const;
  /// Spherical families take chart coordinates in jets and S^n points in eval.
  bool is_spherical() const;
  bool is_analytic() const;
  /// Throws ValidationError if the declared domains break the family's requirements.
  void validate() const;
};

/// Spec with the family's canonical domains.
KernelSpec make_kernel(KernelFamily family);
/// Same family, caller-chosen domains; validated.
KernelSpec make_kernel(KernelFamily family, Domain U, Domain V);

/// Parses `family[:param=value,...]`, e.g. "euclidean-sq:n=2", "dot:exp-neg,n=1,lo=0,hi=1",
/// "null-example:lo=-2,hi=0". `lo`/`hi` override box domains (both U and V,
/// or U only for null-example). Throws ValidationError on unknown names or parameters.
KernelSpec parse_kernel(const std::string& text);

/// Checked evaluation. Throws DomainViolation if x is not in U or y is not in V.
double eval(const KernelSpec& spec, const Point& x, const Point& y);

/// Family formula without domain checks, at precision T (double or Extended).
template <class T>
T eval_as(const KernelSpec& spec, const VecT<T>& x, const VecT<T>& y);

extern template double eval_as<double>(const KernelSpec&, const VecT<double>&, const VecT<double>&);
extern template Extended eval_as<Extended>(const KernelSpec&, const VecT<Extended>&, const VecT<Extended>&);

/// Unique s >= 0 with s/(s+1) <= x < (s+1)/(s+2). Throws DomainViolation unless 0 < x < 1.
std::int64_t cell_index(double x);

/// Truncated series form of the null-example kernel. Stops once the next term
/// falls below 1e-15 relative to the partial sum; NonConvergent past `cap` terms.
double null_example_series(double x, double y, int cap = 500);

/// sum_{s>=1} u^s / (s s!) = Ei(u) - log|u| - Euler gamma.
double exp_integral_tail(double u);

struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::vector<Point> xs;
  std::vector<Point> ys;
};

KernelMatrix kernel_matrix(const KernelSpec& spec, const std::vector<Point>& xs, const std::vector<Point>& ys);

/// Entries evaluated at Extended precision from the (double) sample points.
MatT<Extended> kernel_matrix_extended(const KernelSpec& spec, const std::vector<Point>& xs,
                                      const std::vector<Point>& ys);

}  // namespace kernrank
