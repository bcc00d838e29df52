#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kernrank/random.hpp"

namespace kernrank {

/// A sample location in ambient coordinates.
using Point = Eigen::VectorXd;

struct OpenBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct OpenBall {
  Eigen::VectorXd center;
  double radius = 1.0;
};

/// The unit n-sphere in R^{n+1}.
struct UnitSphere {
  int n = 2;
};

/// Geodesic cap {p on S^n : angle(p, center) < angle}; subsets of spheres.
struct SphereCap {
  Eigen::VectorXd center;
  double angle = 0.1;
};

/// (a, inf), sampled as a + Exp(rate).
struct HalfLine {
  double a = 0.0;
  double rate = 1.0;
};

class Domain {
 public:
  using Kind = std::variant<OpenBox, OpenBall, UnitSphere, SphereCap, HalfLine>;

  static Domain box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static Domain interval(double lo, double hi);
  static Domain cube(int n, double lo, double hi);
  static Domain ball(Eigen::VectorXd center, double radius);
  static Domain sphere(int n);
  static Domain cap(Eigen::VectorXd center, double angle);
  static Domain half_line(double a, double rate = 1.0);

  const Kind& kind() const noexcept { return kind_; }
  template <class T>
  const T* as() const noexcept { return std::get_if<T>(&kind_); }

  /// Intrinsic dimension (n for S^n, 1 for half lines).
  int dim() const;
  /// Length of member points.
  int ambient_dim() const;
  /// Strict interior membership; sphere membership within 1e-12 of unit norm.
  bool contains(const Point& p) const;
  std::string describe() const;

 private:
  explicit Domain(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Disjoint open boxes covering a box domain, with center representatives.
struct Partition {
  std::vector<Domain> cells;
  std::vector<Point> reps;
  std::vector<double> volumes;

  std::size_t size() const noexcept { return cells.size(); }
};

/// Uniform on boxes and balls, uniform on spheres and caps, a + Exp(rate)
/// on half lines. The result lies strictly inside the open domain.
Point sample_point(const Domain& domain, Stream& rng);

/// Samples from `subset` after checking subset is contained in `domain`.
/// Throws SubsetNotContained when the containment check fails.
Point sample_in_subset(const Domain& domain, const Domain& subset, Stream& rng);

/// Closure containment of `inner` in `outer` for the supported pairs
/// (box/box, box/ball, ball/box, ball/ball, cap/sphere, cap/cap, box/half line).
bool is_subset(const Domain& inner, const Domain& outer);

/// k cells per axis, row-major with the first axis varying slowest.
Partition uniform_partition(const Domain& box, int k);

/// (x_1, ..., x_n) -> (x_1, ..., x_n, sqrt(1 - |x|^2)). Throws OutOfChart if |x| >= 1.
Point hemisphere_embed(const Point& x);

}  // namespace kernrank
