#include "kernrank/series.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kernrank/errors.hpp"

namespace kernrank {

namespace {

constexpr double kAcosEdge = 1e-9;

TaylorJet truncated(const TaylorJet& a, int order) {
  std::vector<double> c(a.coeffs().begin(), a.coeffs().begin() + order + 1);
  return TaylorJet(std::move(c));
}

void require_same_order(const TaylorJet& a, const TaylorJet& b) {
  if (a.order() != b.order()) throw ValidationError("jet orders differ");
}

template <class T>
VecT<T> embed_t(const VecT<T>& x) {
  using std::sqrt;
  VecT<T> p(x.size() + 1);
  p.head(x.size()) = x;
  p[x.size()] = sqrt(T(1) - x.squaredNorm());
  return p;
}

Extended slice_value_ext(const KernelSpec& spec, const SliceSpec& slice, const Extended& t) {
  const VecT<Extended> x = slice.x.cast<Extended>();
  const VecT<Extended> y = slice.p.cast<Extended>() + t * slice.dir.cast<Extended>();
  if (spec.is_spherical()) return eval_as<Extended>(spec, embed_t(x), embed_t(y));
  return eval_as<Extended>(spec, x, y);
}

/// m-th central difference quotient at t = 0 with step h (nodes at (m/2 - j) h).
Extended central_difference(const KernelSpec& spec, const SliceSpec& slice, int m, const Extended& h) {
  Extended acc = 0;
  Extended binom = 1;
  for (int j = 0; j <= m; ++j) {
    const Extended t = (Extended(m) / 2 - j) * h;
    const Extended term = binom * slice_value_ext(spec, slice, t);
    acc += (j % 2 == 0) ? term : Extended(-term);
    binom = binom * (m - j) / (j + 1);
  }
  Extended hm = 1;
  for (int i = 0; i < m; ++i) hm *= h;
  return acc / hm;
}

}  // namespace

TaylorJet::TaylorJet(int order, double constant) : c_(static_cast<std::size_t>(std::max(order, 0)) + 1, 0.0) {
  if (order < 0) throw ValidationError("jet order must be >= 0");
  c_[0] = constant;
}

TaylorJet::TaylorJet(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) throw ValidationError("jet needs at least one coefficient");
}

TaylorJet TaylorJet::linear(int order, double c0, double c1) {
  TaylorJet j(order, c0);
  if (order >= 1) j[1] = c1;
  return j;
}

double TaylorJet::evaluate(double t) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

TaylorJet& TaylorJet::operator+=(const TaylorJet& o) {
  require_same_order(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

TaylorJet& TaylorJet::operator-=(const TaylorJet& o) {
  require_same_order(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

TaylorJet& TaylorJet::operator*=(double k) {
  for (auto& v : c_) v *= k;
  return *this;
}

TaylorJet& TaylorJet::operator+=(double k) {
  c_[0] += k;
  return *this;
}

TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
  require_same_order(a, b);
  const int m = a.order();
  TaylorJet r(m);
  for (int n = 0; n <= m; ++n) {
    double s = 0.0;
    for (int i = 0; i <= n; ++i) s += a[i] * b[n - i];
    r[n] = s;
  }
  return r;
}

TaylorJet operator/(const TaylorJet& a, const TaylorJet& b) { return a * reciprocal(b); }

TaylorJet TaylorJet::derivative() const {
  if (order() == 0) return TaylorJet(0, 0.0);
  std::vector<double> d(c_.size() - 1);
  for (std::size_t s = 1; s < c_.size(); ++s) d[s - 1] = static_cast<double>(s) * c_[s];
  return TaylorJet(std::move(d));
}

TaylorJet TaylorJet::integral(double constant) const {
  std::vector<double> r(c_.size() + 1);
  r[0] = constant;
  for (std::size_t s = 0; s < c_.size(); ++s) r[s + 1] = c_[s] / static_cast<double>(s + 1);
  return TaylorJet(std::move(r));
}

TaylorJet reciprocal(const TaylorJet& a) {
  if (a[0] == 0.0) throw SingularExpansion("reciprocal of a jet with zero constant term");
  const int m = a.order();
  TaylorJet b(m, 1.0 / a[0]);
  for (int n = 1; n <= m; ++n) {
    double s = 0.0;
    for (int j = 1; j <= n; ++j) s += a[j] * b[n - j];
    b[n] = -s / a[0];
  }
  return b;
}

TaylorJet sqrt(const TaylorJet& a) {
  if (!(a[0] > 0.0)) throw SingularExpansion("square root of a jet with non-positive constant term");
  const int m = a.order();
  TaylorJet b(m, std::sqrt(a[0]));
  for (int n = 1; n <= m; ++n) {
    double s = a[n];
    for (int j = 1; j < n; ++j) s -= b[j] * b[n - j];
    b[n] = s / (2.0 * b[0]);
  }
  return b;
}

TaylorJet exp(const TaylorJet& a) {
  const int m = a.order();
  TaylorJet b(m, std::exp(a[0]));
  for (int n = 1; n <= m; ++n) {
    double s = 0.0;
    for (int j = 1; j <= n; ++j) s += j * a[j] * b[n - j];
    b[n] = s / n;
  }
  return b;
}

TaylorJet expm1(const TaylorJet& a) {
  TaylorJet b = exp(a);
  b[0] = std::expm1(a[0]);
  return b;
}

std::pair<TaylorJet, TaylorJet> sincos(const TaylorJet& a) {
  const int m = a.order();
  TaylorJet s(m, std::sin(a[0]));
  TaylorJet c(m, std::cos(a[0]));
  for (int n = 1; n <= m; ++n) {
    double ds = 0.0, dc = 0.0;
    for (int j = 1; j <= n; ++j) {
      ds += j * a[j] * c[n - j];
      dc -= j * a[j] * s[n - j];
    }
    s[n] = ds / n;
    c[n] = dc / n;
  }
  return {s, c};
}

TaylorJet cos(const TaylorJet& a) { return sincos(a).second; }

TaylorJet acos(const TaylorJet& z) {
  const double z0 = z[0];
  if (!(std::abs(z0) < 1.0 - kAcosEdge))
    throw SingularExpansion("arccos expansion at |z0| >= 1 - 1e-9 (coincident or antipodal points)");
  const int m = z.order();
  if (m == 0) return TaylorJet(0, std::acos(z0));
  const TaylorJet zl = truncated(z, m - 1);
  const TaylorJet slope = -(z.derivative() * reciprocal(sqrt(1.0 + (-(zl * zl)))));
  return slope.integral(std::acos(z0));
}

void validate_slice(const KernelSpec& spec, const SliceSpec& slice) {
  if (slice.order < 0) throw ValidationError("slice order must be >= 0");
  if (!(slice.radius > 0.0)) throw ValidationError("slice radius must be > 0");
  if (std::abs(slice.dir.norm() - 1.0) > 1e-12) throw ValidationError("slice direction must have unit norm");
  if (slice.p.size() != slice.dir.size()) throw ValidationError("slice center and direction lengths differ");
  const Point a = slice.p + slice.radius * slice.dir;
  const Point b = slice.p - slice.radius * slice.dir;
  if (spec.is_spherical()) {
    const int n = spec.V.dim();
    if (slice.x.size() != n || slice.p.size() != n)
      throw ValidationError("spherical slices use chart coordinates in R^" + std::to_string(n));
    if (!(slice.x.norm() < 1.0)) throw OutOfChart("slice x outside the hemisphere chart");
    if (!(a.norm() < 1.0 && b.norm() < 1.0)) throw ValidationError("slice segment leaves the hemisphere chart");
    return;
  }
  if (!spec.U.contains(slice.x)) throw DomainViolation("slice x outside " + spec.U.describe());
  if (!spec.V.contains(slice.p) || !spec.V.contains(a) || !spec.V.contains(b))
    throw ValidationError("slice segment of radius " + std::to_string(slice.radius) + " leaves " + spec.V.describe());
}

TaylorJet jet_propagate(const KernelSpec& spec, const SliceSpec& slice) {
  if (!spec.is_analytic()) throw NotAnalytic(spec.name() + " has no Taylor expansion in y");
  validate_slice(spec, slice);
  const int m = slice.order;
  const auto coord = [&](Eigen::Index i) { return TaylorJet::linear(m, slice.p[i], slice.dir[i]); };

  if (std::holds_alternative<family::EuclideanSq>(spec.family) ||
      std::holds_alternative<family::CircularSq>(spec.family)) {
    TaylorJet acc(m);
    for (Eigen::Index i = 0; i < slice.p.size(); ++i) {
      const TaylorJet d = slice.x[i] + (-coord(i));
      acc += d * d;
    }
    return acc;
  }

  if (spec.is_spherical()) {
    const auto n = slice.p.size();
    const Point xh = hemisphere_embed(slice.x);
    TaylorJet sq(m);
    TaylorJet z(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const TaylorJet q = coord(i);
      sq += q * q;
      z += xh[i] * q;
    }
    z += xh[n] * sqrt(1.0 + (-sq));
    const TaylorJet w = acos(z);
    return std::holds_alternative<family::SphereGeodesicSq>(spec.family) ? w * w : w;
  }

  if (const auto* dot = std::get_if<family::DotAnalytic>(&spec.family)) {
    TaylorJet inner(m);
    for (Eigen::Index i = 0; i < slice.p.size(); ++i) inner += slice.x[i] * coord(i);
    switch (dot->h) {
      case family::DotFn::exp_neg:
        return exp(-inner);
      case family::DotFn::cos:
        return cos(inner);
      case family::DotFn::arccos:
        return acos(inner);
    }
  }

  // null example: 1 + S(u)/2 - expm1(u)/y with u = x y^2 and S' = expm1(u)/u.
  const double x = slice.x[0];
  if (x == 0.0) return TaylorJet(m, 1.0);
  const TaylorJet y = coord(0);
  const TaylorJet u = x * (y * y);
  TaylorJet tail(m, exp_integral_tail(u[0]));
  if (m > 0) {
    const TaylorJet ul = truncated(u, m - 1);
    tail = (expm1(ul) / ul * u.derivative()).integral(exp_integral_tail(u[0]));
  }
  return 1.0 + 0.5 * tail + (-(expm1(u) / y));
}

double slice_value(const KernelSpec& spec, const SliceSpec& slice, double t) {
  return static_cast<double>(slice_value_ext(spec, slice, Extended(t)));
}

FiniteDiffReport finite_diff_check(const KernelSpec& spec, const SliceSpec& slice, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be > 0");
  const TaylorJet jet = jet_propagate(spec, slice);
  const int top = std::min(slice.order, 6);
  const Extended step = Extended(h) * Extended(slice.radius);
  FiniteDiffReport rep;
  Extended fact = 1;
  for (int m = 1; m <= top; ++m) {
    fact *= m;
    const Extended coarse = central_difference(spec, slice, m, step);
    const Extended fine = central_difference(spec, slice, m, step / 2);
    const double fd = static_cast<double>((4 * fine - coarse) / 3 / fact);
    const double rel = std::abs(jet[m] - fd) / std::max(std::abs(fd), 1e-8);
    rep.rows.push_back({m, jet[m], fd, rel});
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
  }
  return rep;
}

OddEvenReport odd_even_structure(const KernelSpec& spec, const Point& x, int order) {
  if (!spec.is_spherical()) throw ValidationError("odd/even structure applies to spherical kernels");
  const int n = spec.V.dim();
  SliceSpec slice{x, Point::Zero(n), Eigen::VectorXd::Unit(n, 0), order, 0.1};
  const TaylorJet jet = jet_propagate(spec, slice);
  OddEvenReport rep;
  rep.on_symmetry_slice = x[0] == 0.0;
  rep.coeffs = jet.coeffs();
  for (int s = 0; s <= order; ++s) {
    if (s % 2 == 0) {
      rep.even_coeffs.push_back(jet[s]);
    } else {
      rep.max_abs_odd = std::max(rep.max_abs_odd, std::abs(jet[s]));
    }
  }
  return rep;
}

PolyFit poly_fit_in_t(const std::vector<std::pair<double, double>>& samples, int degree) {
  if (degree < 0) throw ValidationError("degree must be >= 0");
  std::set<double> distinct;
  for (const auto& [t, v] : samples) distinct.insert(t);
  if (static_cast<int>(distinct.size()) < degree + 2)
    throw ValidationError("poly_fit_in_t needs at least degree + 2 distinct t values");

  // Fit in s = (t - mid) / half for conditioning, then expand back to powers of t.
  const double lo = *distinct.begin(), hi = *distinct.rbegin();
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd vander(rows, degree + 1);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double s = (samples[i].first - mid) / half;
    double pw = 1.0;
    for (int d = 0; d <= degree; ++d, pw *= s) vander(i, d) = pw;
    rhs[i] = samples[i].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
  qr.setThreshold(1e-13);
  if (qr.rank() < degree + 1) throw IllConditionedFit("Vandermonde system is numerically singular at degree " + std::to_string(degree));
  const Eigen::VectorXd cs = qr.solve(rhs);

  PolyFit fit;
  fit.max_residual = (vander * cs - rhs).cwiseAbs().maxCoeff();
  // sum_d cs[d] ((t - mid)/half)^d expanded with the binomial theorem.
  fit.coeffs.assign(degree + 1, 0.0);
  for (int d = 0; d <= degree; ++d) {
    const double scale = cs[d] / std::pow(half, d);
    double binom = 1.0;
    for (int j = 0; j <= d; ++j) {
      fit.coeffs[j] += scale * binom * std::pow(-mid, d - j);
      binom = binom * (d - j) / (j + 1);
    }
  }
  return fit;
}

}  // namespace kernrank
