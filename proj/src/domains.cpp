#include "kernrank/domains.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kernrank/errors.hpp"

namespace kernrank {

namespace {

constexpr double kSphereTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

std::string vec_str(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

Eigen::VectorXd random_unit(int len, Stream& rng) {
  Eigen::VectorXd v(len);
  for (;;) {
    for (int i = 0; i < len; ++i) v[i] = rng.normal();
    const double nrm = v.norm();
    if (nrm > 0.0) return v / nrm;
  }
}

}  // namespace

Domain Domain::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) throw ValidationError("box bounds must be nonempty and of equal length");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
      throw ValidationError("box requires finite lo < hi on every axis");
  }
  return Domain(OpenBox{std::move(lo), std::move(hi)});
}

Domain Domain::interval(double lo, double hi) {
  return box(Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
}

Domain Domain::cube(int n, double lo, double hi) {
  if (n < 1) throw ValidationError("cube dimension must be >= 1");
  return box(Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi));
}

Domain Domain::ball(Eigen::VectorXd center, double radius) {
  if (center.size() == 0 || !(radius > 0.0) || !std::isfinite(radius))
    throw ValidationError("ball requires a center and radius > 0");
  return Domain(OpenBall{std::move(center), radius});
}

Domain Domain::sphere(int n) {
  if (n < 1) throw ValidationError("unit sphere requires n >= 1");
  return Domain(UnitSphere{n});
}

Domain Domain::cap(Eigen::VectorXd center, double angle) {
  if (center.size() < 2) throw ValidationError("cap center must live in R^{n+1}, n >= 1");
  if (!(angle > 0.0) || angle > std::numbers::pi) throw ValidationError("cap angle must be in (0, pi]");
  const double nrm = center.norm();
  if (!(nrm > 0.0)) throw ValidationError("cap center must be nonzero");
  return Domain(SphereCap{center / nrm, angle});
}

Domain Domain::half_line(double a, double rate) {
  if (!std::isfinite(a) || !(rate > 0.0)) throw ValidationError("half line requires finite a and rate > 0");
  return Domain(HalfLine{a, rate});
}

int Domain::dim() const {
  return std::visit(overloaded{
                        [](const OpenBox& b) { return static_cast<int>(b.lo.size()); },
                        [](const OpenBall& b) { return static_cast<int>(b.center.size()); },
                        [](const UnitSphere& s) { return s.n; },
                        [](const SphereCap& c) { return static_cast<int>(c.center.size()) - 1; },
                        [](const HalfLine&) { return 1; },
                    },
                    kind_);
}

int Domain::ambient_dim() const {
  if (const auto* s = as<UnitSphere>()) return s->n + 1;
  if (const auto* c = as<SphereCap>()) return static_cast<int>(c->center.size());
  return dim();
}

bool Domain::contains(const Point& p) const {
  if (p.size() != ambient_dim() || !p.allFinite()) return false;
  return std::visit(overloaded{
                        [&](const OpenBox& b) { return ((p.array() > b.lo.array()) && (p.array() < b.hi.array())).all(); },
                        [&](const OpenBall& b) { return (p - b.center).norm() < b.radius; },
                        [&](const UnitSphere&) { return std::abs(p.norm() - 1.0) <= kSphereTol; },
                        [&](const SphereCap& c) {
                          return std::abs(p.norm() - 1.0) <= kSphereTol && angle_between(p, c.center) < c.angle;
                        },
                        [&](const HalfLine& h) { return p[0] > h.a; },
                    },
                    kind_);
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const OpenBox& b) { os << "open_box(" << vec_str(b.lo) << "," << vec_str(b.hi) << ")"; },
                 [&](const OpenBall& b) { os << "open_ball(" << vec_str(b.center) << "," << b.radius << ")"; },
                 [&](const UnitSphere& s) { os << "unit_sphere(" << s.n << ")"; },
                 [&](const SphereCap& c) { os << "cap(" << vec_str(c.center) << "," << c.angle << ")"; },
                 [&](const HalfLine& h) { os << "half_line(" << h.a << ",rate=" << h.rate << ")"; },
             },
             kind_);
  return os.str();
}

Point sample_point(const Domain& domain, Stream& rng) {
  for (;;) {
    Point p = std::visit(
        overloaded{
            [&](const OpenBox& b) -> Point {
              Point q(b.lo.size());
              for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = b.lo[i] + rng.uniform_open() * (b.hi[i] - b.lo[i]);
              return q;
            },
            [&](const OpenBall& b) -> Point {
              const int n = static_cast<int>(b.center.size());
              const double r = b.radius * std::pow(rng.uniform_open(), 1.0 / n);
              return b.center + r * random_unit(n, rng);
            },
            [&](const UnitSphere& s) -> Point { return random_unit(s.n + 1, rng); },
            [&](const SphereCap& c) -> Point {
              // Polar angle has density proportional to sin^{n-1}; rejection against its max on [0, angle].
              const int n = static_cast<int>(c.center.size()) - 1;
              const double smax = std::sin(std::min(c.angle, std::numbers::pi / 2));
              double theta = 0.0;
              for (;;) {
                theta = c.angle * rng.uniform_open();
                const double accept = n == 1 ? 1.0 : std::pow(std::sin(theta) / smax, n - 1);
                if (rng.uniform_open() < accept) break;
              }
              Eigen::VectorXd v;
              for (;;) {
                v = random_unit(n + 1, rng);
                v -= v.dot(c.center) * c.center;
                if (v.norm() > 1e-8) break;
              }
              v.normalize();
              Point q = std::cos(theta) * c.center + std::sin(theta) * v;
              return q / q.norm();
            },
            [&](const HalfLine& h) -> Point { return Point::Constant(1, h.a + rng.exponential(h.rate)); },
        },
        domain.kind());
    if (domain.contains(p)) return p;
  }
}

bool is_subset(const Domain& inner, const Domain& outer) {
  if (inner.ambient_dim() != outer.ambient_dim()) return false;
  if (const auto* ib = inner.as<OpenBox>()) {
    if (const auto* ob = outer.as<OpenBox>())
      return (ib->lo.array() >= ob->lo.array()).all() && (ib->hi.array() <= ob->hi.array()).all();
    if (const auto* ball = outer.as<OpenBall>()) {
      Eigen::VectorXd far(ib->lo.size());
      for (Eigen::Index i = 0; i < far.size(); ++i)
        far[i] = std::max(std::abs(ib->lo[i] - ball->center[i]), std::abs(ib->hi[i] - ball->center[i]));
      return far.norm() <= ball->radius;
    }
    if (const auto* hl = outer.as<HalfLine>()) return ib->lo[0] >= hl->a;
    return false;
  }
  if (const auto* ib = inner.as<OpenBall>()) {
    if (const auto* ob = outer.as<OpenBox>())
      return ((ib->center.array() - ib->radius) >= ob->lo.array()).all() &&
             ((ib->center.array() + ib->radius) <= ob->hi.array()).all();
    if (const auto* ball = outer.as<OpenBall>()) return (ib->center - ball->center).norm() + ib->radius <= ball->radius;
    return false;
  }
  if (inner.as<UnitSphere>()) return outer.as<UnitSphere>() != nullptr;
  if (const auto* ic = inner.as<SphereCap>()) {
    if (outer.as<UnitSphere>()) return true;
    if (const auto* oc = outer.as<SphereCap>()) return angle_between(ic->center, oc->center) + ic->angle <= oc->angle;
    return false;
  }
  if (const auto* ih = inner.as<HalfLine>()) {
    if (const auto* oh = outer.as<HalfLine>()) return ih->a >= oh->a;
    return false;
  }
  return false;
}

Point sample_in_subset(const Domain& domain, const Domain& subset, Stream& rng) {
  if (!is_subset(subset, domain))
    throw SubsetNotContained(subset.describe() + " is not contained in " + domain.describe());
  return sample_point(subset, rng);
}

Partition uniform_partition(const Domain& domain, int k) {
  const auto* b = domain.as<OpenBox>();
  if (!b) throw ValidationError("uniform_partition requires an open box, got " + domain.describe());
  if (k < 1) throw ValidationError("uniform_partition requires k >= 1");
  const int n = static_cast<int>(b->lo.size());
  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= k;
  if (total > 1e7) throw ValidationError("partition too large: k^n exceeds 1e7 cells");
  const auto count = static_cast<std::size_t>(total);

  const Eigen::VectorXd width = (b->hi - b->lo) / static_cast<double>(k);
  Partition part;
  part.cells.reserve(count);
  part.reps.reserve(count);
  part.volumes.reserve(count);
  std::vector<int> idx(n, 0);
  for (std::size_t c = 0; c < count; ++c) {
    Eigen::VectorXd lo(n), hi(n);
    double vol = 1.0;
    for (int a = 0; a < n; ++a) {
      lo[a] = b->lo[a] + width[a] * idx[a];
      hi[a] = idx[a] + 1 == k ? b->hi[a] : b->lo[a] + width[a] * (idx[a] + 1);
      vol *= hi[a] - lo[a];
    }
    part.reps.push_back(0.5 * (lo + hi));
    part.volumes.push_back(vol);
    part.cells.push_back(Domain::box(std::move(lo), std::move(hi)));
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < k) break;
      idx[a] = 0;
    }
  }
  return part;
}

Point hemisphere_embed(const Point& x) {
  const double sq = x.squaredNorm();
  if (!(sq < 1.0)) throw OutOfChart("hemisphere chart requires |x| < 1");
  Point p(x.size() + 1);
  p.head(x.size()) = x;
  p[x.size()] = std::sqrt(1.0 - sq);
  return p;
}

}  // namespace kernrank
