#include "kernrank/kernels.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/expm1.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "kernrank/errors.hpp"

namespace kernrank {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kArccosSlack = 1e-9;

template <class T>
T series_tolerance() {
  if constexpr (std::is_same_v<T, double>) {
    return 1e-15;
  } else {
    return std::numeric_limits<T>::epsilon();
  }
}

/// x^s/s! (y/(2s) - 1) y^{2s-1}, summed from s = 1 with adaptive truncation.
template <class T>
T null_series_sum(const T& x, const T& y, int cap, const T& tol) {
  using std::abs;
  const T u = x * y * y;
  T a = x * y;  // x^s y^{2s-1} / s! at s = 1
  T sum = T(1);
  for (int s = 1;; ++s) {
    if (s > cap) throw NonConvergent("null-example series exceeded the term cap of " + std::to_string(cap));
    sum += a * (y / T(2 * s) - T(1));
    const T next = a * u / T(s + 1);
    const T bound = abs(next) * (y / T(2 * (s + 1)) + T(1));
    if (T(s + 1) > abs(u) && bound <= tol * abs(sum)) return sum;
    a = next;
  }
}

/// sum_{s>=1} u^s / (s s!) = Ei(u) - log|u| - gamma.
template <class T>
T exp_integral_tail_t(const T& u) {
  using std::abs;
  using std::log;
  if (abs(u) <= T(1)) {
    T term = u;
    T sum = u;
    for (int s = 2; s < 1000; ++s) {
      term *= u / T(s);
      const T add = term / T(s);
      sum += add;
      if (abs(add) <= std::numeric_limits<T>::epsilon() * abs(sum)) break;
    }
    return sum;
  }
  if constexpr (!std::is_same_v<T, double>) {
    // The multiprecision E1 is slow; the alternating series with 40 guard digits
    // absorbs the e^{|u|} cancellation for moderate |u|.
    if (u < T(-1) && u > T(-90)) {
      using Wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<140>,
                                                 boost::multiprecision::et_off>;
      const Wide w(u);
      Wide term = w, sum = w;
      for (int s = 2; s < 2000; ++s) {
        term *= w / s;
        const Wide add = term / s;
        sum += add;
        if (abs(add) <= std::numeric_limits<Wide>::epsilon() * abs(sum) && s > -2 * w) break;
      }
      return static_cast<T>(sum);
    }
  }
  return boost::math::expint(u) - log(abs(u)) - boost::math::constants::euler<T>();
}

template <class T>
T null_eval(const T& x, const T& y) {
  using std::abs;
  const T u = x * y * y;
  if (u == T(0)) return T(1);
  if (abs(u) <= T(1)) return null_series_sum<T>(x, y, 500, series_tolerance<T>());
  // Past the exponent range -e^u / y dominates.
  using std::log;
  if (u > log(std::numeric_limits<T>::max()) - T(2)) return -std::numeric_limits<T>::infinity();
  return T(1) + exp_integral_tail_t(u) / T(2) - boost::math::expm1(u) / y;
}

template <class T>
T checked_acos(const T& z) {
  using std::acos;
  if (z > T(1 + kArccosSlack) || z < T(-1 - kArccosSlack))
    throw DomainViolation("arccos argument outside [-1, 1] beyond tolerance");
  if (z > T(1)) return T(0);
  if (z < T(-1)) return acos(T(-1));
  return acos(z);
}

template <class T>
T monomial_over_factorial(const T& y, std::int64_t s) {
  using std::exp;
  using std::log;
  using std::pow;
  if (s == 0) return T(1);
  if (s <= 20) {
    T fact = T(1);
    for (std::int64_t i = 2; i <= s; ++i) fact *= T(static_cast<double>(i));
    return pow(y, static_cast<int>(s)) / fact;
  }
  const T sd = T(static_cast<double>(s));
  return exp(sd * log(y) - boost::math::lgamma(sd + T(1)));
}

double sup_abs_dot(const Domain& a, const Domain& b) {
  auto bound = [](const Domain& d) -> Eigen::VectorXd {
    if (const auto* box = d.as<OpenBox>()) return box->lo.cwiseAbs().cwiseMax(box->hi.cwiseAbs());
    return {};
  };
  auto radius = [](const Domain& d) -> double {
    if (const auto* ball = d.as<OpenBall>()) return ball->center.norm() + ball->radius;
    if (d.as<UnitSphere>() || d.as<SphereCap>()) return 1.0;
    return std::numeric_limits<double>::infinity();
  };
  const Eigen::VectorXd ba = bound(a), bb = bound(b);
  if (ba.size() && bb.size()) return ba.cwiseProduct(bb).sum();
  const double ra = ba.size() ? ba.norm() : radius(a);
  const double rb = bb.size() ? bb.norm() : radius(b);
  return ra * rb;
}

bool is_sphere_domain(const Domain& d, int n) {
  if (const auto* s = d.as<UnitSphere>()) return s->n == n;
  if (const auto* c = d.as<SphereCap>()) return c->center.size() == n + 1;
  return false;
}

bool is_unit_interval_subset(const Domain& d) {
  const auto* b = d.as<OpenBox>();
  return b && b->lo.size() == 1 && b->lo[0] >= 0.0 && b->hi[0] <= 1.0;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool same_box(const Domain& a, const Domain& b) {
  const auto* x = a.as<OpenBox>();
  const auto* y = b.as<OpenBox>();
  return x && y && x->lo == y->lo && x->hi == y->hi;
}

}  // namespace

std::string KernelSpec::name() const {
  std::string base = family_name();
  const KernelSpec def = make_kernel(family);
  if (const auto* b = U.as<OpenBox>(); b && !same_box(U, def.U)) {
    const bool cube = (b->lo.array() == b->lo[0]).all() && (b->hi.array() == b->hi[0]).all();
    base += cube ? ",lo=" + shortest(b->lo[0]) + ",hi=" + shortest(b->hi[0]) : ",U=" + U.describe();
  }
  if (const auto* h = V.as<HalfLine>(); h && h->rate != 1.0) base += ",rate=" + shortest(h->rate);
  if (base.find(':') == std::string::npos) {
    const auto comma = base.find(',');
    if (comma != std::string::npos) base[comma] = ':';
  }
  return base;
}

std::string KernelSpec::family_name() const {
  return std::visit(overloaded{
                        [](const family::EuclideanSq& f) { return "euclidean-sq:n=" + std::to_string(f.n); },
                        [](const family::CircularSq&) { return std::string("circular-sq"); },
                        [](const family::SphereGeodesic& f) { return "sphere-geo:n=" + std::to_string(f.n); },
                        [](const family::SphereGeodesicSq& f) { return "sphere-geo-sq:n=" + std::to_string(f.n); },
                        [](const family::DotAnalytic& f) {
                          const char* h = f.h == family::DotFn::exp_neg ? "exp-neg"
                                          : f.h == family::DotFn::cos  ? "cos"
                                                                       : "arccos";
                          return std::string("dot:") + h + ",n=" + std::to_string(f.n);
                        },
                        [](const family::IndicatorExample&) { return std::string("indicator"); },
                        [](const family::NullExample&) { return std::string("null-example"); },
                    },
                    family);
}

bool KernelSpec::is_spherical() const {
  return std::holds_alternative<family::SphereGeodesic>(family) ||
         std::holds_alternative<family::SphereGeodesicSq>(family);
}

bool KernelSpec::is_analytic() const { return !std::holds_alternative<family::IndicatorExample>(family); }

void KernelSpec::validate() const {
  auto fail = [&](const std::string& why) { throw ValidationError(name() + ": " + why); };
  std::visit(overloaded{
                 [&](const family::EuclideanSq& f) {
                   if (f.n < 1) fail("n must be >= 1");
                   if (U.ambient_dim() != f.n || V.ambient_dim() != f.n) fail("domains must live in R^n");
                 },
                 [&](const family::CircularSq&) {
                   if (U.ambient_dim() != 1 || V.ambient_dim() != 1) fail("domains must be one-dimensional");
                 },
                 [&](const family::SphereGeodesic& f) {
                   if (f.n < 1) fail("n must be >= 1");
                   if (!is_sphere_domain(U, f.n) || !is_sphere_domain(V, f.n)) fail("domains must be S^n or caps of it");
                 },
                 [&](const family::SphereGeodesicSq& f) {
                   if (f.n < 1) fail("n must be >= 1");
                   if (!is_sphere_domain(U, f.n) || !is_sphere_domain(V, f.n)) fail("domains must be S^n or caps of it");
                 },
                 [&](const family::DotAnalytic& f) {
                   if (f.n < 1) fail("n must be >= 1");
                   if (U.ambient_dim() != f.n || V.ambient_dim() != f.n) fail("domains must live in R^n");
                   if (f.h == family::DotFn::arccos && sup_abs_dot(U, V) > 1.0)
                     fail("arccos requires |x.y| <= 1 on the declared domains");
                 },
                 [&](const family::IndicatorExample&) {
                   if (!is_unit_interval_subset(U) || !is_unit_interval_subset(V)) fail("U and V must be intervals in (0,1)");
                 },
                 [&](const family::NullExample&) {
                   const auto* b = U.as<OpenBox>();
                   const auto* h = V.as<HalfLine>();
                   if (!b || b->lo.size() != 1) fail("U must be a bounded interval");
                   if (!h || h->a < 0.0) fail("V must be a half line (a, inf) with a >= 0");
                 },
             },
             family);
}

KernelSpec make_kernel(KernelFamily fam) {
  const Domain unit = Domain::interval(0.0, 1.0);
  auto spec = std::visit(
      overloaded{
          [&](const family::EuclideanSq& f) {
            return KernelSpec{fam, Domain::cube(std::max(f.n, 1), 0.0, 1.0), Domain::cube(std::max(f.n, 1), 0.0, 1.0)};
          },
          [&](const family::CircularSq&) {
            return KernelSpec{fam, Domain::interval(0.0, 2 * std::numbers::pi), Domain::interval(0.0, 2 * std::numbers::pi)};
          },
          [&](const family::SphereGeodesic& f) { return KernelSpec{fam, Domain::sphere(f.n), Domain::sphere(f.n)}; },
          [&](const family::SphereGeodesicSq& f) { return KernelSpec{fam, Domain::sphere(f.n), Domain::sphere(f.n)}; },
          [&](const family::DotAnalytic& f) {
            const int n = std::max(f.n, 1);
            const double half = f.h == family::DotFn::arccos ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
            return KernelSpec{fam, Domain::cube(n, -half, half), Domain::cube(n, -half, half)};
          },
          [&](const family::IndicatorExample&) { return KernelSpec{fam, unit, unit}; },
          [&](const family::NullExample&) { return KernelSpec{fam, Domain::interval(-2.0, 2.0), Domain::half_line(0.0, 1.0)}; },
      },
      fam);
  spec.validate();
  return spec;
}

KernelSpec make_kernel(KernelFamily fam, Domain U, Domain V) {
  KernelSpec spec{std::move(fam), std::move(U), std::move(V)};
  spec.validate();
  return spec;
}

KernelSpec parse_kernel(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  std::vector<std::string> tokens;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) tokens.push_back(tok);
    }
  }
  std::map<std::string, std::string> params;
  std::vector<std::string> flags;
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      flags.push_back(tok);
    } else {
      params[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  auto take_num = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it->second.size()) throw ValidationError("kernel parameter " + key + " is not a number: " + it->second);
    params.erase(it);
    return v;
  };
  auto take_int = [&](const std::string& key, int fallback) {
    const double v = take_num(key, fallback);
    if (v != std::floor(v) || v < 1 || v > 64) throw ValidationError("kernel parameter " + key + " must be an integer in [1, 64]");
    return static_cast<int>(v);
  };

  KernelFamily fam;
  if (head == "euclidean-sq") {
    fam = family::EuclideanSq{take_int("n", 1)};
  } else if (head == "circular-sq") {
    fam = family::CircularSq{};
  } else if (head == "sphere-geo") {
    fam = family::SphereGeodesic{take_int("n", 2)};
  } else if (head == "sphere-geo-sq") {
    fam = family::SphereGeodesicSq{take_int("n", 2)};
  } else if (head == "dot") {
    if (flags.size() != 1) throw ValidationError("dot kernel needs exactly one of exp-neg, cos, arccos");
    family::DotAnalytic d;
    if (flags[0] == "exp-neg") {
      d.h = family::DotFn::exp_neg;
    } else if (flags[0] == "cos") {
      d.h = family::DotFn::cos;
    } else if (flags[0] == "arccos") {
      d.h = family::DotFn::arccos;
    } else {
      throw ValidationError("unknown dot function: " + flags[0]);
    }
    flags.clear();
    d.n = take_int("n", 3);
    fam = d;
  } else if (head == "indicator") {
    fam = family::IndicatorExample{};
  } else if (head == "null-example") {
    fam = family::NullExample{};
  } else {
    throw ValidationError("unknown kernel family: '" + head + "'");
  }
  if (!flags.empty()) throw ValidationError("unexpected kernel flag: " + flags.front());

  KernelSpec spec = make_kernel(fam);
  const bool has_lo = params.count("lo") > 0, has_hi = params.count("hi") > 0;
  if (has_lo || has_hi) {
    const auto* b = spec.U.as<OpenBox>();
    if (!b) throw ValidationError("lo/hi only apply to box domains");
    const double lo = take_num("lo", b->lo[0]);
    const double hi = take_num("hi", b->hi[0]);
    const int n = static_cast<int>(b->lo.size());
    Domain box = Domain::cube(n, lo, hi);
    spec = std::holds_alternative<family::NullExample>(fam) ? make_kernel(fam, box, spec.V) : make_kernel(fam, box, box);
  }
  if (params.count("rate")) {
    if (!std::holds_alternative<family::NullExample>(fam)) throw ValidationError("rate only applies to null-example");
    spec = make_kernel(fam, spec.U, Domain::half_line(0.0, take_num("rate", 1.0)));
  }
  if (!params.empty()) throw ValidationError("unknown kernel parameter: " + params.begin()->first);
  return spec;
}

template <class T>
T eval_as(const KernelSpec& spec, const VecT<T>& x, const VecT<T>& y) {
  using std::cos;
  using std::exp;
  using std::sqrt;
  return std::visit(
      overloaded{
          [&](const family::EuclideanSq&) -> T { return (x - y).squaredNorm(); },
          [&](const family::CircularSq&) -> T {
            const T d = x[0] - y[0];
            return d * d;
          },
          [&](const family::SphereGeodesic&) -> T { return checked_acos<T>(x.dot(y) / (x.norm() * y.norm())); },
          [&](const family::SphereGeodesicSq&) -> T {
            const T g = checked_acos<T>(x.dot(y) / (x.norm() * y.norm()));
            return g * g;
          },
          [&](const family::DotAnalytic& f) -> T {
            const T t = x.dot(y);
            switch (f.h) {
              case family::DotFn::exp_neg:
                return exp(-t);
              case family::DotFn::cos:
                return cos(t);
              case family::DotFn::arccos:
                return checked_acos<T>(t);
            }
            return T(0);
          },
          [&](const family::IndicatorExample&) -> T {
            return monomial_over_factorial<T>(y[0], cell_index(static_cast<double>(x[0])));
          },
          [&](const family::NullExample&) -> T { return null_eval<T>(x[0], y[0]); },
      },
      spec.family);
}

template double eval_as<double>(const KernelSpec&, const VecT<double>&, const VecT<double>&);
template Extended eval_as<Extended>(const KernelSpec&, const VecT<Extended>&, const VecT<Extended>&);

double eval(const KernelSpec& spec, const Point& x, const Point& y) {
  if (!spec.U.contains(x)) throw DomainViolation(spec.name() + ": x outside " + spec.U.describe());
  if (!spec.V.contains(y)) throw DomainViolation(spec.name() + ": y outside " + spec.V.describe());
  return eval_as<double>(spec, x, y);
}

std::int64_t cell_index(double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainViolation("cell_index requires 0 < x < 1, got " + fmt_double(x));
  auto s = static_cast<std::int64_t>(std::ceil(x / (1.0 - x))) - 1;
  if (s < 0) s = 0;
  auto lower = [](std::int64_t k) { return static_cast<double>(k) / static_cast<double>(k + 1); };
  while (s > 0 && lower(s) > x) --s;
  while (x >= lower(s + 1)) ++s;
  return s;
}

double null_example_series(double x, double y, int cap) {
  if (!(y > 0.0)) throw DomainViolation("null-example requires y > 0");
  if (x == 0.0) return 1.0;
  return null_series_sum<double>(x, y, cap, 1e-15);
}

double exp_integral_tail(double u) { return exp_integral_tail_t<double>(u); }

KernelMatrix kernel_matrix(const KernelSpec& spec, const std::vector<Point>& xs, const std::vector<Point>& ys) {
  KernelMatrix km{Eigen::MatrixXd(xs.size(), ys.size()), xs, ys};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) km.entries(i, j) = eval(spec, xs[i], ys[j]);
  }
  return km;
}

MatT<Extended> kernel_matrix_extended(const KernelSpec& spec, const std::vector<Point>& xs,
                                      const std::vector<Point>& ys) {
  std::vector<VecT<Extended>> xe, ye;
  for (const auto& x : xs) {
    if (!spec.U.contains(x)) throw DomainViolation(spec.name() + ": x outside " + spec.U.describe());
    xe.push_back(x.cast<Extended>());
  }
  for (const auto& y : ys) {
    if (!spec.V.contains(y)) throw DomainViolation(spec.name() + ": y outside " + spec.V.describe());
    ye.push_back(y.cast<Extended>());
  }
  MatT<Extended> m(xs.size(), ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) m(i, j) = eval_as<Extended>(spec, xe[i], ye[j]);
  }
  return m;
}

}  // namespace kernrank
