#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "kernrank/errors.hpp"
#include "kernrank/series.hpp"

using namespace kernrank;

namespace {

using cld = std::complex<long double>;

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// Taylor coefficients by the trapezoid rule on the Cauchy integral |t| = rho.
template <class F>
std::vector<double> cauchy_coeffs(F f, int order, long double rho, int nodes = 128) {
  std::vector<double> c(order + 1);
  for (int s = 0; s <= order; ++s) {
    cld acc = 0;
    for (int j = 0; j < nodes; ++j) {
      const cld w = std::polar(1.0L, 2 * std::numbers::pi_v<long double> * j / nodes);
      acc += f(rho * w) * std::pow(w, -s);
    }
    c[s] = static_cast<double>((acc / static_cast<long double>(nodes)).real() / std::pow(rho, s));
  }
  return c;
}

// Complexified slice t -> h(x_emb . q(p + t dir)) for spherical kernels in the chart.
cld sphere_dot(const Point& x, const Point& p, const Point& dir, cld t) {
  const Point xe = hemisphere_embed(x);
  cld dot = 0, r2 = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const cld c = static_cast<long double>(p[i]) + t * static_cast<long double>(dir[i]);
    dot += static_cast<long double>(xe[i]) * c;
    r2 += c * c;
  }
  return dot + static_cast<long double>(xe[p.size()]) * std::sqrt(1.0L - r2);
}

void check_coeffs(const std::vector<double>& got, const std::vector<double>& want, double rho, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t s = 0; s < got.size(); ++s) {
    INFO("order " << s);
    CHECK(std::abs(got[s] - want[s]) <= tol * std::pow(rho, -static_cast<double>(s)) * std::max(1.0, std::abs(want[0])));
  }
}

TaylorJet random_jet(Stream& rng, int order, double c0) {
  std::vector<double> c(order + 1);
  for (auto& v : c) v = 2 * rng.uniform_open() - 1;
  c[0] = c0;
  return TaylorJet(c);
}

}  // namespace

TEST_CASE("jet arithmetic against polynomial products") {
  const TaylorJet a({1.0, 2.0, 3.0});
  const TaylorJet b({4.0, 5.0, 6.0});
  const TaylorJet p = a * b;
  CHECK(p[0] == 4.0);
  CHECK(p[1] == 13.0);
  CHECK(p[2] == 28.0);
  CHECK((a + b)[2] == 9.0);
  CHECK((a - b)[1] == -3.0);
  CHECK((2.0 * a)[2] == 6.0);
  CHECK((a + 1.0)[0] == 2.0);
  CHECK(a.evaluate(0.5) == doctest::Approx(1 + 1 + 0.75));
  CHECK_THROWS_AS(a + TaylorJet(3, 1.0), ValidationError);
  CHECK_THROWS_AS(TaylorJet(-1), ValidationError);
}

TEST_CASE("jet identities hold over random jets") {
  Stream rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng.uniform_open() * 10);
    const TaylorJet a = random_jet(rng, m, 0.5 + rng.uniform_open());
    const TaylorJet b = random_jet(rng, m, 0.5 + rng.uniform_open());
    const TaylorJet one(m, 1.0);
    auto near = [&](const TaylorJet& x, const TaylorJet& y) {
      for (int s = 0; s <= m; ++s)
        if (std::abs(x[s] - y[s]) > 1e-9 * (1 + std::abs(y[s]))) return false;
      return true;
    };
    CHECK(near(a * reciprocal(a), one));
    CHECK(near((a / b) * b, a));
    CHECK(near(sqrt(a) * sqrt(a), a));
    CHECK(near(exp(a) * exp(-a), one));
    CHECK(near(expm1(a) + 1.0, exp(a)));
    const auto [s, c] = sincos(a);
    CHECK(near(s * s + c * c, one));
    CHECK(near(cos(a), c));
    CHECK(near(a * b, b * a));
    CHECK(near(a.derivative().integral(a[0]), a));
    // acos(cos(z)) = z for z(0) in (0, pi).
    const TaylorJet z = random_jet(rng, m, 0.3 + 2.5 * rng.uniform_open());
    CHECK(near(acos(cos(z)), z));
  }
}

TEST_CASE("jet functions against known series") {
  // exp(t) = sum t^s / s!
  const TaylorJet e = exp(TaylorJet::linear(8, 0.0, 1.0));
  double f = 1;
  for (int s = 0; s <= 8; ++s) {
    if (s > 0) f *= s;
    CHECK(e[s] == doctest::Approx(1.0 / f));
  }
  // 1 / (1 - t) = sum t^s
  const TaylorJet g = reciprocal(TaylorJet::linear(6, 1.0, -1.0));
  for (int s = 0; s <= 6; ++s) CHECK(g[s] == doctest::Approx(1.0));
  // acos(t) = pi/2 - t - t^3/6 - 3 t^5/40
  const TaylorJet w = acos(TaylorJet::linear(5, 0.0, 1.0));
  CHECK(w[0] == doctest::Approx(std::numbers::pi / 2));
  CHECK(w[1] == doctest::Approx(-1.0));
  CHECK(w[2] == doctest::Approx(0.0));
  CHECK(w[3] == doctest::Approx(-1.0 / 6));
  CHECK(w[5] == doctest::Approx(-3.0 / 40));
}

TEST_CASE("singular expansions are refused") {
  CHECK_THROWS_AS(reciprocal(TaylorJet::linear(3, 0.0, 1.0)), SingularExpansion);
  CHECK_THROWS_AS(sqrt(TaylorJet::linear(3, 0.0, 1.0)), SingularExpansion);
  CHECK_THROWS_AS(acos(TaylorJet::linear(3, 1.0, 1.0)), SingularExpansion);
  CHECK_THROWS_AS(acos(TaylorJet::linear(3, -1.0, 0.5)), SingularExpansion);
}

TEST_CASE("sphere jets match contour integrals") {
  Stream rng(55);
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      Point x(n), p(n), dir(n);
      for (int i = 0; i < n; ++i) {
        x[i] = (2 * rng.uniform_open() - 1) * 0.5;
        p[i] = (2 * rng.uniform_open() - 1) * 0.3;
        dir[i] = rng.normal();
      }
      dir.normalize();
      const double rho = 0.08;
      const int order = 7;
      const SliceSpec slice{x, p, dir, order, 0.1};
      const auto geo = cauchy_coeffs([&](cld t) { return std::acos(sphere_dot(x, p, dir, t)); }, order, rho);
      const auto sq = cauchy_coeffs(
          [&](cld t) {
            const cld a = std::acos(sphere_dot(x, p, dir, t));
            return a * a;
          },
          order, rho);
      INFO("n=" << n << " trial " << trial);
      check_coeffs(jet_propagate(make_kernel(family::SphereGeodesic{n}), slice).coeffs(), geo, rho, 1e-11);
      check_coeffs(jet_propagate(make_kernel(family::SphereGeodesicSq{n}), slice).coeffs(), sq, rho, 1e-11);
    }
  }
}

TEST_CASE("dot kernel jets match closed forms") {
  const Point x = pt({0.4, -0.2, 0.3}), p = pt({0.1, 0.2, -0.3});
  Point dir = pt({1, 2, 2}) / 3.0;
  const double a = x.dot(p), b = x.dot(dir);
  const SliceSpec slice{x, p, dir, 6, 0.1};
  const TaylorJet e = jet_propagate(parse_kernel("dot:exp-neg,n=3"), slice);
  const TaylorJet c = jet_propagate(parse_kernel("dot:cos,n=3"), slice);
  double fact = 1;
  for (int s = 0; s <= 6; ++s) {
    if (s > 0) fact *= s;
    CHECK(e[s] == doctest::Approx(std::exp(-a) * std::pow(-b, s) / fact));
    // d^s/dt^s cos(a + bt) = b^s cos(a + s pi/2)
    CHECK(c[s] == doctest::Approx(std::pow(b, s) * std::cos(a + s * std::numbers::pi / 2) / fact).epsilon(1e-9));
  }
  const TaylorJet q = jet_propagate(parse_kernel("euclidean-sq:n=3"), SliceSpec{pt({0.5, 0.5, 0.5}), pt({0.4, 0.5, 0.6}), dir, 4, 0.1});
  CHECK(q[0] == doctest::Approx(0.02));
  CHECK(q[1] == doctest::Approx(-2 * (pt({0.5, 0.5, 0.5}) - pt({0.4, 0.5, 0.6})).dot(dir)));
  CHECK(q[2] == doctest::Approx(1.0));
  CHECK(q[3] == 0.0);
}

TEST_CASE("first chart coefficient of the geodesic") {
  const TaylorJet j = jet_propagate(parse_kernel("sphere-geo:n=2"), SliceSpec{pt({0.3, 0.4}), pt({0, 0}), pt({1, 0}), 3, 0.1});
  CHECK(j[1] == doctest::Approx(-0.3 / 0.5));
}

TEST_CASE("slice validation") {
  const KernelSpec geo = parse_kernel("sphere-geo:n=2");
  CHECK_THROWS_AS(validate_slice(geo, SliceSpec{pt({0.1, 0.1}), pt({0, 0}), pt({1, 1}), 4, 0.1}), ValidationError);
  CHECK_THROWS_AS(validate_slice(geo, SliceSpec{pt({0.1, 0.1}), pt({0.95, 0}), pt({1, 0}), 4, 0.1}), ValidationError);
  CHECK_THROWS_AS(validate_slice(geo, SliceSpec{pt({1.1, 0}), pt({0, 0}), pt({1, 0}), 4, 0.1}), OutOfChart);
  CHECK_THROWS_AS(validate_slice(geo, SliceSpec{pt({0.1, 0, 0}), pt({0, 0}), pt({1, 0}), 4, 0.1}), ValidationError);
  CHECK_THROWS_AS(jet_propagate(parse_kernel("indicator"), SliceSpec{pt({0.3}), pt({0.5}), pt({1}), 4, 0.1}), NotAnalytic);
  CHECK_THROWS_AS(jet_propagate(geo, SliceSpec{pt({0.2, 0.1}), pt({0.2, 0.1}), pt({1, 0}), 4, 0.05}), SingularExpansion);
}

TEST_CASE("finite differences agree with the jets") {
  Stream rng(8);
  for (const char* name : {"sphere-geo:n=2", "sphere-geo-sq:n=2", "sphere-geo-sq:n=3"}) {
    const KernelSpec k = parse_kernel(name);
    const int n = k.U.dim();
    for (int trial = 0; trial < 5; ++trial) {
      Point x(n), dir = Point::Zero(n), p = Point::Zero(n);
      for (int i = 0; i < n; ++i) x[i] = (2 * rng.uniform_open() - 1) * 0.4;
      dir[0] = 1;
      const FiniteDiffReport r = finite_diff_check(k, SliceSpec{x, p, dir, 6, 0.1});
      CHECK(r.rows.size() == 6);
      CHECK(r.max_rel_err < 1e-6);
    }
  }
}

TEST_CASE("slice values agree with direct evaluation") {
  const KernelSpec k = parse_kernel("sphere-geo:n=2");
  const SliceSpec s{pt({0.3, 0.4}), pt({0.1, -0.1}), pt({0.6, 0.8}), 4, 0.2};
  for (double t : {-0.15, 0.0, 0.1}) {
    const Point q = hemisphere_embed(s.p + t * s.dir);
    CHECK(slice_value(k, s, t) == doctest::Approx(eval(k, hemisphere_embed(s.x), q)));
  }
}

TEST_CASE("odd coefficients vanish on the symmetry slice") {
  for (double x2 : {0.2, 0.5, 0.8}) {
    const OddEvenReport r = odd_even_structure(parse_kernel("sphere-geo-sq:n=2"), pt({0, x2}), 7);
    CHECK(r.on_symmetry_slice);
    CHECK(r.max_abs_odd < 1e-12);
    CHECK(r.even_coeffs.size() == 4);
  }
  const OddEvenReport off = odd_even_structure(parse_kernel("sphere-geo-sq:n=2"), pt({0.2, 0.5}), 5);
  CHECK_FALSE(off.on_symmetry_slice);
  CHECK(off.max_abs_odd > 1e-3);
  CHECK_THROWS_AS(odd_even_structure(parse_kernel("euclidean-sq:n=2"), pt({0.5, 0.5}), 4), ValidationError);
}

TEST_CASE("polynomial fits") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 10; ++i) {
    const double t = 0.1 * i;
    samples.emplace_back(t, 1 - 2 * t + 0.5 * t * t * t);
  }
  const PolyFit f = poly_fit_in_t(samples, 3);
  CHECK(f.coeffs.size() == 4);
  CHECK(f.coeffs[0] == doctest::Approx(1.0));
  CHECK(f.coeffs[1] == doctest::Approx(-2.0));
  CHECK(std::abs(f.coeffs[2]) < 1e-10);
  CHECK(f.coeffs[3] == doctest::Approx(0.5));
  CHECK(f.max_residual < 1e-12);
  CHECK(poly_fit_in_t(samples, 2).max_residual > 1e-4);
  CHECK_THROWS_AS(poly_fit_in_t({{0.0, 1.0}, {1.0, 2.0}}, 1), ValidationError);
  CHECK_THROWS_AS(poly_fit_in_t({{0.0, 1.0}, {0.0, 2.0}, {0.0, 3.0}}, 1), ValidationError);
}
