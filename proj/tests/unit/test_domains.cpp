#include <doctest.h>

#include <cmath>
#include <set>

#include "kernrank/domains.hpp"
#include "kernrank/errors.hpp"

using namespace kernrank;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

}  // namespace

TEST_CASE("factories reject invalid parameters") {
  CHECK_THROWS_AS(Domain::interval(1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Domain::interval(2.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Domain::ball(pt({0, 0}), 0.0), ValidationError);
  CHECK_THROWS_AS(Domain::sphere(0), ValidationError);
  CHECK_THROWS_AS(Domain::half_line(0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(Domain::cube(0, 0, 1), ValidationError);
}

TEST_CASE("membership is strict on open domains") {
  const Domain I = Domain::interval(0, 1);
  CHECK(I.contains(pt({0.5})));
  CHECK_FALSE(I.contains(pt({0.0})));
  CHECK_FALSE(I.contains(pt({1.0})));
  CHECK_FALSE(I.contains(pt({0.5, 0.5})));

  const Domain S = Domain::sphere(2);
  CHECK(S.contains(pt({0, 0, 1})));
  CHECK(S.contains(pt({0.6, 0, 0.8})));
  CHECK_FALSE(S.contains(pt({0, 0, 1.001})));
  CHECK(S.dim() == 2);
  CHECK(S.ambient_dim() == 3);

  const Domain H = Domain::half_line(0.0);
  CHECK(H.contains(pt({1e-300})));
  CHECK_FALSE(H.contains(pt({0.0})));
}

TEST_CASE("samples land inside every kind of domain") {
  const std::vector<Domain> doms{Domain::interval(0, 1),
                                 Domain::cube(3, -1, 1),
                                 Domain::ball(pt({1, 2}), 0.5),
                                 Domain::sphere(2),
                                 Domain::sphere(4),
                                 Domain::cap(pt({0, 0, 1}), 0.2),
                                 Domain::half_line(-1.0, 2.0)};
  Stream rng(11);
  for (const auto& d : doms)
    for (int i = 0; i < 500; ++i) {
      const Point p = sample_point(d, rng);
      REQUIRE(p.size() == d.ambient_dim());
      CHECK(d.contains(p));
      CHECK(p.allFinite());
    }
}

TEST_CASE("sphere samples have unit norm") {
  Stream rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(std::abs(sample_point(Domain::sphere(2), rng).norm() - 1.0) < 1e-12);
}

TEST_CASE("uniform box sampling has the right mean") {
  Stream rng(2024);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_point(Domain::interval(0, 1), rng)[0];
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("sphere sampling is rotation invariant in its first moments") {
  // Uniform on S^2: E[p] = 0 and E[p_i^2] = 1/3.
  Stream rng(5);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const Point p = sample_point(Domain::sphere(2), rng);
    mean += p;
    sq += p.cwiseProduct(p);
  }
  mean /= n;
  sq /= n;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(mean[i]) < 0.02);
    CHECK(std::abs(sq[i] - 1.0 / 3.0) < 0.02);
  }
}

TEST_CASE("sampling is a pure function of the seed") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    Stream a(seed), b(seed);
    for (int i = 0; i < 50; ++i) CHECK(sample_point(Domain::sphere(3), a) == sample_point(Domain::sphere(3), b));
  }
  Stream a(1), b(2);
  CHECK(sample_point(Domain::interval(0, 1), a) != sample_point(Domain::interval(0, 1), b));
}

TEST_CASE("derived seeds are distinct across indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m)
    for (std::uint64_t i = 0; i < 200; ++i) seen.insert(derive_seed(m, i));
  CHECK(seen.size() == 4000);
}

TEST_CASE("subset sampling") {
  const Domain U = Domain::interval(0, 1);
  Stream rng(8);
  SUBCASE("subset equal to the domain") {
    for (int i = 0; i < 100; ++i) CHECK(U.contains(sample_in_subset(U, U, rng)));
  }
  SUBCASE("inner interval") {
    const Domain W = Domain::interval(0.4, 0.6);
    for (int i = 0; i < 100; ++i) {
      const double x = sample_in_subset(U, W, rng)[0];
      CHECK(x > 0.4);
      CHECK(x < 0.6);
    }
  }
  SUBCASE("disjoint subset") {
    CHECK_THROWS_AS(sample_in_subset(U, Domain::interval(2, 3), rng), SubsetNotContained);
  }
  SUBCASE("cap inside sphere") {
    const Domain cap = Domain::cap(pt({1, 0, 0}), 0.1);
    for (int i = 0; i < 100; ++i) {
      const Point p = sample_in_subset(Domain::sphere(2), cap, rng);
      CHECK(std::acos(std::clamp(p[0], -1.0, 1.0)) < 0.1);
    }
  }
}

TEST_CASE("containment checks") {
  CHECK(is_subset(Domain::interval(0.2, 0.3), Domain::interval(0, 1)));
  CHECK(is_subset(Domain::interval(0, 1), Domain::interval(0, 1)));
  CHECK_FALSE(is_subset(Domain::interval(0.5, 1.5), Domain::interval(0, 1)));
  CHECK(is_subset(Domain::cube(2, -0.1, 0.1), Domain::ball(pt({0, 0}), 1.0)));
  CHECK_FALSE(is_subset(Domain::cube(2, -0.9, 0.9), Domain::ball(pt({0, 0}), 1.0)));
  CHECK(is_subset(Domain::cap(pt({0, 0, 1}), 0.1), Domain::sphere(2)));
  CHECK_FALSE(is_subset(Domain::cap(pt({0, 0, 1}), 0.1), Domain::sphere(3)));
  CHECK(is_subset(Domain::cap(pt({0, 0, 1}), 0.1), Domain::cap(pt({0, 0, 1}), 0.3)));
  CHECK(is_subset(Domain::interval(1, 2), Domain::half_line(0)));
  CHECK_FALSE(is_subset(Domain::interval(-1, 2), Domain::half_line(0)));
}

TEST_CASE("uniform partition of an interval") {
  const Partition p = uniform_partition(Domain::interval(0, 1), 2);
  REQUIRE(p.size() == 2);
  CHECK(p.reps[0][0] == doctest::Approx(0.25));
  CHECK(p.reps[1][0] == doctest::Approx(0.75));
  CHECK(p.volumes[0] == doctest::Approx(0.5));
  CHECK(p.volumes[1] == doctest::Approx(0.5));
}

TEST_CASE("uniform partition of a square") {
  const Partition p = uniform_partition(Domain::cube(2, 0, 1), 2);
  REQUIRE(p.size() == 4);
  for (double v : p.volumes) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("partition properties over random boxes") {
  Stream rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_open() * 3);
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = -2 + 2 * rng.uniform_open();
      hi[i] = lo[i] + 0.1 + 3 * rng.uniform_open();
    }
    const Domain box = Domain::box(lo, hi);
    const int k = 1 + static_cast<int>(rng.uniform_open() * 5);
    const Partition p = uniform_partition(box, k);
    CHECK(p.size() == static_cast<std::size_t>(std::pow(k, n)));
    double total = 0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      CHECK(p.volumes[c] > 0);
      CHECK(p.cells[c].contains(p.reps[c]));
      total += p.volumes[c];
    }
    CHECK(std::abs(total - (hi - lo).prod()) <= 1e-12 * (hi - lo).prod());
    // Each random interior point falls in exactly one cell.
    for (int s = 0; s < 20; ++s) {
      const Point q = sample_point(box, rng);
      int hits = 0;
      for (const auto& cell : p.cells) hits += cell.contains(q) ? 1 : 0;
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("hemisphere chart") {
  CHECK(hemisphere_embed(pt({0, 0})) == pt({0, 0, 1}));
  const Point q = hemisphere_embed(pt({0.6, 0}));
  CHECK(q[0] == doctest::Approx(0.6));
  CHECK(q[1] == doctest::Approx(0.0));
  CHECK(q[2] == doctest::Approx(0.8));
  CHECK_THROWS_AS(hemisphere_embed(pt({1.0, 0})), OutOfChart);
  CHECK_THROWS_AS(hemisphere_embed(pt({0.8, 0.8})), OutOfChart);

  Stream rng(4);
  const Domain ball = Domain::ball(pt({0, 0, 0}), 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point x = sample_point(ball, rng);
    const Point e = hemisphere_embed(x);
    CHECK(std::abs(e.norm() - 1.0) < 1e-12);
    CHECK(e.head(3) == x);
    CHECK(e[3] > 0);
  }
}
