#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rsw/segment.hpp"

using namespace rsw;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd m(v.size(), 1);
  int r = 0;
  for (double x : v) m(r++, 0) = x;
  return m;
}

// Piecewise-linear interpolation of a record sampled at k * delta.
double interpolate_record(const std::vector<double>& rec, double delta, double t) {
  const double u = t / delta;
  const auto i = static_cast<std::size_t>(std::floor(u));
  if (i + 1 >= rec.size()) return rec.back();
  const double s = u - static_cast<double>(i);
  return rec[i] + s * (rec[i + 1] - rec[i]);
}

}  // namespace

TEST_CASE("construction from an initial function") {
  const auto c = Segment::constant(Eigen::Vector2d(1.5, -2.0), 1.0, 4);
  for (int r = 0; r <= 4; ++r) CHECK(c.knot(r) == Eigen::Vector2d(1.5, -2.0));
  CHECK(c.pre_history() == Eigen::Vector2d(1.5, -2.0));

  const auto id = Segment::from_function([](double t) { return t; }, 1.0, 4);
  const Eigen::VectorXd expected = (Eigen::VectorXd(5) << -1, -0.75, -0.5, -0.25, 0).finished();
  CHECK(id.values().col(0) == expected);
  CHECK(id.pre_history()(0) == -1.0);
  CHECK(id.delta() * id.m() == 1.0);

  CHECK_THROWS_AS(Segment::from_function([](double t) { return t; }, 1.0, 0), Error);
  CHECK_THROWS_AS(Segment::from_function([](double t) { return t; }, 1.0, -3), Error);
  CHECK_THROWS_AS(Segment::from_function([](double) { return std::nan(""); }, 1.0, 4), Error);
  CHECK_THROWS_AS(Segment::from_function([](double t) { return t; }, 2.0, 2), Error);  // delta = 1
}

TEST_CASE("value_at") {
  const auto s = Segment::from_values(column({1.0, 3.0, -1.0, 0.5}), 0.9);
  CHECK(s.component_at(-0.9) == 1.0);
  CHECK(s.component_at(-0.3) == -1.0);
  CHECK(s.component_at(0.0) == 0.5);
  CHECK(s.component_at(-0.75) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.component_at(-0.15) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(s.component_at(-0.9 - 0.5) == 1.0);
  CHECK(s.value_at(-0.9 - 0.5)(0) == 1.0);
  CHECK_THROWS_AS(s.value_at(0.1), Error);
  CHECK_THROWS_AS(s.value_at(-2.0), Error);

  SUBCASE("continuity at interior knots") {
    for (int r = 1; r < s.m(); ++r) {
      const double th = s.theta(r);
      const double left = s.component_at(std::nextafter(th, -1.0));
      const double right = s.component_at(std::nextafter(th, 1.0));
      CHECK(std::abs(left - right) <= 1e-15 * 4);
      CHECK(std::abs(left - s.knot_component(r)) <= 1e-15 * 4);
    }
  }
}

TEST_CASE("sup_norm") {
  CHECK(sup_norm(Segment::constant(Eigen::Vector2d(3.0, 4.0), 1.0, 3)) == doctest::Approx(5.0));
  CHECK(sup_norm(Segment::from_values(column({-1.0, 2.0, 0.0}), 1.0)) == 2.0);

  SUBCASE("vector segment against dense sampling") {
    Eigen::MatrixXd knots(2, 2);
    knots << 1, 0, 0, 1;
    const auto s = Segment::from_values(knots, 0.5);
    double dense = 0;
    for (int k = 0; k <= 10000; ++k) dense = std::max(dense, s.value_at(-0.5 + 0.5 * k / 10000.0).norm());
    CHECK(std::abs(sup_norm(s) - dense) <= 1e-9);
    CHECK(s.value_at(-0.25).norm() < 1.0);
  }
  SUBCASE("random vector segments against dense sampling") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::MatrixXd knots(6, 3);
      for (Eigen::Index i = 0; i < knots.size(); ++i) knots(i) = n01(rng);
      const auto s = Segment::from_values(knots, 1.0);
      double dense = 0;
      for (int k = 0; k <= 5000; ++k) dense = std::max(dense, s.value_at(-1.0 + k / 5000.0).norm());
      CHECK(sup_norm(s) >= dense - 1e-12);
      CHECK(sup_norm(s) - dense <= 1e-9);
    }
  }
  SUBCASE("discrete triangle inequality") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::MatrixXd ka(5, 2), kb(5, 2);
      for (Eigen::Index i = 0; i < ka.size(); ++i) {
        ka(i) = n01(rng);
        kb(i) = n01(rng);
      }
      const auto a = Segment::from_values(ka, 0.8);
      const auto b = Segment::from_values(kb, 0.8);
      CHECK(sup_norm(a) - sup_norm(b) <= std::sqrt(sup_norm_diff_squared(a, b)) + 1e-15);
      CHECK(sup_norm(difference(a, b)) == doctest::Approx(std::sqrt(sup_norm_diff_squared(a, b))));
    }
  }
}

TEST_CASE("integrate_squared_diff") {
  const auto a = Segment::from_values(column({1.0, 2.0, 4.0}), 1.0);
  const auto b = Segment::from_values(column({0.0, 5.0, 1.0}), 1.0);
  CHECK(integrate_squared_diff(a, a, DelayMeasure::point_mass(-0.3, 1.0)) == 0.0);
  CHECK(integrate_squared_diff(a, b, DelayMeasure::point_mass(0.0, 1.0)) == 9.0);
  const DelayMeasure two({{-1.0, 0.5}, {0.0, 0.5}}, 1.0);
  CHECK(integrate_squared_diff(a, b, two) == doctest::Approx(0.5 * (1.0 + 9.0)));
  // Off-grid atom: a(-0.25) = 3, b(-0.25) = 3.
  CHECK(integrate_squared_diff(a, b, DelayMeasure::point_mass(-0.25, 1.0)) == doctest::Approx(0.0));

  const auto other = Segment::from_values(column({1.0, 2.0, 4.0, 5.0}), 1.0);
  CHECK_THROWS_AS(integrate_squared_diff(a, other, two), Error);

  SUBCASE("bounded by the squared sup of the difference for random measures") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> loc(-1.0, 0.0), w(0.01, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::MatrixXd ka(9, 2), kb(9, 2);
      for (Eigen::Index i = 0; i < ka.size(); ++i) {
        ka(i) = n01(rng);
        kb(i) = n01(rng);
      }
      const auto x = Segment::from_values(ka, 1.0);
      const auto y = Segment::from_values(kb, 1.0);
      std::vector<DelayMeasure::Atom> atoms;
      for (int k = 0; k < 4; ++k) atoms.push_back({loc(rng), w(rng)});
      const DelayMeasure v(atoms, 1.0);
      CHECK(integrate_squared_diff(x, y, v) <= sup_norm_diff_squared(x, y) * (1 + 1e-12));
    }
  }
}

TEST_CASE("push slides the window") {
  const auto c = Segment::constant(Eigen::VectorXd::Constant(1, 2.5), 1.0, 3);
  const auto c2 = push(c, Eigen::VectorXd::Constant(1, 2.5));
  CHECK(c2.values() == c.values());
  CHECK(c2.pre_history() == c.pre_history());

  const auto s = Segment::from_values(column({1.0, 2.0, 3.0}), 1.0);
  const auto t = push(s, Eigen::VectorXd::Constant(1, 4.0));
  CHECK(t.values().col(0) == Eigen::Vector3d(2.0, 3.0, 4.0));
  CHECK(s.values().col(0) == Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK(t.pre_history()(0) == 1.0);
  CHECK_THROWS_AS(push(s, Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity())), Error);
  CHECK_THROWS_AS(push(s, Eigen::VectorXd::Zero(2)), Error);

  SUBCASE("pre-history kept for M pushes, then tracks the evicted knot") {
    auto w = s;
    w.advance(4.0);
    w.advance(5.0);
    CHECK(w.pre_history()(0) == 1.0);
    w.advance(6.0);
    CHECK(w.pre_history()(0) == 3.0);
  }

  SUBCASE("windows reproduce interpolation of the full record") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    const int m = 8;
    const double tau = 0.8;
    std::vector<double> rec;
    for (int k = 0; k <= m; ++k) rec.push_back(n01(rng));
    auto seg = Segment::from_values(Eigen::Map<const Eigen::MatrixXd>(rec.data(), m + 1, 1), tau);
    const double delta = seg.delta();
    std::uniform_real_distribution<double> th(-tau, 0.0);
    for (int k = 1; k <= 3 * (m + 1); ++k) {
      rec.push_back(n01(rng));
      seg.advance(rec.back());
      const double now = static_cast<double>(k + m) * delta;
      for (int r = 0; r <= m; ++r) CHECK(seg.knot_component(r) == rec[k + r]);
      for (int q = 0; q < 20; ++q) {
        const double theta = th(rng);
        CHECK(std::abs(seg.component_at(theta) - interpolate_record(rec, delta, now + theta)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("segments are templated on the scalar") {
  using LSeg = BasicSegment<long double>;
  const auto s = LSeg::from_function([](long double t) { return 2 * t; }, 1.0L, 4);
  CHECK(sup_norm(s) == 2.0L);
  CHECK(s.component_at(-0.125L) == -0.25L);
}
