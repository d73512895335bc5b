#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rsw/chain.hpp"

using namespace rsw;

namespace {

GeneratorMatrix two_state(double up, double down) {
  Eigen::MatrixXd q(2, 2);
  q << -up, up, down, -down;
  return GeneratorMatrix::validate(q);
}

// Fraction of [0, horizon] spent in `state`, averaged over independent paths.
std::pair<double, double> occupation(const std::vector<RegimePath>& paths, int state) {
  Eigen::VectorXd indicator = Eigen::VectorXd::Zero(2);
  indicator(state) = 1.0;
  double s = 0, s2 = 0;
  for (const auto& p : paths) {
    const double f = integrate_along(p, indicator, p.horizon) / p.horizon;
    s += f;
    s2 += f * f;
  }
  const double n = static_cast<double>(paths.size());
  const double mean = s / n;
  return {mean, std::sqrt((s2 / n - mean * mean) / (n - 1))};
}

void check_path_invariants(const RegimePath& p, int n_states) {
  for (std::size_t k = 0; k < p.n_jumps(); ++k) {
    CHECK(p.jump_times[k] > (k == 0 ? 0.0 : p.jump_times[k - 1]));
    CHECK(p.jump_times[k] <= p.horizon);
    CHECK(p.states[k] >= 0);
    CHECK(p.states[k] < n_states);
    CHECK(p.states[k] != (k == 0 ? p.initial_state : p.states[k - 1]));
  }
}

}  // namespace

TEST_CASE("simulate_ctmc path invariants and right continuity") {
  const auto q = two_state(1.0, 2.0);
  Engine rng = make_stream(1, StreamKind::Chain, 0);
  const auto p = simulate_ctmc(q, 0, 50.0, rng);
  REQUIRE(p.n_jumps() > 5);
  check_path_invariants(p, 2);
  CHECK(state_at(p, 0.0) == 0);
  CHECK(state_at(p, 0.5 * p.jump_times[0]) == 0);
  for (std::size_t k = 0; k < p.n_jumps(); ++k) CHECK(state_at(p, p.jump_times[k]) == p.states[k]);
  CHECK_THROWS_AS(state_at(p, 50.5), Error);
  CHECK_THROWS_AS(state_at(p, -1.0), Error);
  CHECK_THROWS_AS(simulate_ctmc(q, 0, 0.0, rng), Error);
}

TEST_CASE("occupation fractions and jump counts") {
  SUBCASE("symmetric chain spends half its time in each state") {
    const auto q = two_state(1.0, 1.0);
    std::vector<RegimePath> paths;
    for (std::uint64_t k = 0; k < 2000; ++k) {
      Engine rng = make_stream(2, StreamKind::Chain, k);
      paths.push_back(simulate_ctmc(q, 0, 100.0, rng));
    }
    const auto [f, se] = occupation(paths, 1);
    CHECK(std::abs(f - 0.5) <= 0.01);
    CHECK(std::abs(f - 0.5) <= 3 * se + 0.005);  // 0.005 covers the start-in-0 transient
  }
  SUBCASE("gamma = 2: long-run occupation of the first state is 2/3") {
    const auto q = two_state(1.0, 2.0);
    Engine rng = make_stream(3, StreamKind::Chain, 0);
    const auto p = simulate_ctmc(q, 0, 1e4, rng);
    const double f = integrate_along(p, Eigen::Vector2d(1.0, 0.0), p.horizon) / p.horizon;
    CHECK(std::abs(f - 2.0 / 3.0) <= 0.01);
    // Jump-rate identity: E N(T) ~ sum_i pi_i (-q_ii) T = (2/3 + 2/3) T.
    const double expected = (2.0 / 3.0 * 1.0 + 1.0 / 3.0 * 2.0) * 1e4;
    CHECK(std::abs(static_cast<double>(p.n_jumps()) - expected) <= 0.02 * expected);
  }
}

TEST_CASE("discretized_state") {
  const auto q = two_state(1.0, 1.0);
  Engine rng = make_stream(4, StreamKind::Chain, 0);
  const auto p = simulate_ctmc(q, 1, 20.0, rng);
  REQUIRE(p.n_jumps() > 0);
  std::vector<double> holds{p.jump_times[0]};
  for (std::size_t k = 1; k < p.n_jumps(); ++k) holds.push_back(p.jump_times[k] - p.jump_times[k - 1]);
  const double min_hold = *std::min_element(holds.begin(), holds.end());

  for (double t = 0.0; t <= 20.0; t += 0.01) {
    const double d = 0.1;
    CHECK(discretized_state(p, t, d) == state_at(p, std::floor(t / d) * d));
  }
  // With delta below every holding time, the grid observation lags by less than one step.
  const double delta = 0.5 * min_hold;
  int mismatches = 0;
  for (double t = 0.0; t <= 20.0; t += delta / 3.0)
    mismatches += discretized_state(p, t, delta) != state_at(p, t);
  int bad_grid = 0;
  for (long k = 0; k * delta <= 20.0; ++k) bad_grid += discretized_state(p, k * delta, delta) != state_at(p, k * delta);
  CHECK(bad_grid == 0);
  CHECK(mismatches <= static_cast<int>(3 * p.n_jumps()));
  CHECK_THROWS_AS(discretized_state(p, 1.0, 0.0), Error);
}

TEST_CASE("integrate_along") {
  RegimePath p{0, {1.0}, {1}, 2.0};
  CHECK(integrate_along(p, Eigen::Vector2d(1.0, -1.0), 2.0) == 0.0);
  CHECK(integrate_along(p, Eigen::Vector2d(0.3, 0.3), 2.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(integrate_along(p, Eigen::Vector2d(0.3, 0.3), 2.0, 0.07) == doctest::Approx(0.6).epsilon(1e-15));
  // Jump at 1.0 observed on a 0.3 grid switches at 1.2.
  CHECK(integrate_along(p, Eigen::Vector2d(1.0, 0.0), 2.0, 0.3) == doctest::Approx(1.2).epsilon(1e-14));
  CHECK_THROWS_AS(integrate_along(p, Eigen::Vector2d(1.0, 0.0), 2.5), Error);

  SUBCASE("exact sum and bounded delta gap on random paths") {
    const auto q = two_state(2.0, 3.0);
    const Eigen::Vector2d k(0.7, -1.3);
    for (std::uint64_t s = 0; s < 20; ++s) {
      Engine rng = make_stream(5, StreamKind::Chain, s);
      const auto path = simulate_ctmc(q, 0, 10.0, rng);
      // Reference: interval sum in reverse order.
      std::vector<double> pieces;
      double prev = 0.0;
      int state = path.initial_state;
      for (std::size_t j = 0; j < path.n_jumps(); ++j) {
        pieces.push_back((path.jump_times[j] - prev) * k(state));
        prev = path.jump_times[j];
        state = path.states[j];
      }
      pieces.push_back((10.0 - prev) * k(state));
      const double reversed = std::accumulate(pieces.rbegin(), pieces.rend(), 0.0);
      const double direct = integrate_along(path, k, 10.0);
      CHECK(std::abs(direct - reversed) <= 1e-12 * std::max(1.0, std::abs(direct)));

      const double delta = 0.05;
      const double gap = std::abs(integrate_along(path, k, 10.0, delta) - direct);
      CHECK(gap <= static_cast<double>(path.n_jumps()) * delta * (k.maxCoeff() - k.minCoeff()) + 1e-12);
    }
  }
}

TEST_CASE("merged coupling") {
  const auto q = two_state(1.0, 2.0);
  SUBCASE("equal starts meet at time zero") {
    Engine rng = make_stream(6, StreamKind::Chain, 0);
    const auto c = merged_coupling(q, 1, 1, 5.0, rng);
    REQUIRE(c.meeting_time);
    CHECK(*c.meeting_time == 0.0);
    CHECK(c.path_a.jump_times == c.path_b.jump_times);
    CHECK(c.path_a.states == c.path_b.states);
  }
  SUBCASE("paths agree after meeting and differ before") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      Engine rng = make_stream(7, StreamKind::Chain, s);
      const auto c = merged_coupling(q, 0, 1, 10.0, rng);
      check_path_invariants(c.path_a, 2);
      check_path_invariants(c.path_b, 2);
      const double meet = c.meeting_time.value_or(10.0);
      for (double t = 0.0; t <= 10.0; t += 0.01) {
        if (t >= meet && c.meeting_time) CHECK(state_at(c.path_a, t) == state_at(c.path_b, t));
        if (t < meet) CHECK(state_at(c.path_a, t) != state_at(c.path_b, t));
      }
    }
  }
  SUBCASE("marginals are undistorted") {
    std::vector<RegimePath> a, b;
    for (std::uint64_t s = 0; s < 3000; ++s) {
      Engine rng = make_stream(8, StreamKind::Chain, s);
      auto c = merged_coupling(q, 0, 1, 3.0, rng);
      a.push_back(std::move(c.path_a));
      b.push_back(std::move(c.path_b));
    }
    // Exact occupation from the transient law: E (1/T) int_0^T 1{state 0} dt.
    auto exact = [](int i0) {
      const double T = 3.0, r = 3.0, pi0 = 2.0 / 3.0;
      const double start = i0 == 0 ? 1.0 : 0.0;
      return pi0 + (start - pi0) * (1.0 - std::exp(-r * T)) / (r * T);
    };
    const auto [fa, sea] = occupation(a, 0);
    const auto [fb, seb] = occupation(b, 0);
    CHECK(std::abs(fa - exact(0)) <= 3 * sea);
    CHECK(std::abs(fb - exact(1)) <= 3 * seb);
  }
}

TEST_CASE("coupling_time_mc") {
  SUBCASE("two-state example generator: T ~ Exp(1 + gamma)") {
    for (double gamma : {1.0, 2.0}) {
      const auto q = two_state(1.0, gamma);
      const auto s = coupling_time_mc(q, 0, 1, 100000, 9);
      CHECK(std::abs(s.theta_fit - (1.0 + gamma)) <= 0.1 * (1.0 + gamma));
      CHECK(std::abs(s.theta_mle - (1.0 + gamma)) <= 0.02 * (1.0 + gamma));
    }
  }
  SUBCASE("symmetric chain: mean 0.5") {
    const auto s = coupling_time_mc(two_state(1.0, 1.0), 0, 1, 20000, 10);
    const double mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / s.samples.size();
    CHECK(std::abs(mean - 0.5) <= 0.02 * 0.5);
  }
  SUBCASE("i == j gives zeros") {
    const auto s = coupling_time_mc(two_state(1.0, 1.0), 1, 1, 10, 10);
    CHECK(std::all_of(s.samples.begin(), s.samples.end(), [](double t) { return t == 0.0; }));
  }
  SUBCASE("merged-coupling survival below the fitted exponential tail") {
    const auto q = two_state(1.0, 2.0);
    const double theta = coupling_time_mc(q, 0, 1, 20000, 11).theta_fit;
    const std::size_t n = 20000;
    std::vector<double> meets;
    for (std::uint64_t s = 0; s < n; ++s) {
      Engine rng = make_stream(12, StreamKind::Chain, s);
      meets.push_back(merged_coupling(q, 0, 1, 5.0, rng).meeting_time.value_or(1e9));
    }
    for (double t : {0.25, 0.5, 1.0, 1.5}) {
      const double surv = std::count_if(meets.begin(), meets.end(), [t](double m) { return m > t; }) / double(n);
      const double bound = std::exp(-theta * t);
      CHECK(surv <= bound + 3 * std::sqrt(bound * (1 - bound) / n));
    }
  }
  SUBCASE("worker count does not change the samples") {
    const auto q = two_state(1.0, 2.0);
    CHECK(coupling_time_mc(q, 0, 1, 1000, 13, 1).samples == coupling_time_mc(q, 0, 1, 1000, 13, 4).samples);
  }
}

TEST_CASE("exp_functional_mc") {
  const auto q = two_state(1.0, 2.0);
  SUBCASE("K = 0 gives exactly one") {
    const auto e = exp_functional_mc(q, Eigen::Vector2d::Zero(), 0, 3.0, 0.1, 500, 1);
    CHECK(e.mean == 1.0);
    CHECK(e.std_error == 0.0);
  }
  SUBCASE("z-scores over replications are centred") {
    const Eigen::Vector2d k(1.0, -1.0);
    const double exact = feynman_kac_expectation(q, k, 1.0, 0);
    double zsum = 0;
    for (std::uint64_t r = 0; r < 50; ++r) {
      const auto e = exp_functional_mc(q, k, 0, 1.0, std::nullopt, 2000, 100 + r);
      zsum += (e.mean - exact) / e.std_error;
    }
    CHECK(std::abs(zsum / 50.0) <= 0.5);
  }
  SUBCASE("discretized mean approaches the continuous one") {
    const Eigen::Vector2d k(1.0, -1.0);
    const auto cont = exp_functional_mc(q, k, 0, 2.0, std::nullopt, 100000, 21);
    const auto d1 = exp_functional_mc(q, k, 0, 2.0, 0.02, 100000, 21);
    const auto d2 = exp_functional_mc(q, k, 0, 2.0, 0.01, 100000, 21);
    const double richardson = std::abs(d1.mean - d2.mean);
    CHECK(std::abs(d2.mean - cont.mean) <= 3 * d2.std_error + 2 * richardson);
  }
  CHECK_THROWS_AS(exp_functional_mc(q, Eigen::Vector2d::Zero(), 0, 1.0, std::nullopt, 50, 1), Error);
}
