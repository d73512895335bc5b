#include "rsw/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "rsw/error.hpp"
#include "rsw/parallel.hpp"

namespace rsw {

ChainSampler::ChainSampler(const GeneratorMatrix& q) {
  const int n = static_cast<int>(q.n_states());
  exit_rates_.resize(n);
  cumulative_.resize(n);
  targets_.resize(n);
  for (int i = 0; i < n; ++i) {
    exit_rates_[i] = q.exit_rate(i);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || q.rate(i, j) <= 0.0) continue;
      acc += q.rate(i, j);
      cumulative_[i].push_back(acc);
      targets_[i].push_back(j);
    }
    for (auto& c : cumulative_[i]) c /= acc;
  }
}

double ChainSampler::holding_time(int state, Engine& rng) const {
  const double rate = exit_rates_[state];
  if (!(rate > 0.0)) throw Error(ErrorCode::AbsorbingState, "state " + std::to_string(state) + " has no exit");
  return std::exponential_distribution<double>(rate)(rng);
}

int ChainSampler::next_state(int state, Engine& rng) const {
  const auto& cdf = cumulative_[state];
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  return targets_[state][idx];
}

namespace {

void check_state(int s, int n) {
  if (s < 0 || s >= n) throw Error(ErrorCode::DomainViolation, "regime index " + std::to_string(s) + " out of range");
}

void check_time(const RegimePath& path, double t) {
  if (!(t >= 0.0) || t > path.horizon) {
    throw Error(ErrorCode::OutOfHorizon, "t = " + std::to_string(t) + " outside [0, horizon]");
  }
}

}  // namespace

RegimePath simulate_ctmc(const ChainSampler& sampler, int i0, double horizon, Engine& rng) {
  check_state(i0, sampler.n_states());
  if (!(horizon > 0.0)) throw Error(ErrorCode::DomainViolation, "horizon must be positive");
  RegimePath path{i0, {}, {}, horizon};
  int state = i0;
  double t = sampler.holding_time(state, rng);
  while (t <= horizon) {
    state = sampler.next_state(state, rng);
    path.jump_times.push_back(t);
    path.states.push_back(state);
    t += sampler.holding_time(state, rng);
  }
  return path;
}

RegimePath simulate_ctmc(const GeneratorMatrix& q, int i0, double horizon, Engine& rng) {
  return simulate_ctmc(ChainSampler(q), i0, horizon, rng);
}

int state_at(const RegimePath& path, double t) {
  check_time(path, t);
  // Number of jumps at or before t; right-continuous.
  const auto it = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), t);
  const auto idx = it - path.jump_times.begin();
  return idx == 0 ? path.initial_state : path.states[idx - 1];
}

namespace {

// floor(t / delta), treating t within rounding of a grid point as on it.
double grid_index(double t, double delta) {
  const double u = t / delta;
  const double r = std::round(u);
  if (std::abs(u - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) return r;
  return std::floor(u);
}

}  // namespace

int discretized_state(const RegimePath& path, double t, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::DomainViolation, "delta must be positive");
  check_time(path, t);
  return state_at(path, std::min(grid_index(t, delta) * delta, path.horizon));
}

double integrate_along(const RegimePath& path, const Eigen::VectorXd& k, double t, std::optional<double> delta) {
  check_time(path, t);
  if (delta && !(*delta > 0.0)) throw Error(ErrorCode::DomainViolation, "delta must be positive");
  double acc = 0.0;
  double prev = 0.0;
  int state = path.initial_state;
  for (std::size_t j = 0; j < path.jump_times.size(); ++j) {
    // Observed on the grid, a jump at s takes effect at the next grid point ceil(s / delta) delta.
    const double at = delta ? std::ceil(path.jump_times[j] / *delta) * *delta : path.jump_times[j];
    if (at >= t) break;
    acc += k(state) * (at - prev);
    prev = at;
    state = path.states[j];
  }
  return acc + k(state) * (t - prev);
}

namespace {

struct Walker {
  int state;
  double next;
};

}  // namespace

CoupledPath merged_coupling(const ChainSampler& sampler, int i, int j, double horizon, Engine& rng) {
  check_state(i, sampler.n_states());
  check_state(j, sampler.n_states());
  if (!(horizon > 0.0)) throw Error(ErrorCode::DomainViolation, "horizon must be positive");
  CoupledPath out{{i, {}, {}, horizon}, {j, {}, {}, horizon}, std::nullopt};
  if (i == j) {
    out.meeting_time = 0.0;
    out.path_a = simulate_ctmc(sampler, i, horizon, rng);
    out.path_b = out.path_a;
    return out;
  }
  Walker a{i, sampler.holding_time(i, rng)};
  Walker b{j, sampler.holding_time(j, rng)};
  while (!out.meeting_time) {
    const bool a_first = a.next <= b.next;
    Walker& w = a_first ? a : b;
    RegimePath& p = a_first ? out.path_a : out.path_b;
    const double t = w.next;
    if (t > horizon) break;
    w.state = sampler.next_state(w.state, rng);
    p.jump_times.push_back(t);
    p.states.push_back(w.state);
    w.next = t + sampler.holding_time(w.state, rng);
    if (a.state == b.state) out.meeting_time = t;
  }
  if (out.meeting_time) {
    // Both coordinates follow a's continuation; a's pending clock is still a
    // valid residual holding time.
    while (a.next <= horizon) {
      a.state = sampler.next_state(a.state, rng);
      out.path_a.jump_times.push_back(a.next);
      out.path_a.states.push_back(a.state);
      out.path_b.jump_times.push_back(a.next);
      out.path_b.states.push_back(a.state);
      a.next += sampler.holding_time(a.state, rng);
    }
  }
  return out;
}

CoupledPath merged_coupling(const GeneratorMatrix& q, int i, int j, double horizon, Engine& rng) {
  return merged_coupling(ChainSampler(q), i, j, horizon, rng);
}

double coupling_time(const ChainSampler& sampler, int i, int j, Engine& rng) {
  check_state(i, sampler.n_states());
  check_state(j, sampler.n_states());
  if (i == j) return 0.0;
  Walker a{i, sampler.holding_time(i, rng)};
  Walker b{j, sampler.holding_time(j, rng)};
  for (;;) {
    Walker& w = a.next <= b.next ? a : b;
    const double t = w.next;
    w.state = sampler.next_state(w.state, rng);
    w.next = t + sampler.holding_time(w.state, rng);
    if (a.state == b.state) return t;
  }
}

double fit_survival_tail(std::vector<double> samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw Error(ErrorCode::InsufficientData, "need at least 4 coupling samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t lo = n / 2;
  const std::size_t hi = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double m = 0;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double x = samples[k];
    const double y = std::log((static_cast<double>(n - k) - 0.5) / static_cast<double>(n));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1;
  }
  const double varx = sxx - sx * sx / m;
  if (!(varx > 0.0)) return std::numeric_limits<double>::infinity();
  return -(sxy - sx * sy / m) / varx;
}

CouplingTimeSample coupling_time_mc(const GeneratorMatrix& q, int i, int j, std::size_t n_paths,
                                    std::uint64_t seed, unsigned workers) {
  const ChainSampler sampler(q);
  check_state(i, sampler.n_states());
  check_state(j, sampler.n_states());
  CouplingTimeSample out;
  out.samples.assign(n_paths, 0.0);
  if (i == j) {
    out.theta_fit = std::numeric_limits<double>::infinity();
    out.theta_mle = std::numeric_limits<double>::infinity();
    return out;
  }
  map_blocks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      Engine rng = make_stream(seed, StreamKind::Chain, k);
      out.samples[k] = coupling_time(sampler, i, j, rng);
    }
    return 0;
  });
  out.theta_fit = fit_survival_tail(out.samples);
  const double total = std::accumulate(out.samples.begin(), out.samples.end(), 0.0);
  out.theta_mle = static_cast<double>(n_paths) / total;
  return out;
}

DecaySeries exp_functional_series(const GeneratorMatrix& q, const Eigen::VectorXd& k, int i0,
                                  const std::vector<double>& t_grid, std::optional<double> delta,
                                  std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  if (k.size() != q.n_states()) throw Error(ErrorCode::ShapeMismatch, "K length differs from state count");
  if (t_grid.empty()) throw Error(ErrorCode::InsufficientData, "empty time grid");
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  const ChainSampler sampler(q);
  auto blocks = map_blocks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    SeriesAccumulator acc(t_grid);
    std::vector<double> row(t_grid.size());
    for (std::size_t p = begin; p < end; ++p) {
      Engine rng = make_stream(seed, StreamKind::Chain, p);
      const RegimePath path = t_max > 0.0 ? simulate_ctmc(sampler, i0, t_max, rng) : RegimePath{i0, {}, {}, 0.0};
      for (std::size_t g = 0; g < t_grid.size(); ++g) {
        row[g] = std::exp(integrate_along(path, k, t_grid[g], delta));
      }
      acc.add_path(row);
    }
    return acc;
  });
  SeriesAccumulator total(t_grid);
  for (const auto& b : blocks) total.merge(b);
  return total.finish();
}

MonteCarloEstimate exp_functional_mc(const GeneratorMatrix& q, const Eigen::VectorXd& k, int i0, double t,
                                     std::optional<double> delta, std::size_t n_paths, std::uint64_t seed,
                                     unsigned workers) {
  if (n_paths < 100) throw Error(ErrorCode::InsufficientData, "exp_functional_mc needs at least 100 paths");
  const DecaySeries s = exp_functional_series(q, k, i0, {t}, delta, n_paths, seed, workers);
  return {s.means[0], s.std_errors[0]};
}

}  // namespace rsw
