#include "rsw/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "rsw/error.hpp"

namespace rsw {

RateFit fit_exponential_rate(const DecaySeries& series, double burn_in, double noise_floor) {
  const std::size_t n = series.size();
  if (series.means.size() != n || series.std_errors.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "series columns have different lengths");
  }
  std::size_t first = 0;
  while (first < n && series.times[first] < burn_in) ++first;
  std::size_t last = n;  // one past the last admissible point
  if (noise_floor > 0.0) {
    last = first;
    for (std::size_t k = first; k < n; ++k) {
      if (series.means[k] > 0.0 && series.means[k] > noise_floor * series.std_errors[k]) last = k + 1;
    }
  }

  double sx = 0, sy = 0, m = 0;
  bool saw_nonpositive = false;
  for (std::size_t k = first; k < last; ++k) {
    if (!(series.means[k] > 0.0)) {
      saw_nonpositive = true;
      continue;
    }
    sx += series.times[k];
    sy += std::log(series.means[k]);
    m += 1;
  }
  if (m < 5) {
    if (saw_nonpositive) throw Error(ErrorCode::NonPositiveMeans, "fewer than 5 positive means in the fit window");
    throw Error(ErrorCode::InsufficientData, "fewer than 5 usable points after burn-in");
  }
  const double xbar = sx / m;
  const double ybar = sy / m;
  double sxx = 0, sxy = 0;
  double t_lo = 0, t_hi = 0;
  bool first_pt = true;
  for (std::size_t k = first; k < last; ++k) {
    if (!(series.means[k] > 0.0)) continue;
    const double dx = series.times[k] - xbar;
    sxx += dx * dx;
    sxy += dx * (std::log(series.means[k]) - ybar);
    if (first_pt) t_lo = series.times[k];
    first_pt = false;
    t_hi = series.times[k];
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientData, "fit window has no time spread");
  const double slope = sxy / sxx;
  const double intercept = ybar - slope * xbar;
  double sse = 0;
  for (std::size_t k = first; k < last; ++k) {
    if (!(series.means[k] > 0.0)) continue;
    const double r = std::log(series.means[k]) - (intercept + slope * series.times[k]);
    sse += r * r;
  }
  const double dof = m - 2;
  const double slope_se = std::sqrt(sse / dof / sxx);
  const boost::math::students_t dist(dof);
  const double tq = boost::math::quantile(boost::math::complement(dist, (1.0 - kConfidence) / 2.0));
  return {-slope, intercept, tq * slope_se, t_lo, t_hi, static_cast<std::size_t>(m)};
}

double theoretical_rate(double theta, double eta) {
  if (!(theta > 0.0) || !(eta > 0.0)) throw Error(ErrorCode::DomainViolation, "theta and eta must be positive");
  if (std::isinf(theta)) return eta / 2.0;
  return theta * eta / (2.0 * (theta + eta));
}

EmpiricalMeasure1D::EmpiricalMeasure1D(std::vector<double> samples) : samples_(std::move(samples)) {
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalMeasure1D::quantile(double p) const {
  if (samples_.empty()) throw Error(ErrorCode::InsufficientData, "quantile of an empty sample");
  const double h = p * static_cast<double>(samples_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, samples_.size() - 1);
  return samples_[lo] + (h - static_cast<double>(lo)) * (samples_[hi] - samples_[lo]);
}

double wasserstein1_sorted(const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::SizeMismatch,
                "sample sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " differ");
  }
  if (a.size() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a.samples()[k] - b.samples()[k]);
  return acc / static_cast<double>(a.size());
}

DecaySeries rho_series(const CoupledEnsemble& runs) {
  SeriesAccumulator acc(runs.times);
  std::vector<double> row(runs.times.size());
  for (Eigen::Index p = 0; p < runs.rho.rows(); ++p) {
    for (Eigen::Index c = 0; c < runs.rho.cols(); ++c) row[c] = runs.rho(p, c);
    acc.add_path(row);
  }
  return acc.finish();
}

std::vector<double> marginal_w1_series(const CoupledEnsemble& runs) {
  std::vector<double> out;
  for (Eigen::Index c = 0; c < runs.x_a.cols(); ++c) {
    std::vector<double> a(runs.x_a.col(c).begin(), runs.x_a.col(c).end());
    std::vector<double> b(runs.x_b.col(c).begin(), runs.x_b.col(c).end());
    out.push_back(wasserstein1_sorted(EmpiricalMeasure1D(std::move(a)), EmpiricalMeasure1D(std::move(b))));
  }
  return out;
}

InvariantSample invariant_sampler(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i0,
                                  double t_burn, std::size_t n_samples, double stride, const StreamIds& ids) {
  if (n_samples == 0) throw Error(ErrorCode::InsufficientData, "need at least one sample");
  if (!(stride > 0.0) || !(t_burn >= 0.0)) throw Error(ErrorCode::DomainViolation, "stride > 0, t_burn >= 0");
  if (model.n_regimes != q.n_states()) throw Error(ErrorCode::ShapeMismatch, "model vs generator regime count");
  const double delta = xi.delta();
  const long burn_steps = static_cast<long>(std::ceil(t_burn / delta - 1e-9));
  const long stride_steps = std::max(1L, std::lround(stride / delta));
  const long total = burn_steps + stride_steps * static_cast<long>(n_samples - 1);

  Engine chain_rng = ids.chain();
  Engine noise_rng = ids.noise();
  const RegimePath path = simulate_ctmc(ChainSampler(q), i0, std::max(delta, static_cast<double>(total) * delta),
                                        chain_rng);
  GridRegimes grid(path, delta);
  EulerMaruyama em(model, xi);

  InvariantSample out;
  out.values.reserve(n_samples);
  out.regimes.reserve(n_samples);
  auto record = [&](long k) {
    out.values.push_back(em.segment().current_scalar());
    out.regimes.push_back(grid.at(k));
  };
  if (burn_steps == 0) record(0);
  for (long k = 0; k < total; ++k) {
    em.step(grid.at(k), noise_rng);
    const long now = k + 1;
    if (now >= burn_steps && (now - burn_steps) % stride_steps == 0) record(now);
  }

  const auto n_states = static_cast<int>(q.n_states());
  std::vector<std::vector<double>> split(n_states);
  out.frequencies = Eigen::VectorXd::Zero(n_states);
  for (std::size_t s = 0; s < out.values.size(); ++s) {
    split[out.regimes[s]].push_back(out.values[s]);
    out.frequencies(out.regimes[s]) += 1.0;
  }
  out.frequencies /= static_cast<double>(out.values.size());
  for (auto& v : split) out.per_regime.emplace_back(std::move(v));
  out.pooled = EmpiricalMeasure1D(out.values);
  return out;
}

std::vector<EmpiricalMeasure1D> split_blocks(const std::vector<double>& values, std::size_t n_blocks) {
  if (n_blocks < 2) throw Error(ErrorCode::InsufficientData, "need at least two blocks");
  const std::size_t size = values.size() / n_blocks;
  if (size == 0) throw Error(ErrorCode::InsufficientData, "fewer samples than blocks");
  std::vector<EmpiricalMeasure1D> out;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    out.emplace_back(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(b * size),
                                         values.begin() + static_cast<std::ptrdiff_t>((b + 1) * size)));
  }
  return out;
}

Eigen::MatrixXd stationarity_diagnostic(const std::vector<EmpiricalMeasure1D>& blocks) {
  if (blocks.size() < 2) throw Error(ErrorCode::InsufficientData, "need at least two blocks");
  const auto n = static_cast<Eigen::Index>(blocks.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) w(i, j) = w(j, i) = wasserstein1_sorted(blocks[i], blocks[j]);
  return w;
}

double bootstrap_w1_threshold(const std::vector<double>& pooled, std::size_t sample_size, std::size_t n_boot,
                              double quantile, Engine& rng, std::size_t run_length) {
  if (pooled.empty() || sample_size == 0 || n_boot == 0 || run_length == 0) {
    throw Error(ErrorCode::InsufficientData, "bootstrap needs samples, a sample size, replicates and a run length");
  }
  const std::size_t run = std::min(run_length, pooled.size());
  std::uniform_int_distribution<std::size_t> start(0, pooled.size() - run);
  auto draw = [&](std::vector<double>& out) {
    out.clear();
    while (out.size() < sample_size) {
      const std::size_t s = start(rng);
      for (std::size_t k = s; k < s + run && out.size() < sample_size; ++k) out.push_back(pooled[k]);
    }
  };
  std::vector<double> stats;
  stats.reserve(n_boot);
  std::vector<double> a, b;
  a.reserve(sample_size);
  b.reserve(sample_size);
  for (std::size_t r = 0; r < n_boot; ++r) {
    draw(a);
    draw(b);
    stats.push_back(wasserstein1_sorted(EmpiricalMeasure1D(a), EmpiricalMeasure1D(b)));
  }
  return EmpiricalMeasure1D(std::move(stats)).quantile(quantile);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InsufficientData, "KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::DomainViolation, "alpha must lie in (0, 1)");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace rsw
