#ifndef RSW_ERGODICS_HPP
#define RSW_ERGODICS_HPP

// Statistical post-processing of simulation output: exponential rate fits,
// one-dimensional Wasserstein distances, coupling upper bounds and long-run
// (invariant measure) sampling.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "rsw/random.hpp"
#include "rsw/sde.hpp"
#include "rsw/series.hpp"

namespace rsw {

inline constexpr double kConfidence = 0.95;

struct RateFit {
  double rate;  // minus the fitted slope of log(mean) against t
  double intercept;
  double ci_halfwidth;  // 95% from the slope standard error
  double t_lo;
  double t_hi;
  std::size_t n_points;

  bool excludes_zero() const { return rate - ci_halfwidth > 0.0; }
};

/// Least-squares line through (t, log mean) over t >= burn_in. With
/// noise_floor > 0 the window ends at the last point whose mean exceeds
/// noise_floor standard errors.
RateFit fit_exponential_rate(const DecaySeries& series, double burn_in, double noise_floor = 0.0);

/// theta eta / (2 (theta + eta)).
double theoretical_rate(double theta, double eta);

class EmpiricalMeasure1D {
 public:
  EmpiricalMeasure1D() = default;
  explicit EmpiricalMeasure1D(std::vector<double> samples);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double quantile(double p) const;
  double iqr() const { return quantile(0.75) - quantile(0.25); }

 private:
  std::vector<double> samples_;
};

/// Exact W1 between two equal-size empirical measures on the line.
double wasserstein1_sorted(const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b);

/// Column means of the coupled distance: an upper bound on W_rho between the two laws.
DecaySeries rho_series(const CoupledEnsemble& runs);

/// W1 between the scalar marginals of the two ensembles at every grid time.
std::vector<double> marginal_w1_series(const CoupledEnsemble& runs);

struct InvariantSample {
  std::vector<double> values;  // X(t) in sampling order
  std::vector<int> regimes;    // Lambda(t_delta) at the same times
  EmpiricalMeasure1D pooled;
  std::vector<EmpiricalMeasure1D> per_regime;
  Eigen::VectorXd frequencies;
};

/// One long trajectory; after t_burn records (X(t), Lambda(t_delta)) every
/// `stride` time units.
InvariantSample invariant_sampler(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i0,
                                  double t_burn, std::size_t n_samples, double stride, const StreamIds& ids);

/// Splits a sample stream into n_blocks consecutive equal blocks (remainder dropped).
std::vector<EmpiricalMeasure1D> split_blocks(const std::vector<double>& values, std::size_t n_blocks);

/// Pairwise W1 between blocks; entry (b, b + 1) compares consecutive blocks.
Eigen::MatrixXd stationarity_diagnostic(const std::vector<EmpiricalMeasure1D>& blocks);

/// Quantile of W1 between two samples of sample_size resampled from the pooled
/// sequence: the same-distribution threshold. Resamples are concatenations of
/// contiguous runs of run_length values (moving-block bootstrap), so serial
/// correlation in the pooled sequence carries over; run_length = 1 is the
/// ordinary i.i.d. bootstrap.
double bootstrap_w1_threshold(const std::vector<double>& pooled, std::size_t sample_size, std::size_t n_boot,
                              double quantile, Engine& rng, std::size_t run_length = 1);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value of the two-sample KS statistic at level alpha.
double ks_critical(std::size_t n, std::size_t m, double alpha);

}  // namespace rsw

#endif  // RSW_ERGODICS_HPP
