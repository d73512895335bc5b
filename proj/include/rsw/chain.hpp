#ifndef RSW_CHAIN_HPP
#define RSW_CHAIN_HPP

// Exact simulation of the switching chain, its observation on a time grid,
// couplings of two copies, and Monte Carlo exponential functionals.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "rsw/generator.hpp"
#include "rsw/random.hpp"
#include "rsw/series.hpp"

namespace rsw {

/// Piecewise-constant right-continuous trajectory on [0, horizon].
struct RegimePath {
  int initial_state = 0;
  std::vector<double> jump_times;  // strictly increasing, in (0, horizon]
  std::vector<int> states;         // post-jump states
  double horizon = 0.0;

  std::size_t n_jumps() const noexcept { return jump_times.size(); }
};

/// Precomputed holding rates and jump tables for one generator.
class ChainSampler {
 public:
  explicit ChainSampler(const GeneratorMatrix& q);

  double holding_time(int state, Engine& rng) const;
  int next_state(int state, Engine& rng) const;
  int n_states() const noexcept { return static_cast<int>(exit_rates_.size()); }

 private:
  std::vector<double> exit_rates_;
  std::vector<std::vector<double>> cumulative_;  // jump CDF per state, over j != i
  std::vector<std::vector<int>> targets_;
};

RegimePath simulate_ctmc(const GeneratorMatrix& q, int i0, double horizon, Engine& rng);
RegimePath simulate_ctmc(const ChainSampler& sampler, int i0, double horizon, Engine& rng);

int state_at(const RegimePath& path, double t);

/// state_at(path, floor(t / delta) delta).
int discretized_state(const RegimePath& path, double t, double delta);

/// Exact int_0^t K_{Lambda(s)} ds, or int_0^t K_{Lambda(s_delta)} ds when
/// delta is given, as a finite sum over constancy intervals.
double integrate_along(const RegimePath& path, const Eigen::VectorXd& k, double t,
                       std::optional<double> delta = std::nullopt);

struct CoupledPath {
  RegimePath path_a;
  RegimePath path_b;
  std::optional<double> meeting_time;
};

/// Independent evolution until the states first coincide, identical afterwards.
CoupledPath merged_coupling(const ChainSampler& sampler, int i, int j, double horizon, Engine& rng);
CoupledPath merged_coupling(const GeneratorMatrix& q, int i, int j, double horizon, Engine& rng);

/// First meeting time of two independent copies started from (i, j).
double coupling_time(const ChainSampler& sampler, int i, int j, Engine& rng);

struct CouplingTimeSample {
  std::vector<double> samples;
  double theta_fit;  // tail rate from log-survival regression on [median, p99]
  double theta_mle;  // exponential MLE, 1 / mean
};

CouplingTimeSample coupling_time_mc(const GeneratorMatrix& q, int i, int j, std::size_t n_paths,
                                    std::uint64_t seed, unsigned workers = 1);

/// Least-squares slope of log empirical survival over [median, p99]; returns
/// minus the slope.
double fit_survival_tail(std::vector<double> samples);

struct MonteCarloEstimate {
  double mean;
  double std_error;
};

MonteCarloEstimate exp_functional_mc(const GeneratorMatrix& q, const Eigen::VectorXd& k, int i0, double t,
                                     std::optional<double> delta, std::size_t n_paths, std::uint64_t seed,
                                     unsigned workers = 1);

/// Same estimator on a whole time grid, one chain path per sample reused
/// across all grid times.
DecaySeries exp_functional_series(const GeneratorMatrix& q, const Eigen::VectorXd& k, int i0,
                                  const std::vector<double>& t_grid, std::optional<double> delta,
                                  std::size_t n_paths, std::uint64_t seed, unsigned workers = 1);

}  // namespace rsw

#endif  // RSW_CHAIN_HPP
