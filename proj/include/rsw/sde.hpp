#ifndef RSW_SDE_HPP
#define RSW_SDE_HPP

// Euler-Maruyama integration of path-dependent SDEs with Markov switching,
// observed through the linearly interpolated delay window, and the coupled
// simulations built on it.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsw/chain.hpp"
#include "rsw/generator.hpp"
#include "rsw/segment.hpp"
#include "rsw/series.hpp"

namespace rsw {

enum class NoiseKind { Additive, Multiplicative };

struct LipschitzConstants {
  double l;   // diffusion, against |x(0) - y(0)|^2 + int |x - y|^2 dv
  double l0;  // drift, against the uniform norm
  double l1;  // squared drift, same right-hand side as l
};

using DriftFn = std::function<void(const Segment&, int regime, Eigen::Ref<Eigen::VectorXd> out)>;
using DiffusionFn = std::function<void(const Segment&, int regime, Eigen::Ref<Eigen::MatrixXd> out)>;

/// Drift b(xi, i) and diffusion sigma(xi, i) per regime. Both write into
/// caller-owned buffers so the integrator never allocates per step.
struct ModelSpec {
  std::string name;
  int dim = 1;
  int brownian_dim = 1;
  int n_regimes = 2;
  NoiseKind noise_kind = NoiseKind::Additive;
  DriftFn drift;
  DiffusionFn diffusion;
  DelayMeasure delay_measure;
  std::optional<RegimeCoefficients<double>> declared_coefficients;
  std::optional<LipschitzConstants> lipschitz;
  bool linear_drift = false;  // b(xi - eta, i) = b(xi, i) - b(eta, i)
};

/// Scalar OU process with a discrete lag and per-regime coefficients:
/// dX = (a_i X(t) + b_i X(t - lag)) dt + sigma_i dW           (additive)
/// dX = (a_i X(t) + b_i X(t - lag)) dt + sigma_i X(t) dW      (multiplicative)
struct SwitchingDelayOU {
  std::vector<double> a;
  std::vector<double> b_delay;
  std::vector<double> sigma;
  double lag = 1.0;
  NoiseKind noise = NoiseKind::Additive;

  /// Dissipativity constants implied by the coefficients, with v = point mass at -lag:
  /// alpha_i = 2 a_i + |b_i| (+ sigma_i^2 when multiplicative), beta_i = |b_i|.
  RegimeCoefficients<double> implied_coefficients() const;
};

ModelSpec make_switching_delay_ou(const SwitchingDelayOU& p);

/// b = 0, sigma = identity in every regime.
ModelSpec make_brownian(int dim, int n_regimes, double tau);

/// Y(k delta) + b(Y_{k delta}, i) delta + sigma(Y_{k delta}, i) dW.
Eigen::VectorXd em_step(const Segment& seg, int regime, const Eigen::VectorXd& dw, double delta,
                        const ModelSpec& model);

/// Stateful single-path integrator that owns its window and scratch buffers.
class EulerMaruyama {
 public:
  EulerMaruyama(const ModelSpec& model, Segment initial);

  /// One step in the given regime with Brownian increment dw ~ N(0, delta I).
  void step(int regime, const Eigen::Ref<const Eigen::VectorXd>& dw);
  /// Draws dw from the stream, then steps.
  void step(int regime, Engine& noise);

  const Segment& segment() const noexcept { return seg_; }
  long steps() const noexcept { return steps_; }
  double delta() const noexcept { return seg_.delta(); }

 private:
  const ModelSpec* model_;
  Segment seg_;
  Eigen::VectorXd drift_;
  Eigen::MatrixXd diffusion_;
  Eigen::VectorXd dw_;
  Eigen::VectorXd next_;
  std::normal_distribution<double> gauss_;
  long steps_ = 0;
};

/// Regime observed at successive grid times k delta of a stored path.
class GridRegimes {
 public:
  GridRegimes(const RegimePath& path, double delta) : path_(&path), delta_(delta) {}
  int at(long k);  // k must be nondecreasing across calls

 private:
  const RegimePath* path_;
  double delta_;
  std::size_t next_jump_ = 0;
  int state_ = -1;
};

/// Per-trajectory stream identity. Chain and noise masters are separate so
/// tests can vary one while pinning the other.
struct StreamIds {
  std::uint64_t chain_master;
  std::uint64_t noise_master;
  std::uint64_t index;

  static StreamIds from(std::uint64_t seed, std::uint64_t index) { return {seed, seed, index}; }
  Engine chain() const { return make_stream(chain_master, StreamKind::Chain, index); }
  Engine noise() const { return make_stream(noise_master, StreamKind::Noise, index); }
};

struct Trajectory {
  double delta = 0.0;
  Eigen::MatrixXd values;    // (steps + 1) x dim, row k is Y(k delta)
  std::vector<int> regimes;  // Lambda(k delta)

  std::size_t size() const noexcept { return regimes.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * delta; }
};

/// Number of EM steps covering [0, horizon] on the grid of xi.
long steps_for(double horizon, double delta);

Trajectory simulate(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i0, double horizon,
                    const StreamIds& ids);

/// Times 0, tau, 2 tau, ... at which decay series are sampled.
std::vector<double> tau_grid(double horizon, const Segment& xi);

/// ||Y_t(xi, i) - Y_t(eta, i)||_inf^2 at multiples of tau, both copies driven
/// by the same chain path and the same Brownian increments. Additive noise
/// with a linear drift integrates the difference segment itself, which never
/// touches the noise stream.
std::vector<double> simulate_coupled_synchronous(const ModelSpec& model, const GeneratorMatrix& q,
                                                 const Segment& xi, const Segment& eta, int i0, double horizon,
                                                 const StreamIds& ids);

struct CoupledRun {
  std::vector<double> rho;  // ||Y_t - Y'_t||_inf + 1{regimes differ}
  std::vector<double> x_a;  // first component of Y(t)
  std::vector<double> x_b;
  std::optional<double> meeting_time;
};

/// Merged chain coupling from (i, j) plus shared Brownian increments.
CoupledRun simulate_coupled_wasserstein(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i,
                                        const Segment& eta, int j, double horizon, const StreamIds& ids);

struct CoupledEnsemble {
  std::vector<double> times;
  Eigen::MatrixXd rho;  // n_paths x n_times
  Eigen::MatrixXd x_a;
  Eigen::MatrixXd x_b;
};

CoupledEnsemble wasserstein_ensemble(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i,
                                     const Segment& eta, int j, double horizon, std::size_t n_paths,
                                     std::uint64_t seed, unsigned workers = 1);

/// Mean of the synchronous-coupling series over n_paths trajectories.
DecaySeries contraction_series(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi,
                               const Segment& eta, int i0, double horizon, std::size_t n_paths, std::uint64_t seed,
                               unsigned workers = 1);

/// Monte Carlo means of ||Y_t||_inf^2 at multiples of tau.
DecaySeries second_moment_series(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i0,
                                 double horizon, std::size_t n_paths, std::uint64_t seed, unsigned workers = 1);

}  // namespace rsw

#endif  // RSW_SDE_HPP
