#include "rsw/sde.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rsw/error.hpp"
#include "rsw/parallel.hpp"

namespace rsw {

RegimeCoefficients<double> SwitchingDelayOU::implied_coefficients() const {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::VectorXd alpha(n);
  Eigen::VectorXd beta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    alpha(i) = 2.0 * a[i] + std::abs(b_delay[i]);
    if (noise == NoiseKind::Multiplicative) alpha(i) += sigma[i] * sigma[i];
    beta(i) = std::abs(b_delay[i]);
  }
  const LyapunovVariant variant =
      noise == NoiseKind::Additive ? LyapunovVariant::AdditiveSup : LyapunovVariant::MultiplicativeIntegral;
  return RegimeCoefficients<double>::make(alpha, beta, lag, DelayMeasure::point_mass(-lag, lag), variant);
}

ModelSpec make_switching_delay_ou(const SwitchingDelayOU& p) {
  const std::size_t n = p.a.size();
  if (n < 2 || p.b_delay.size() != n || p.sigma.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "a, b_delay and sigma need one entry per regime (>= 2 regimes)");
  }
  if (!(p.lag > 0.0)) throw Error(ErrorCode::DomainViolation, "lag must be positive");
  ModelSpec m{.name = "switching_delay_ou",
              .dim = 1,
              .brownian_dim = 1,
              .n_regimes = static_cast<int>(n),
              .noise_kind = p.noise,
              .drift = {},
              .diffusion = {},
              .delay_measure = DelayMeasure::point_mass(-p.lag, p.lag),
              .declared_coefficients = p.implied_coefficients(),
              .lipschitz = std::nullopt,
              .linear_drift = true};
  double l = 0, l0 = 0, l1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    l0 = std::max(l0, std::abs(p.a[i]) + std::abs(p.b_delay[i]));
    l1 = std::max(l1, 2.0 * std::max(p.a[i] * p.a[i], p.b_delay[i] * p.b_delay[i]));
    if (p.noise == NoiseKind::Multiplicative) l = std::max(l, p.sigma[i] * p.sigma[i]);
  }
  m.lipschitz = LipschitzConstants{l, l0, l1};

  m.drift = [a = p.a, b = p.b_delay, lag = p.lag](const Segment& seg, int i, Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = a[i] * seg.current_scalar() + b[i] * seg.component_at(-lag);
  };
  if (p.noise == NoiseKind::Additive) {
    m.diffusion = [s = p.sigma](const Segment&, int i, Eigen::Ref<Eigen::MatrixXd> out) { out(0, 0) = s[i]; };
  } else {
    m.diffusion = [s = p.sigma](const Segment& seg, int i, Eigen::Ref<Eigen::MatrixXd> out) {
      out(0, 0) = s[i] * seg.current_scalar();
    };
  }
  return m;
}

ModelSpec make_brownian(int dim, int n_regimes, double tau) {
  ModelSpec m{.name = "brownian",
              .dim = dim,
              .brownian_dim = dim,
              .n_regimes = n_regimes,
              .noise_kind = NoiseKind::Additive,
              .drift = [](const Segment&, int, Eigen::Ref<Eigen::VectorXd> out) { out.setZero(); },
              .diffusion = [](const Segment&, int, Eigen::Ref<Eigen::MatrixXd> out) { out.setIdentity(); },
              .delay_measure = DelayMeasure::point_mass(-tau, tau),
              .declared_coefficients = std::nullopt,
              .lipschitz = LipschitzConstants{0.0, 0.0, 0.0},
              .linear_drift = true};
  return m;
}

Eigen::VectorXd em_step(const Segment& seg, int regime, const Eigen::VectorXd& dw, double delta,
                        const ModelSpec& model) {
  if (dw.size() != model.brownian_dim) throw Error(ErrorCode::ShapeMismatch, "Brownian increment dimension");
  Eigen::VectorXd drift(model.dim);
  Eigen::MatrixXd diffusion(model.dim, model.brownian_dim);
  model.drift(seg, regime, drift);
  model.diffusion(seg, regime, diffusion);
  if (!drift.allFinite() || !diffusion.allFinite()) throw NumericalAbort(0, "drift or diffusion is not finite");
  Eigen::VectorXd next = seg.current() + drift * delta + diffusion * dw;
  if (!next.allFinite()) throw NumericalAbort(0, "state is not finite");
  return next;
}

EulerMaruyama::EulerMaruyama(const ModelSpec& model, Segment initial)
    : model_(&model),
      seg_(std::move(initial)),
      drift_(model.dim),
      diffusion_(model.dim, model.brownian_dim),
      dw_(model.brownian_dim),
      next_(model.dim),
      gauss_(0.0, std::sqrt(seg_.delta())) {
  if (seg_.dim() != model.dim) throw Error(ErrorCode::ShapeMismatch, "initial segment dimension vs model");
}

void EulerMaruyama::step(int regime, const Eigen::Ref<const Eigen::VectorXd>& dw) {
  model_->drift(seg_, regime, drift_);
  model_->diffusion(seg_, regime, diffusion_);
  next_.noalias() = seg_.current();
  next_.noalias() += drift_ * seg_.delta();
  next_.noalias() += diffusion_ * dw;
  if (!next_.allFinite()) throw NumericalAbort(steps_, "non-finite state");
  seg_.advance(next_);
  ++steps_;
}

void EulerMaruyama::step(int regime, Engine& noise) {
  for (Eigen::Index c = 0; c < dw_.size(); ++c) dw_(c) = gauss_(noise);
  step(regime, dw_);
}

int GridRegimes::at(long k) {
  if (state_ < 0) state_ = path_->initial_state;
  const double t = static_cast<double>(k) * delta_;
  while (next_jump_ < path_->jump_times.size() && path_->jump_times[next_jump_] <= t) {
    state_ = path_->states[next_jump_++];
  }
  return state_;
}

long steps_for(double horizon, double delta) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::DomainViolation, "horizon must be positive");
  return std::max(1L, static_cast<long>(std::ceil(horizon / delta - 1e-9)));
}

namespace {

void check_regime(const ModelSpec& model, const GeneratorMatrix& q, int i) {
  if (model.n_regimes != q.n_states()) {
    throw Error(ErrorCode::ShapeMismatch, "model has " + std::to_string(model.n_regimes) +
                                              " regimes, generator has " + std::to_string(q.n_states()));
  }
  if (i < 0 || i >= q.n_states()) throw Error(ErrorCode::DomainViolation, "initial regime out of range");
}

}  // namespace

Trajectory simulate(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i0, double horizon,
                    const StreamIds& ids) {
  check_regime(model, q, i0);
  const double delta = xi.delta();
  const long steps = steps_for(horizon, delta);
  Engine chain_rng = ids.chain();
  Engine noise_rng = ids.noise();
  const RegimePath path = simulate_ctmc(ChainSampler(q), i0, static_cast<double>(steps) * delta, chain_rng);
  GridRegimes grid(path, delta);

  Trajectory out;
  out.delta = delta;
  out.values.resize(steps + 1, model.dim);
  out.regimes.resize(steps + 1);
  out.values.row(0) = xi.current().transpose();
  out.regimes[0] = grid.at(0);
  EulerMaruyama em(model, xi);
  for (long k = 0; k < steps; ++k) {
    em.step(out.regimes[k], noise_rng);
    out.values.row(k + 1) = em.segment().current().transpose();
    out.regimes[k + 1] = grid.at(k + 1);
  }
  return out;
}

std::vector<double> tau_grid(double horizon, const Segment& xi) {
  const long steps = steps_for(horizon, xi.delta());
  std::vector<double> times;
  for (long k = 0; k <= steps; k += xi.m()) times.push_back(static_cast<double>(k) * xi.delta());
  return times;
}

std::vector<double> simulate_coupled_synchronous(const ModelSpec& model, const GeneratorMatrix& q,
                                                 const Segment& xi, const Segment& eta, int i0, double horizon,
                                                 const StreamIds& ids) {
  check_regime(model, q, i0);
  if (!xi.same_grid(eta)) throw Error(ErrorCode::ShapeMismatch, "initial segments on different grids");
  const double delta = xi.delta();
  const long steps = steps_for(horizon, delta);
  Engine chain_rng = ids.chain();
  Engine noise_rng = ids.noise();
  const RegimePath path = simulate_ctmc(ChainSampler(q), i0, static_cast<double>(steps) * delta, chain_rng);
  GridRegimes grid(path, delta);

  std::vector<double> series;
  series.push_back(sup_norm_diff_squared(xi, eta));
  if (model.noise_kind == NoiseKind::Additive && model.linear_drift) {
    Segment gap = difference(xi, eta);
    Eigen::VectorXd drift(model.dim);
    Eigen::VectorXd next(model.dim);
    for (long k = 0; k < steps; ++k) {
      model.drift(gap, grid.at(k), drift);
      next = gap.current() + drift * delta;
      if (!next.allFinite()) throw NumericalAbort(k, "non-finite difference");
      gap.advance(next);
      if ((k + 1) % xi.m() == 0) {
        const double s = sup_norm(gap);
        series.push_back(s * s);
      }
    }
    return series;
  }

  EulerMaruyama a(model, xi);
  EulerMaruyama b(model, eta);
  Eigen::VectorXd dw(model.brownian_dim);
  std::normal_distribution<double> gauss(0.0, std::sqrt(delta));
  for (long k = 0; k < steps; ++k) {
    const int regime = grid.at(k);
    for (Eigen::Index c = 0; c < dw.size(); ++c) dw(c) = gauss(noise_rng);
    a.step(regime, dw);
    b.step(regime, dw);
    if ((k + 1) % xi.m() == 0) series.push_back(sup_norm_diff_squared(a.segment(), b.segment()));
  }
  return series;
}

CoupledRun simulate_coupled_wasserstein(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i,
                                        const Segment& eta, int j, double horizon, const StreamIds& ids) {
  check_regime(model, q, i);
  check_regime(model, q, j);
  if (!xi.same_grid(eta)) throw Error(ErrorCode::ShapeMismatch, "initial segments on different grids");
  const double delta = xi.delta();
  const long steps = steps_for(horizon, delta);
  Engine chain_rng = ids.chain();
  Engine noise_rng = ids.noise();
  const CoupledPath chains = merged_coupling(ChainSampler(q), i, j, static_cast<double>(steps) * delta, chain_rng);
  GridRegimes grid_a(chains.path_a, delta);
  GridRegimes grid_b(chains.path_b, delta);

  EulerMaruyama a(model, xi);
  EulerMaruyama b(model, eta);
  Eigen::VectorXd dw(model.brownian_dim);
  std::normal_distribution<double> gauss(0.0, std::sqrt(delta));
  CoupledRun run;
  run.meeting_time = chains.meeting_time;
  auto record = [&](long k) {
    const double mismatch = grid_a.at(k) != grid_b.at(k) ? 1.0 : 0.0;
    run.rho.push_back(std::sqrt(sup_norm_diff_squared(a.segment(), b.segment())) + mismatch);
    run.x_a.push_back(a.segment().current_scalar());
    run.x_b.push_back(b.segment().current_scalar());
  };
  record(0);
  for (long k = 0; k < steps; ++k) {
    const int ra = grid_a.at(k);
    const int rb = grid_b.at(k);
    for (Eigen::Index c = 0; c < dw.size(); ++c) dw(c) = gauss(noise_rng);
    a.step(ra, dw);
    b.step(rb, dw);
    if ((k + 1) % xi.m() == 0) record(k + 1);
  }
  return run;
}

CoupledEnsemble wasserstein_ensemble(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i,
                                     const Segment& eta, int j, double horizon, std::size_t n_paths,
                                     std::uint64_t seed, unsigned workers) {
  CoupledEnsemble out;
  out.times = tau_grid(horizon, xi);
  const auto n_times = static_cast<Eigen::Index>(out.times.size());
  const auto n = static_cast<Eigen::Index>(n_paths);
  out.rho.resize(n, n_times);
  out.x_a.resize(n, n_times);
  out.x_b.resize(n, n_times);
  map_blocks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const CoupledRun run = simulate_coupled_wasserstein(model, q, xi, i, eta, j, horizon, StreamIds::from(seed, p));
      const auto r = static_cast<Eigen::Index>(p);
      for (Eigen::Index c = 0; c < n_times; ++c) {
        out.rho(r, c) = run.rho[c];
        out.x_a(r, c) = run.x_a[c];
        out.x_b(r, c) = run.x_b[c];
      }
    }
    return 0;
  });
  return out;
}

DecaySeries contraction_series(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi,
                               const Segment& eta, int i0, double horizon, std::size_t n_paths, std::uint64_t seed,
                               unsigned workers) {
  const std::vector<double> times = tau_grid(horizon, xi);
  auto blocks = map_blocks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    SeriesAccumulator acc(times);
    for (std::size_t p = begin; p < end; ++p) {
      acc.add_path(simulate_coupled_synchronous(model, q, xi, eta, i0, horizon, StreamIds::from(seed, p)));
    }
    return acc;
  });
  SeriesAccumulator total(times);
  for (const auto& b : blocks) total.merge(b);
  return total.finish();
}

DecaySeries second_moment_series(const ModelSpec& model, const GeneratorMatrix& q, const Segment& xi, int i0,
                                 double horizon, std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  check_regime(model, q, i0);
  const std::vector<double> times = tau_grid(horizon, xi);
  const double delta = xi.delta();
  const long steps = steps_for(horizon, delta);
  const ChainSampler sampler(q);
  auto blocks = map_blocks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    SeriesAccumulator acc(times);
    std::vector<double> row;
    for (std::size_t p = begin; p < end; ++p) {
      const StreamIds ids = StreamIds::from(seed, p);
      Engine chain_rng = ids.chain();
      Engine noise_rng = ids.noise();
      const RegimePath path = simulate_ctmc(sampler, i0, static_cast<double>(steps) * delta, chain_rng);
      GridRegimes grid(path, delta);
      EulerMaruyama em(model, xi);
      row.clear();
      const double s0 = sup_norm(xi);
      row.push_back(s0 * s0);
      for (long k = 0; k < steps; ++k) {
        em.step(grid.at(k), noise_rng);
        if ((k + 1) % xi.m() == 0) {
          const double s = sup_norm(em.segment());
          row.push_back(s * s);
        }
      }
      acc.add_path(row);
    }
    return acc;
  });
  SeriesAccumulator total(times);
  for (const auto& b : blocks) total.merge(b);
  return total.finish();
}

}  // namespace rsw
