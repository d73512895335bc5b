// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rsw/commands.hpp"
#include "rsw/ergodics.hpp"
#include "rsw/io.hpp"
#include "rsw/parallel.hpp"

using namespace rsw;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

GeneratorMatrix two_state(double gamma) {
  Eigen::MatrixXd q(2, 2);
  q << -1.0, 1.0, gamma, -gamma;
  return GeneratorMatrix::validate(q);
}

RunConfig config(const std::string& name) {
  return load_config((std::filesystem::path(RSW_CONFIG_DIR) / name).string());
}

const json* find_check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"]) {
    if (c["name"] == name) return &c;
  }
  return nullptr;
}

std::string stat(const json& report, const std::string& name) {
  const json* c = find_check(report, name);
  if (!c) return name + "=missing";
  std::ostringstream s;
  s << name << "=" << c->at("statistic").dump() << c->at("relation").get<std::string>() << c->at("threshold").dump();
  return s.str();
}

unsigned workers() { return default_workers(); }

void criterion1(Outcome& o) {
  double worst = 0;
  for (double gamma : {0.5, 1.0, 2.0, 5.0}) {
    const Eigen::VectorXd pi = stationary_distribution(two_state(gamma));
    worst = std::max({worst, std::abs(pi(0) - gamma / (1 + gamma)), std::abs(pi(1) - 1 / (1 + gamma))});
  }
  o.detail << "stationary law, 4 generators, max error " << worst << " <= 1e-12";
  o.require(worst <= 1e-12, "stationary law");
}

void criterion2(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), rate(0.1, 5.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double alpha = coef(rng), beta = coef(rng), gamma = rate(rng);
    // det(lambda - Q - diag(alpha, beta)) = lambda^2 - (alpha + beta - 1 - gamma) lambda + c
    const double tr = alpha + beta - 1 - gamma;
    const double c = (alpha - 1) * (beta - gamma) - gamma;
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4 * c));
    const double closed = -std::max(((tr + disc) / 2.0).real(), ((tr - disc) / 2.0).real());
    const double numeric = spectral_abscissa_rate(two_state(gamma), Eigen::Vector2d(alpha, beta));
    worst = std::max(worst, std::abs(closed - numeric));
  }
  double worst_zero = 0;
  std::uniform_int_distribution<int> size(2, 16);
  std::uniform_real_distribution<double> off(0.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const int n = size(rng);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) q(i, j) = 0.05 + off(rng);
      }
      q(i, i) = -q.row(i).sum();
    }
    worst_zero = std::max(worst_zero, std::abs(spectral_abscissa_rate(GeneratorMatrix::validate(q), Eigen::VectorXd::Zero(n))));
  }
  o.detail << "quadratic vs eigen-solver max " << worst << " <= 1e-9; eta(Q,0) max " << worst_zero << " <= 1e-10";
  o.require(worst <= 1e-9, "quadratic sweep");
  o.require(worst_zero <= 1e-10, "eta(Q, 0)");
}

void criterion3(Outcome& o) {
  const auto q = GeneratorMatrix::validate(Eigen::MatrixXd{{-1.0, 1.0}, {2.0, -2.0}});
  const Eigen::Vector2d k(1.0, -1.0);
  double worst_z = 0;
  std::uint64_t cell = 0;
  for (double t : {0.5, 1.0, 2.0}) {
    for (int i0 : {0, 1}) {
      const auto est = exp_functional_mc(q, k, i0, t, std::nullopt, 1000000, derive_seed(31, StreamKind::Auxiliary, cell++),
                                         workers());
      worst_z = std::max(worst_z, std::abs(est.mean - feynman_kac_expectation(q, k, t, i0)) / est.std_error);
    }
  }
  o.detail << "oracle cells n=1e6 max|z| " << worst_z << " <= 3";
  o.require(worst_z <= 3.0, "oracle z");

  const auto res = run_command("expfun", config("expfun.yaml"), {workers()});
  o.detail << "; eta_K " << res.report["eta_K"].dump() << ", " << stat(res.report, "rate_vs_half_eta") << ", "
           << stat(res.report, "rates_nondecreasing_as_delta_shrinks");
  o.require(res.exit_code == kExitOk && res.report["passed"].get<bool>(), "expfun rate checks");
}

void criterion4(Outcome& o) {
  double worst = 0;
  for (double gamma : {0.5, 1.0, 2.0, 5.0}) {
    const auto s = coupling_time_mc(two_state(gamma), 0, 1, 100000, derive_seed(41, StreamKind::Auxiliary, 0), workers());
    worst = std::max(worst, std::abs(s.theta_fit - (1 + gamma)) / (1 + gamma));
  }
  o.detail << "theta fit max relative error " << worst << " <= 0.1";
  o.require(worst <= 0.1, "theta");

  // Occupation of state 0 over [0, T] for each marginal of the merged coupling.
  const double gamma = 2.0, horizon = 3.0, r = 1 + gamma, pi0 = gamma / (1 + gamma);
  const auto q = two_state(gamma);
  const std::size_t n = 20000;
  const Eigen::Vector2d indicator(1.0, 0.0);
  MomentAccumulator fa, fb;
  for (std::uint64_t s = 0; s < n; ++s) {
    Engine rng = make_stream(42, StreamKind::Chain, s);
    const auto c = merged_coupling(q, 0, 1, horizon, rng);
    fa.add(integrate_along(c.path_a, indicator, horizon) / horizon);
    fb.add(integrate_along(c.path_b, indicator, horizon) / horizon);
  }
  auto exact = [&](double start) { return pi0 + (start - pi0) * (1.0 - std::exp(-r * horizon)) / (r * horizon); };
  const double za = std::abs(fa.mean() - exact(1.0)) / fa.std_error();
  const double zb = std::abs(fb.mean() - exact(0.0)) / fb.std_error();
  o.detail << "; merged-coupling occupation |z| " << za << ", " << zb << " <= 3";
  o.require(za <= 3 && zb <= 3, "occupation");
}

void criterion5(Outcome& o) {
  const auto q = two_state(1.0);
  const std::size_t n = 100000;
  {
    const auto model = make_brownian(1, 2, 0.5);
    const auto xi = Segment::constant(Eigen::VectorXd::Constant(1, 0.7), 0.5, 5);
    MomentAccumulator end, sq, cross;
    std::vector<double> ends;
    ends.reserve(n);
    for (std::size_t p = 0; p < n; ++p) {
      const auto traj = simulate(model, q, xi, 0, 1.0, StreamIds::from(51, p));
      ends.push_back(traj.values(10, 0));
      end.add(traj.values(10, 0));
      cross.add((traj.values(5, 0) - traj.values(4, 0)) * (traj.values(6, 0) - traj.values(5, 0)) / 0.1);
    }
    for (double x : ends) sq.add((x - end.mean()) * (x - end.mean()));
    const double zm = std::abs(end.mean() - 0.7) / end.std_error();
    const double zv = std::abs(sq.mean() - 1.0) / sq.std_error();
    const double zc = std::abs(cross.mean()) / cross.std_error();
    o.detail << "Brownian n=1e5 |z| mean " << zm << ", var " << zv << ", lag-corr " << zc << " <= 3";
    o.require(zm <= 3 && zv <= 3 && zc <= 3, "Brownian moments");
  }
  {
    const double a = -1.0, sigma = 0.5, y0 = 10.0, horizon = 1.0;
    const auto model = make_switching_delay_ou({{a, a}, {0.0, 0.0}, {sigma, sigma}, 0.5, NoiseKind::Additive});
    double bias[2];
    double worst_z = 0;
    int idx = 0;
    for (int m : {5, 10}) {
      const auto xi = Segment::constant(Eigen::VectorXd::Constant(1, y0), 0.5, m);
      const double delta = xi.delta();
      MomentAccumulator mean, sq;
      std::vector<double> ends;
      ends.reserve(n);
      for (std::size_t p = 0; p < n; ++p) {
        const auto traj = simulate(model, q, xi, 0, horizon, StreamIds::from(52 + m, p));
        ends.push_back(traj.values(traj.values.rows() - 1, 0));
        mean.add(ends.back());
      }
      for (double x : ends) sq.add((x - mean.mean()) * (x - mean.mean()));
      const double ou_mean = y0 * std::exp(a * horizon);
      const double ou_var = sigma * sigma * (std::exp(2 * a * horizon) - 1) / (2 * a);
      const int steps = static_cast<int>(std::lround(horizon / delta));
      const double g = 1 + a * delta;
      double em_var = 0;
      for (int k = 0; k < steps; ++k) em_var += sigma * sigma * delta * std::pow(g, 2 * k);
      // Deviation from the exact OU law beyond the scheme's own bias.
      const double bias_mean = y0 * std::pow(g, steps) - ou_mean;
      worst_z = std::max(worst_z, std::abs(mean.mean() - ou_mean - bias_mean) / mean.std_error());
      worst_z = std::max(worst_z, std::abs(sq.mean() - ou_var - (em_var - ou_var)) / sq.std_error());
      bias[idx++] = mean.mean() - ou_mean;
    }
    const double ratio = bias[1] / bias[0];
    o.detail << "; frozen OU |z| " << worst_z << " <= 3, bias ratio delta/2 : delta " << ratio << " in [0.35, 0.65]";
    o.require(worst_z <= 3, "OU moments");
    o.require(ratio >= 0.35 && ratio <= 0.65, "bias halving");
  }
}

void criterion6(Outcome& o) {
  for (const char* name : {"additive.yaml", "example1.yaml", "multiplicative.yaml"}) {
    const RunConfig cfg = config(name);
    const auto res = run_command("contract", cfg, {workers()});
    const double eta = res.report["certificate"]["eta"].get<double>();
    o.detail << name << " " << res.report["certificate"]["name"].get<std::string>() << "=" << eta
             << " horizon*eta=" << cfg.horizon * eta << " " << stat(res.report, "rate_vs_certificate") << "; ";
    o.require(res.exit_code == kExitOk && res.report["verdict"] == "pass", name);
    o.require(cfg.horizon * eta >= 30 * (1 - 1e-3) && cfg.n_paths >= 10000, std::string(name) + " scale");
  }
  // Difference determinism: the additive-noise difference ignores the Brownian stream.
  const RunConfig cfg = config("additive.yaml");
  const ModelSpec model = build_model(cfg);
  const GeneratorMatrix q = build_generator(cfg);
  const Segment xi = build_segment(cfg, cfg.xi, 1), eta = build_segment(cfg, cfg.eta, 1);
  bool same = true;
  for (std::uint64_t p = 0; p < 200; ++p) {
    const auto a = simulate_coupled_synchronous(model, q, xi, eta, 0, 30.0, {p, 1000 + p, 0});
    const auto b = simulate_coupled_synchronous(model, q, xi, eta, 0, 30.0, {p, 5000 + p, 0});
    same = same && a == b;
  }
  o.detail << "additive difference identical across noise streams: " << (same ? "yes" : "no");
  o.require(same, "difference determinism");
}

void criterion7(Outcome& o) {
  for (const char* name : {"additive.yaml", "example1.yaml"}) {
    const auto res = run_command("wasserstein", config(name), {workers()});
    o.detail << name << " theta=" << res.report["theta_fit"].dump() << " " << stat(res.report, "rate_vs_theory") << " "
             << stat(res.report, "coupling_dominates_marginal_w1") << "; ";
    o.require(res.exit_code == kExitOk && res.report["verdict"] == "pass", name);
  }
}

// Frozen envelope constant for sup_t E||Y_t||^2 <= C (1 + ||xi||^2) on the
// Example-1 model.
constexpr double kEnvelope = 2.0;

void criterion8(Outcome& o) {
  const auto res = run_command("invariant", config("invariant.yaml"), {workers()});
  o.detail << stat(res.report, "initial_condition_forgetting") << " " << stat(res.report, "regime_frequencies_vs_pi") << " "
           << stat(res.report, "refinement_nonincreasing") << " " << stat(res.report, "consecutive_blocks");
  o.require(res.exit_code == kExitOk && res.report["verdict"] == "pass", "invariant checks");

  const RunConfig cfg = config("example1.yaml");
  const ModelSpec model = build_model(cfg);
  const GeneratorMatrix q = build_generator(cfg);
  double worst = 0;
  for (double c : {0.0, 1.0, 10.0}) {
    const Segment xi = Segment::constant(Eigen::VectorXd::Constant(1, c), cfg.tau, cfg.m);
    const auto s = second_moment_series(model, q, xi, cfg.i0, 100.0, 2000, derive_seed(81, StreamKind::Auxiliary, 0), workers());
    double peak = 0;
    for (std::size_t k = 0; k < s.size(); ++k) peak = std::max(peak, s.means[k] + 3 * s.std_errors[k]);
    worst = std::max(worst, peak / (1 + c * c));
  }
  o.detail << "; second moment sup/(1+|xi|^2) " << worst << " <= " << kEnvelope;
  o.require(worst <= kEnvelope, "second-moment envelope");
}

void criterion9(Outcome& o) {
  const RunConfig cfg = config("multiplicative.yaml");
  const ModelSpec model = build_model(cfg);
  const Segment xi = Segment::from_function([](double t) { return 1.0 + t; }, cfg.tau, cfg.m);
  const std::size_t n = 10000, k0 = 37;
  std::vector<double> first, later;
  for (std::size_t p = 0; p < n; ++p) {
    Engine noise = StreamIds::from(91, p).noise();
    EulerMaruyama em0(model, xi);
    em0.step(0, noise);
    first.push_back(em0.segment().current_scalar());
    EulerMaruyama run(model, xi);
    for (std::size_t k = 0; k < k0; ++k) run.step(0, noise);
    EulerMaruyama restart(model, xi);
    restart.step(0, noise);
    later.push_back(restart.segment().current_scalar());
  }
  const double d = ks_two_sample(first, later), crit = ks_critical(n, n, 0.001);
  o.detail << "one-step KS step 0 vs step " << k0 << ": D=" << d << " < " << crit << " (0.999 quantile), n=1e4";
  o.require(d < crit, "KS");
}

std::string fingerprint(const CommandResult& r) {
  std::string s = r.report.dump() + "\n" + std::to_string(r.exit_code) + "\n" + r.table;
  for (const auto& f : r.files) s += "\n--" + f.name + "\n" + f.content;
  return s;
}

void criterion10(Outcome& o) {
  struct Run {
    std::string command, file;
  };
  const std::vector<Run> runs{{"analyze", "additive.yaml"},       {"simulate", "additive.yaml"},
                              {"contract", "multiplicative.yaml"}, {"wasserstein", "additive.yaml"},
                              {"expfun", "expfun.yaml"},          {"invariant", "invariant.yaml"},
                              {"check-example1", "example1.yaml"}};
  int identical = 0;
  for (const auto& run : runs) {
    RunConfig cfg = config(run.file);
    cfg.n_paths = std::min<std::size_t>(cfg.n_paths, 2000);
    cfg.horizon = std::min(cfg.horizon, 40.0);
    cfg.burn_in = std::min(cfg.burn_in, cfg.horizon - cfg.tau);
    cfg.expfun_paths = std::min<std::size_t>(cfg.expfun_paths, 20000);
    cfg.n_samples = std::min<std::size_t>(cfg.n_samples, 2000);
    const std::string one = fingerprint(run_command(run.command, cfg, {1}));
    const bool same = fingerprint(run_command(run.command, cfg, {4})) == one &&
                      fingerprint(run_command(run.command, cfg, {16})) == one;
    identical += same;
    o.require(same, run.command);
  }
  o.detail << identical << "/" << runs.size() << " commands byte-identical across 1, 4, 16 workers";
}

}  // namespace

int main() {
  const std::vector<std::function<void(Outcome&)>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                             criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
