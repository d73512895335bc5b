#ifndef RSW_GENERATOR_HPP
#define RSW_GENERATOR_HPP

// Linear algebra on the rate matrix of the switching chain: validation,
// stationary law, spectral rates of Q + diag(K), the matrix-exponential
// Feynman-Kac oracle and the closed-form checks of the two-state OU example.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rsw/delay_measure.hpp"
#include "rsw/error.hpp"

namespace rsw {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr Eigen::Index kMaxStates = 64;
inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kVerdictTolerance = 1e-8;

/// Validated N x N transition-rate matrix: nonnegative off-diagonal rates,
/// zero row sums, strongly connected jump graph.
template <typename Scalar>
class Generator {
 public:
  template <typename Derived>
  static Generator validate(const Eigen::MatrixBase<Derived>& raw) {
    const Eigen::Index n = raw.rows();
    if (raw.cols() != n) throw Error(ErrorCode::ShapeMismatch, "rate matrix must be square");
    if (n < 2 || n > kMaxStates) {
      throw Error(ErrorCode::DomainViolation,
                  "number of states must lie in [2, " + std::to_string(kMaxStates) + "]");
    }
    Matrix<Scalar> q = raw.template cast<Scalar>();
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar off = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(static_cast<double>(q(i, j)))) {
          throw Error(ErrorCode::NonFiniteValue, "rate (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
        if (i == j) continue;
        if (q(i, j) < 0) {
          throw Error(ErrorCode::NegativeOffDiagonal,
                      "q(" + std::to_string(i) + "," + std::to_string(j) + ") < 0");
        }
        off += q(i, j);
      }
      const Scalar row_sum = off + q(i, i);
      if (std::abs(static_cast<double>(row_sum)) > kRowSumTolerance) {
        throw Error(ErrorCode::RowSumNonzero,
                    "row " + std::to_string(i) + " sums to " + std::to_string(static_cast<double>(row_sum)));
      }
      q(i, i) = -off;
    }
    if (!strongly_connected(q)) throw Error(ErrorCode::NotIrreducible, "jump graph is not strongly connected");
    return Generator(std::move(q));
  }

  Eigen::Index n_states() const noexcept { return q_.rows(); }
  const Matrix<Scalar>& rates() const noexcept { return q_; }
  Scalar rate(Eigen::Index i, Eigen::Index j) const { return q_(i, j); }
  Scalar exit_rate(Eigen::Index i) const { return -q_(i, i); }

 private:
  explicit Generator(Matrix<Scalar> q) : q_(std::move(q)) {}

  static bool strongly_connected(const Matrix<Scalar>& q) {
    const Eigen::Index n = q.rows();
    // Transitive closure (N <= 64).
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (Eigen::Index i = 0; i < n; ++i) {
      reach[i][i] = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j && q(i, j) > 0) reach[i][j] = true;
      }
    }
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        if (reach[i][k])
          for (Eigen::Index j = 0; j < n; ++j)
            if (reach[k][j]) reach[i][j] = true;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (!reach[i][j]) return false;
    return true;
  }

  Matrix<Scalar> q_;
};

using GeneratorMatrix = Generator<double>;

enum class LyapunovVariant { AdditiveSup, MultiplicativeIntegral, DiscretizedMultiplicative };

constexpr const char* to_string(LyapunovVariant v) {
  switch (v) {
    case LyapunovVariant::AdditiveSup: return "additive_sup";
    case LyapunovVariant::MultiplicativeIntegral: return "multiplicative_integral";
    case LyapunovVariant::DiscretizedMultiplicative: return "discretized_multiplicative";
  }
  return "unknown";
}

/// Per-regime dissipativity constants (alpha_i, beta_i) of the drift, with the
/// delay length and delay measure they were stated for.
template <typename Scalar>
struct RegimeCoefficients {
  Vector<Scalar> alpha;
  Vector<Scalar> beta;
  Scalar tau;
  DelayMeasure delay_measure;
  LyapunovVariant variant = LyapunovVariant::AdditiveSup;

  static RegimeCoefficients make(Vector<Scalar> alpha, Vector<Scalar> beta, Scalar tau, DelayMeasure v,
                                 LyapunovVariant variant) {
    if (alpha.size() != beta.size()) throw Error(ErrorCode::ShapeMismatch, "alpha and beta lengths differ");
    if (!(tau > 0)) throw Error(ErrorCode::DomainViolation, "tau must be positive");
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      if (!(beta(i) >= 0)) throw Error(ErrorCode::DomainViolation, "beta_i must be nonnegative");
      if (!std::isfinite(static_cast<double>(alpha(i)))) throw Error(ErrorCode::NonFiniteValue, "alpha_i");
    }
    return RegimeCoefficients{std::move(alpha), std::move(beta), tau, std::move(v), variant};
  }

  Scalar alpha_hat() const { return alpha.minCoeff(); }
  Scalar alpha_check() const { return alpha.cwiseAbs().maxCoeff(); }
  Scalar beta_check() const { return beta.maxCoeff(); }
};

/// Diagonal perturbation K of Q for the chosen variant:
///   AdditiveSup                K_i = alpha_i + exp(-alpha_hat tau) beta_i
///   MultiplicativeIntegral     K_i = alpha_i + beta_i * int exp(alpha_hat theta) v(dtheta)
///   DiscretizedMultiplicative  K_i = alpha_i + 4 exp(-alpha_hat tau) beta_i
template <typename Scalar>
Vector<Scalar> lyapunov_diagonal(const RegimeCoefficients<Scalar>& c) {
  using std::exp;
  const Scalar ah = c.alpha_hat();
  Scalar factor = 0;
  switch (c.variant) {
    case LyapunovVariant::AdditiveSup: factor = exp(-ah * c.tau); break;
    case LyapunovVariant::MultiplicativeIntegral:
      factor = static_cast<Scalar>(
          c.delay_measure.integrate([&](double theta) { return std::exp(static_cast<double>(ah) * theta); }));
      break;
    case LyapunovVariant::DiscretizedMultiplicative: factor = Scalar(4) * exp(-ah * c.tau); break;
  }
  return c.alpha + factor * c.beta;
}

template <typename Scalar>
struct StationarySolve {
  Vector<Scalar> pi;
  Scalar rcond;  // reciprocal condition estimate of the bordered system
};

/// Solves pi Q = 0, sum(pi) = 1 by replacing the last equation of Q^T pi = 0
/// with the normalization row.
template <typename Scalar>
StationarySolve<Scalar> solve_stationary(const Generator<Scalar>& q) {
  const Eigen::Index n = q.n_states();
  Matrix<Scalar> a = q.rates().transpose();
  a.row(n - 1).setOnes();
  Vector<Scalar> rhs = Vector<Scalar>::Zero(n);
  rhs(n - 1) = 1;
  Eigen::PartialPivLU<Matrix<Scalar>> lu(a);
  const Scalar rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<Scalar>::epsilon())) {
    throw Error(ErrorCode::SingularSystem, "stationary system is numerically singular");
  }
  Vector<Scalar> pi = lu.solve(rhs);
  pi += lu.solve(rhs - a * pi);  // one step of iterative refinement
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(pi(i) > 0) || !std::isfinite(static_cast<double>(pi(i)))) {
      throw Error(ErrorCode::SingularSystem, "stationary solve produced a nonpositive weight");
    }
  }
  pi /= pi.sum();
  return {std::move(pi), rcond};
}

template <typename Scalar>
Vector<Scalar> stationary_distribution(const Generator<Scalar>& q) {
  return solve_stationary(q).pi;
}

/// -max Re spec(A) for an arbitrary square matrix expression.
template <typename Derived>
typename Derived::Scalar spectral_abscissa_rate(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::EigenSolver<Matrix<Scalar>> solver(a.eval(), false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "eigenvalue iteration failed");
  return -solver.eigenvalues().real().maxCoeff();
}

/// eta = -max Re spec(Q + diag K).
template <typename Scalar, typename Derived>
Scalar spectral_abscissa_rate(const Generator<Scalar>& q, const Eigen::MatrixBase<Derived>& k) {
  if (k.size() != q.n_states()) throw Error(ErrorCode::ShapeMismatch, "K length differs from state count");
  Matrix<Scalar> a = q.rates();
  a.diagonal() += k.template cast<Scalar>();
  return spectral_abscissa_rate(a);
}

/// exp(A) by scaling and squaring with a fixed degree-13 Pade approximant.
template <typename Derived>
Matrix<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& a_in) {
  using Scalar = typename Derived::Scalar;
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  Matrix<Scalar> a = a_in;
  const Eigen::Index n = a.rows();
  const double norm1 = static_cast<double>(a.cwiseAbs().colwise().sum().maxCoeff());
  int squarings = 0;
  if (norm1 > theta13) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  a /= static_cast<Scalar>(std::ldexp(1.0, squarings));

  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  const Matrix<Scalar> a2 = a * a;
  const Matrix<Scalar> a4 = a2 * a2;
  const Matrix<Scalar> a6 = a4 * a2;
  auto s = [](double v) { return static_cast<Scalar>(v); };
  const Matrix<Scalar> u_inner = a6 * (s(b[13]) * a6 + s(b[11]) * a4 + s(b[9]) * a2) + s(b[7]) * a6 +
                                 s(b[5]) * a4 + s(b[3]) * a2 + s(b[1]) * id;
  const Matrix<Scalar> u = a * u_inner;
  const Matrix<Scalar> v = a6 * (s(b[12]) * a6 + s(b[10]) * a4 + s(b[8]) * a2) + s(b[6]) * a6 +
                           s(b[4]) * a4 + s(b[2]) * a2 + s(b[0]) * id;
  Matrix<Scalar> r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = (r * r).eval();
  return r;
}

/// Vector of E_i[exp(int_0^t K_{Lambda(s)} ds)] over all starting regimes i,
/// i.e. exp(t (Q + diag K)) 1.
template <typename Scalar, typename Derived>
Vector<Scalar> feynman_kac_vector(const Generator<Scalar>& q, const Eigen::MatrixBase<Derived>& k, Scalar t) {
  if (k.size() != q.n_states()) throw Error(ErrorCode::ShapeMismatch, "K length differs from state count");
  if (!(t >= 0)) throw Error(ErrorCode::DomainViolation, "t must be nonnegative");
  Matrix<Scalar> a = q.rates();
  a.diagonal() += k.template cast<Scalar>();
  return expm((t * a).eval()) * Vector<Scalar>::Ones(q.n_states());
}

template <typename Scalar, typename Derived>
Scalar feynman_kac_expectation(const Generator<Scalar>& q, const Eigen::MatrixBase<Derived>& k, Scalar t,
                               Eigen::Index i) {
  if (i < 0 || i >= q.n_states()) throw Error(ErrorCode::DomainViolation, "regime index out of range");
  return feynman_kac_vector(q, k, t)(i);
}

struct RemarkConditions {
  bool mean_negative;  // sum_i K_i pi_i < 0
  bool min_ratio;      // min over K_i > 0 of -q_ii / K_i > 1 (vacuous when no K_i > 0)
};

/// Relaxed ergodicity conditions evaluated on an arbitrary diagonal K.
template <typename Scalar, typename Derived>
RemarkConditions remark_conditions(const Generator<Scalar>& q, const Eigen::MatrixBase<Derived>& k,
                                   const Vector<Scalar>& pi) {
  RemarkConditions out{k.template cast<Scalar>().dot(pi) < 0, true};
  bool any = false;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (k(i) > 0) {
      any = true;
      best = std::min(best, q.exit_rate(i) / static_cast<Scalar>(k(i)));
    }
  }
  if (any) out.min_ratio = best > 1;
  return out;
}

template <typename Scalar>
RemarkConditions check_remark_conditions(const RegimeCoefficients<Scalar>& c, const Generator<Scalar>& q) {
  if (c.variant != LyapunovVariant::AdditiveSup) {
    throw Error(ErrorCode::DomainViolation, "remark conditions are stated for the additive variant");
  }
  if (c.alpha.size() != q.n_states()) throw Error(ErrorCode::ShapeMismatch, "coefficients vs generator size");
  return remark_conditions(q, lyapunov_diagonal(c), stationary_distribution(q));
}

template <typename Scalar>
struct ErgodicityReport {
  Scalar eta;
  Vector<Scalar> diagonal;
  Vector<Scalar> stationary;
  RemarkConditions remark;
  bool verdict;
};

/// Spectral certificate for one variant. The remark flags are evaluated with
/// the variant's own diagonal.
template <typename Scalar>
ErgodicityReport<Scalar> ergodicity_report(const Generator<Scalar>& q, const RegimeCoefficients<Scalar>& c) {
  if (c.alpha.size() != q.n_states()) throw Error(ErrorCode::ShapeMismatch, "coefficients vs generator size");
  Vector<Scalar> k = lyapunov_diagonal(c);
  Vector<Scalar> pi = stationary_distribution(q);
  const Scalar eta = spectral_abscissa_rate(q, k);
  const RemarkConditions remark = remark_conditions(q, k, pi);
  return {eta, std::move(k), std::move(pi), remark, eta > static_cast<Scalar>(kVerdictTolerance)};
}

struct Example1Report {
  double alpha;
  double beta;
  std::complex<double> root1;
  std::complex<double> root2;
  bool satisfied;
  double max_real_root;
  /// -max Re of the roots: the spectral rate of Q + diag(alpha, beta).
  double eta;
  /// satisfied <=> both roots in the open left half plane.
  bool consistent;
};

/// Two-state delay OU example: alpha = 2 a1 + (1 + e^{-a2}) b1,
/// beta = 2 a2 + (1 + e^{-a2}) b2, roots of
/// l^2 - (alpha + beta - 1 - gamma) l + alpha beta - (alpha gamma + beta).
inline Example1Report check_example1(double a1, double b1, double a2, double b2, double gamma) {
  if (!(a1 > 0) || !(b1 > 0) || !(b2 > 0) || !(a2 < 0) || !(gamma > 0)) {
    throw Error(ErrorCode::DomainViolation, "example requires a1, b1, b2, gamma > 0 and a2 < 0");
  }
  const double lift = 1.0 + std::exp(-a2);
  const double alpha = 2.0 * a1 + lift * b1;
  const double beta = 2.0 * a2 + lift * b2;
  const double trace = alpha + beta - 1.0 - gamma;
  const double det = alpha * beta - (alpha * gamma + beta);
  const std::complex<double> disc = std::sqrt(std::complex<double>(trace * trace - 4.0 * det, 0.0));
  const std::complex<double> r1 = 0.5 * (trace + disc);
  const std::complex<double> r2 = 0.5 * (trace - disc);
  const bool satisfied = (alpha + beta < 1.0 + gamma) && (beta - beta / alpha > gamma);
  const double max_re = std::max(r1.real(), r2.real());
  return {alpha, beta, r1, r2, satisfied, max_re, -max_re, satisfied == (max_re < 0.0)};
}

/// Unique positive root of l = a + b e^{-l} (a, b > 0), by bisection on [0, a + b].
inline double characteristic_root(double a, double b) {
  if (!(a > 0) || !(b > 0)) throw Error(ErrorCode::DomainViolation, "characteristic root needs a, b > 0");
  double lo = 0.0;
  double hi = a + b;
  auto f = [&](double l) { return l - a - b * std::exp(-l); };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rsw

#endif  // RSW_GENERATOR_HPP
