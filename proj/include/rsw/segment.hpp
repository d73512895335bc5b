#ifndef RSW_SEGMENT_HPP
#define RSW_SEGMENT_HPP

// The delay window: M + 1 equally spaced knots on [-tau, 0] joined by linear
// interpolation, plus the constant pre-history used on [-tau - 1, -tau).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include "rsw/delay_measure.hpp"
#include "rsw/error.hpp"
#include "rsw/generator.hpp"

namespace rsw {

template <typename Scalar>
class BasicSegment {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  /// Knots ordered from theta = -tau (row 0) to theta = 0 (row M).
  static BasicSegment from_values(const MatrixType& knots, Scalar tau) {
    const Eigen::Index m = knots.rows() - 1;
    if (m < 1) throw Error(ErrorCode::DomainViolation, "segment needs M >= 1 (at least two knots)");
    if (knots.cols() < 1) throw Error(ErrorCode::DomainViolation, "segment dimension must be >= 1");
    BasicSegment s(static_cast<int>(m), static_cast<int>(knots.cols()), tau);
    s.storage_ = knots;
    s.check_finite(knots, "initial segment");
    s.pre_ = knots.row(0).transpose();
    return s;
  }

  /// Samples xi on the M + 1 grid points. xi may return a scalar (dim 1) or a vector.
  template <typename F>
  static BasicSegment from_function(F&& xi, Scalar tau, int m, int dim = 1) {
    if (m < 1) throw Error(ErrorCode::DomainViolation, "segment needs M >= 1");
    if (dim < 1) throw Error(ErrorCode::DomainViolation, "segment dimension must be >= 1");
    BasicSegment probe(m, dim, tau);
    MatrixType knots(m + 1, dim);
    for (int r = 0; r <= m; ++r) {
      const Scalar theta = probe.theta(r);
      if constexpr (std::is_arithmetic_v<std::decay_t<decltype(xi(theta))>>) {
        if (dim != 1) throw Error(ErrorCode::ShapeMismatch, "scalar initial function for a vector segment");
        knots(r, 0) = static_cast<Scalar>(xi(theta));
      } else {
        const VectorType v = xi(theta);
        if (v.size() != dim) throw Error(ErrorCode::ShapeMismatch, "initial function returns wrong dimension");
        knots.row(r) = v.transpose();
      }
    }
    return from_values(knots, tau);
  }

  static BasicSegment constant(const VectorType& c, Scalar tau, int m) {
    return from_function([&](Scalar) { return c; }, tau, m, static_cast<int>(c.size()));
  }

  int dim() const noexcept { return dim_; }
  int m() const noexcept { return m_; }
  Scalar tau() const noexcept { return tau_; }
  Scalar delta() const noexcept { return delta_; }
  long pushes() const noexcept { return pushes_; }
  const VectorType& pre_history() const noexcept { return pre_; }

  Scalar theta(int r) const { return static_cast<Scalar>(r - m_) * delta_; }

  /// Knot r, r = 0 (theta = -tau) ... M (theta = 0).
  auto knot(int r) const { return storage_.row((head_ + r) % (m_ + 1)).transpose(); }
  auto current() const { return knot(m_); }
  Scalar current_scalar() const { return knot(m_)(0); }

  MatrixType values() const {
    MatrixType out(m_ + 1, dim_);
    for (int r = 0; r <= m_; ++r) out.row(r) = knot(r).transpose();
    return out;
  }

  /// Linear interpolation on [-tau, 0]; pre_history on [-tau - 1, -tau).
  VectorType value_at(Scalar theta_in) const {
    if (!(theta_in >= -tau_ - 1) || theta_in > 0) {
      throw Error(ErrorCode::OutOfDomain, "theta outside [-tau - 1, 0]");
    }
    if (theta_in < -tau_) return pre_;
    const Scalar u = (theta_in + tau_) / delta_;
    const Scalar nearest = std::round(u);
    if (std::abs(u - nearest) <= 8 * std::numeric_limits<Scalar>::epsilon() * std::max<Scalar>(1, u)) {
      return knot(static_cast<int>(nearest));
    }
    const int i = std::min(static_cast<int>(std::floor(u)), m_ - 1);
    const Scalar s = u - static_cast<Scalar>(i);
    return knot(i) + s * (knot(i + 1) - knot(i));
  }

  /// Single coordinate of value_at, without allocating.
  Scalar component_at(Scalar theta_in, int c = 0) const {
    if (!(theta_in >= -tau_ - 1) || theta_in > 0) {
      throw Error(ErrorCode::OutOfDomain, "theta outside [-tau - 1, 0]");
    }
    if (theta_in < -tau_) return pre_(c);
    const Scalar u = (theta_in + tau_) / delta_;
    const Scalar nearest = std::round(u);
    if (std::abs(u - nearest) <= 8 * std::numeric_limits<Scalar>::epsilon() * std::max<Scalar>(1, u)) {
      return knot_component(static_cast<int>(nearest), c);
    }
    const int i = std::min(static_cast<int>(std::floor(u)), m_ - 1);
    const Scalar s = u - static_cast<Scalar>(i);
    const Scalar lo = knot_component(i, c);
    return lo + s * (knot_component(i + 1, c) - lo);
  }

  Scalar knot_component(int r, int c = 0) const { return storage_((head_ + r) % (m_ + 1), c); }

  /// Slides the window one step: drops the oldest knot, appends v at theta = 0.
  /// The original pre-history is kept for the first M pushes, after which it
  /// tracks the evicted knot.
  void advance(const VectorType& v) {
    if (v.size() != dim_) throw Error(ErrorCode::ShapeMismatch, "pushed value has wrong dimension");
    check_finite(v, "pushed value");
    const VectorType evicted = knot(0);
    storage_.row(head_) = v.transpose();
    head_ = (head_ + 1) % (m_ + 1);
    ++pushes_;
    if (pushes_ > m_) pre_ = evicted;
  }

  /// Scalar fast path for dim == 1.
  void advance(Scalar v) {
    if (!std::isfinite(static_cast<double>(v))) throw Error(ErrorCode::NonFiniteValue, "pushed value");
    const Scalar evicted = storage_(head_, 0);
    storage_(head_, 0) = v;
    head_ = (head_ + 1) % (m_ + 1);
    ++pushes_;
    if (pushes_ > m_) pre_(0) = evicted;
  }

  /// Checkpoint restore of the state that values() does not carry.
  void restore_pre_history(const VectorType& pre, long pushes) {
    if (pre.size() != dim_) throw Error(ErrorCode::ShapeMismatch, "pre_history has wrong dimension");
    check_finite(pre, "pre_history");
    pre_ = pre;
    pushes_ = pushes;
  }

  bool same_grid(const BasicSegment& o) const { return dim_ == o.dim_ && m_ == o.m_ && tau_ == o.tau_; }

 private:
  BasicSegment(int m, int dim, Scalar tau) : dim_(dim), m_(m), tau_(tau) {
    if (!(tau > 0) || !std::isfinite(static_cast<double>(tau))) {
      throw Error(ErrorCode::DomainViolation, "tau must be positive");
    }
    delta_ = tau / static_cast<Scalar>(m);
    if (!(delta_ < 1)) throw Error(ErrorCode::DomainViolation, "step tau / M must lie in (0, 1)");
    pre_ = VectorType::Zero(dim);
  }

  template <typename Derived>
  static void check_finite(const Eigen::MatrixBase<Derived>& x, const char* what) {
    if (!x.allFinite()) throw Error(ErrorCode::NonFiniteValue, what);
  }

  int dim_;
  int m_;
  Scalar tau_;
  Scalar delta_{};
  MatrixType storage_;
  int head_ = 0;
  VectorType pre_;
  long pushes_ = 0;
};

using Segment = BasicSegment<double>;

/// Copying push: returns the slid window and leaves seg untouched.
template <typename Scalar>
BasicSegment<Scalar> push(const BasicSegment<Scalar>& seg, const std::type_identity_t<Vector<Scalar>>& v) {
  BasicSegment<Scalar> out = seg;
  out.advance(v);
  return out;
}

/// Uniform norm over [-tau, 0]. Along each interpolation interval |.|^2 is a
/// convex quadratic in the interpolation parameter, so the sup is attained at
/// a knot for every dimension.
template <typename Scalar>
Scalar sup_norm(const BasicSegment<Scalar>& seg) {
  Scalar best = 0;
  for (int r = 0; r <= seg.m(); ++r) best = std::max(best, seg.knot(r).squaredNorm());
  return std::sqrt(best);
}

/// Squared uniform norm of a - b (the difference of two interpolants is the
/// interpolant of the knot differences).
template <typename Scalar>
Scalar sup_norm_diff_squared(const BasicSegment<Scalar>& a, const BasicSegment<Scalar>& b) {
  if (!a.same_grid(b)) throw Error(ErrorCode::ShapeMismatch, "segments live on different grids");
  Scalar best = 0;
  for (int r = 0; r <= a.m(); ++r) best = std::max(best, (a.knot(r) - b.knot(r)).squaredNorm());
  return best;
}

template <typename Scalar>
BasicSegment<Scalar> difference(const BasicSegment<Scalar>& a, const BasicSegment<Scalar>& b) {
  if (!a.same_grid(b)) throw Error(ErrorCode::ShapeMismatch, "segments live on different grids");
  return BasicSegment<Scalar>::from_values(a.values() - b.values(), a.tau());
}

/// sum_k w_k |a(theta_k) - b(theta_k)|^2 over the atoms of v.
template <typename Scalar>
Scalar integrate_squared_diff(const BasicSegment<Scalar>& a, const BasicSegment<Scalar>& b, const DelayMeasure& v) {
  if (!a.same_grid(b)) throw Error(ErrorCode::ShapeMismatch, "segments live on different grids");
  Scalar acc = 0;
  for (const auto& atom : v.atoms()) {
    const Scalar theta = static_cast<Scalar>(atom.location);
    acc += static_cast<Scalar>(atom.weight) * (a.value_at(theta) - b.value_at(theta)).squaredNorm();
  }
  return acc;
}

}  // namespace rsw

#endif  // RSW_SEGMENT_HPP
