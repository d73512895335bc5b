#ifndef RSW_SERIES_HPP
#define RSW_SERIES_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace rsw {

/// Streaming mean / variance (Welford) with an exact-order merge.
class MomentAccumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / total;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / total;
    n_ += o.n_;
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const noexcept { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Time-indexed Monte Carlo means.
struct DecaySeries {
  std::vector<double> times;
  std::vector<double> means;
  std::vector<double> std_errors;
  std::size_t n_paths = 0;

  std::size_t size() const noexcept { return times.size(); }
};

/// One MomentAccumulator per time point.
class SeriesAccumulator {
 public:
  explicit SeriesAccumulator(std::vector<double> times) : times_(std::move(times)), acc_(times_.size()) {}

  template <typename Range>
  void add_path(const Range& values) {
    std::size_t k = 0;
    for (double v : values) acc_[k++].add(v);
    ++paths_;
  }

  void merge(const SeriesAccumulator& o) {
    for (std::size_t k = 0; k < acc_.size(); ++k) acc_[k].merge(o.acc_[k]);
    paths_ += o.paths_;
  }

  DecaySeries finish() const {
    DecaySeries s;
    s.times = times_;
    s.n_paths = paths_;
    for (const auto& a : acc_) {
      s.means.push_back(a.mean());
      s.std_errors.push_back(a.std_error());
    }
    return s;
  }

 private:
  std::vector<double> times_;
  std::vector<MomentAccumulator> acc_;
  std::size_t paths_ = 0;
};

}  // namespace rsw

#endif  // RSW_SERIES_HPP
