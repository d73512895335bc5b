#ifndef RSW_DELAY_MEASURE_HPP
#define RSW_DELAY_MEASURE_HPP

#include <vector>

namespace rsw {

/// Discrete probability measure on [-tau, 0]. Weights are renormalized to sum
/// to one on construction; locations are kept off-grid.
class DelayMeasure {
 public:
  struct Atom {
    double location;
    double weight;
  };

  DelayMeasure(std::vector<Atom> atoms, double tau);

  static DelayMeasure point_mass(double location, double tau);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double tau() const noexcept { return tau_; }

  /// Exact integral of f against the measure (a finite sum over atoms).
  template <typename F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (const auto& atom : atoms_) acc += atom.weight * f(atom.location);
    return acc;
  }

 private:
  std::vector<Atom> atoms_;
  double tau_;
};

}  // namespace rsw

#endif  // RSW_DELAY_MEASURE_HPP
