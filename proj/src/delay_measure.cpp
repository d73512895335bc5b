#include "rsw/delay_measure.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "rsw/error.hpp"

namespace rsw {

DelayMeasure::DelayMeasure(std::vector<Atom> atoms, double tau) : atoms_(std::move(atoms)), tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::DomainViolation, "delay measure needs tau > 0");
  }
  if (atoms_.empty()) throw Error(ErrorCode::DomainViolation, "delay measure has no atoms");
  double total = 0.0;
  for (const auto& atom : atoms_) {
    if (!std::isfinite(atom.location) || atom.location < -tau_ || atom.location > 0.0) {
      throw Error(ErrorCode::DomainViolation,
                  "atom location " + std::to_string(atom.location) + " outside [-tau, 0]");
    }
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
      throw Error(ErrorCode::DomainViolation, "atom weights must be positive");
    }
    total += atom.weight;
  }
  for (auto& atom : atoms_) atom.weight /= total;
}

DelayMeasure DelayMeasure::point_mass(double location, double tau) {
  return DelayMeasure({{location, 1.0}}, tau);
}

}  // namespace rsw
