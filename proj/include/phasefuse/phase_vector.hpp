#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "phasefuse/error.hpp"

namespace phasefuse {

/// Unit-modulus per-sensor encoding coefficients a (the diagonal of D).
class PhaseVector {
 public:
  static constexpr double kModulusTolerance = 1e-12;

  PhaseVector() = default;

  explicit PhaseVector(Eigen::VectorXcd values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (std::abs(std::abs(values_(i)) - 1.0) > kModulusTolerance) {
        throw UsageError("PhaseVector: entry " + std::to_string(i) + " is not unit modulus");
      }
    }
  }

  static PhaseVector ones(Eigen::Index n) {
    return PhaseVector(Eigen::VectorXcd::Ones(n));
  }

  static PhaseVector from_phases(std::span<const double> radians) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(radians.size()));
    for (std::size_t i = 0; i < radians.size(); ++i) v(i) = std::polar(1.0, radians[i]);
    return PhaseVector(std::move(v));
  }

  // Keeps only the argument of each entry; a zero entry maps to phase 0.
  static PhaseVector normalized(const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = std::polar(1.0, std::arg(v(i)));
    return PhaseVector(std::move(out));
  }

  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  std::complex<double> operator[](Eigen::Index i) const { return values_(i); }

  Eigen::VectorXd phases() const {
    Eigen::VectorXd out(values_.size());
    for (Eigen::Index i = 0; i < values_.size(); ++i) out(i) = std::arg(values_(i));
    return out;
  }

  PhaseVector rotated(double radians) const {
    return PhaseVector::normalized(values_ * std::polar(1.0, radians));
  }

 private:
  Eigen::VectorXcd values_;
};

}  // namespace phasefuse
