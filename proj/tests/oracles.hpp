#pragma once

// Reference computations used only by tests. Each takes a route independent
// of the library code it checks: explicit inverses instead of factorizations,
// exhaustive enumeration instead of optimization, sample moments instead of
// closed forms.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "phasefuse/rng.hpp"

namespace phasefuse::oracle {

// B = H^H (H V H^H + s I)^{-1} H with an explicit inverse.
inline Eigen::MatrixXcd fisher_explicit_inverse(const Eigen::MatrixXcd& h, const Eigen::VectorXd& v,
                                                double s) {
  Eigen::MatrixXcd c = h * v.asDiagonal() * h.adjoint();
  c += s * Eigen::MatrixXcd::Identity(h.rows(), h.rows());
  return h.adjoint() * c.inverse() * h;
}

struct GridOptimum {
  double value = 0.0;
  std::vector<double> phases;
};

// Brute-force max of a^H B a over phases on a `step_deg` grid, first phase 0.
inline GridOptimum grid_max_quadratic_form(const Eigen::MatrixXcd& b, double step_deg) {
  const int n = static_cast<int>(b.rows());
  const int steps = static_cast<int>(std::lround(360.0 / step_deg));
  GridOptimum best;
  best.value = -1e300;
  std::vector<int> idx(n, 0);
  std::vector<double> phases(n, 0.0);
  long long total = 1;
  for (int i = 1; i < n; ++i) total *= steps;
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int i = 1; i < n; ++i) {
      phases[i] = static_cast<double>(c % steps) * step_deg * std::numbers::pi / 180.0;
      c /= steps;
    }
    // a^H B a = sum_ij conj(a_i) B_ij a_j
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        q += (b(i, j) * std::polar(1.0, phases[j] - phases[i])).real();
      }
    }
    if (q > best.value) {
      best.value = q;
      best.phases = phases;
    }
  }
  return best;
}

// Random Hermitian PSD matrix G G^H with G n x r, complex Gaussian entries.
inline Eigen::MatrixXcd random_psd(int n, int rank, RngStream& rng) {
  Eigen::MatrixXcd g(n, rank);
  for (int j = 0; j < rank; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.complex_normal(1.0);
  }
  Eigen::MatrixXcd b = g * g.adjoint();
  return 0.5 * (b + b.adjoint());
}

inline Eigen::VectorXcd random_unit_modulus(int n, RngStream& rng) {
  Eigen::VectorXcd a(n);
  for (int i = 0; i < n; ++i) a(i) = rng.unit_phasor();
  return a;
}

// Sample covariance (1/K) sum x x^H of zero-mean samples.
inline Eigen::MatrixXcd sample_covariance(const std::vector<Eigen::VectorXcd>& xs) {
  const Eigen::Index m = xs.front().size();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
  for (const auto& x : xs) acc += x * x.adjoint();
  return acc / static_cast<double>(xs.size());
}

inline double spectral_norm(const Eigen::MatrixXcd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

// The two-sensor instance [[1, 0.5 e^{j pi/3}], [0.5 e^{-j pi/3}, 1]]:
// lambda_max = 1.5, best unit-modulus quadratic form 3.
inline Eigen::MatrixXcd two_sensor_instance() {
  const std::complex<double> off = std::polar(0.5, std::numbers::pi / 3.0);
  Eigen::MatrixXcd b(2, 2);
  b << 1.0, off, std::conj(off), 1.0;
  return b;
}

}  // namespace phasefuse::oracle
