#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "phasefuse/channel.hpp"
#include "phasefuse/error.hpp"
#include "phasefuse/phase_vector.hpp"

namespace phasefuse {

namespace detail {

inline double degenerate_floor(double trace) {
  return 1e-14 * std::abs(trace) + std::numeric_limits<double>::min();
}

inline Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint());
}

}  // namespace detail

/// The N x N matrix B = H^H (H V H^H + sigma_n^2 I)^{-1} H.
///
/// Construction symmetrizes its argument and checks that it was Hermitian
/// (1e-12 relative) and positive semidefinite (smallest eigenvalue at least
/// -1e-10 times the largest). Eigenvalues are computed once and cached.
class FisherMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kPsdTolerance = 1e-10;

  explicit FisherMatrix(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw UsageError("FisherMatrix: need a nonempty square matrix");
    }
    const double scale = std::max(m.norm(), std::numeric_limits<double>::min());
    if ((m - m.adjoint()).norm() > kHermitianTolerance * scale) {
      throw UsageError("FisherMatrix: matrix is not Hermitian");
    }
    matrix_ = detail::hermitian_part(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_, Eigen::EigenvaluesOnly);
    eigenvalues_ = es.eigenvalues();
    if (eigenvalues_(0) < -kPsdTolerance * std::max(0.0, eigenvalues_(eigenvalues_.size() - 1))) {
      throw UsageError("FisherMatrix: matrix is not positive semidefinite");
    }
  }

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double lambda_max() const { return eigenvalues_(eigenvalues_.size() - 1); }
  double lambda_min() const { return eigenvalues_(0); }
  double trace() const { return matrix_.diagonal().real().sum(); }

  // a^H B a; real because B is Hermitian.
  double quadratic_form(const Eigen::VectorXcd& a) const {
    return a.dot(matrix_ * a).real();
  }
  double quadratic_form(const PhaseVector& a) const { return quadratic_form(a.values()); }

 private:
  Eigen::MatrixXcd matrix_;
  Eigen::VectorXd eigenvalues_;
};

inline Eigen::MatrixXcd noise_covariance(const Eigen::MatrixXcd& h,
                                         const Eigen::VectorXd& sensor_noise,
                                         double fc_noise_power) {
  Eigen::MatrixXcd c = h * sensor_noise.asDiagonal() * h.adjoint();
  c.diagonal().array() += fc_noise_power;
  return detail::hermitian_part(c);
}

inline Eigen::VectorXd sensor_noise_vector(const Scenario& scenario) {
  return Eigen::Map<const Eigen::VectorXd>(scenario.sensor_noise_powers.data(),
                                           static_cast<Eigen::Index>(scenario.sensor_noise_powers.size()));
}

inline Eigen::MatrixXcd noise_covariance(const ChannelRealization& channel,
                                         const Scenario& scenario) {
  if (!(scenario.fc_noise_power > 0.0)) throw UsageError("noise_covariance: need sigma_n^2 > 0");
  if (scenario.sensor_noise_powers.size() != static_cast<std::size_t>(channel.n_sensors())) {
    throw UsageError("noise_covariance: scenario / channel size mismatch");
  }
  return noise_covariance(channel.matrix, sensor_noise_vector(scenario), scenario.fc_noise_power);
}

// B via Cholesky of the M x M covariance: B = (L^{-1} H)^H (L^{-1} H).
inline Eigen::MatrixXcd fisher_matrix_direct(const Eigen::MatrixXcd& h,
                                             const Eigen::VectorXd& sensor_noise,
                                             double fc_noise_power) {
  const Eigen::LLT<Eigen::MatrixXcd> llt(noise_covariance(h, sensor_noise, fc_noise_power));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("fisher_matrix: Cholesky of the noise covariance failed");
  }
  const Eigen::MatrixXcd whitened = llt.matrixL().solve(h);
  return detail::hermitian_part(whitened.adjoint() * whitened);
}

// B via the matrix inversion lemma, factorizing an N x N matrix instead:
//   B = G/s - G (V^{-1} + G/s)^{-1} G / s^2,  G = H^H H,  s = sigma_n^2.
// Requires every sensor noise power to be positive.
inline Eigen::MatrixXcd fisher_matrix_woodbury(const Eigen::MatrixXcd& h,
                                               const Eigen::VectorXd& sensor_noise,
                                               double fc_noise_power) {
  if ((sensor_noise.array() <= 0.0).any()) {
    throw UsageError("fisher_matrix_woodbury: sensor noise powers must be positive");
  }
  const Eigen::MatrixXcd gram = h.adjoint() * h;
  Eigen::MatrixXcd inner = gram / fc_noise_power;
  inner.diagonal().array() += sensor_noise.array().inverse();
  const Eigen::LLT<Eigen::MatrixXcd> llt(detail::hermitian_part(inner));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("fisher_matrix: Cholesky of V^{-1} + H^H H / sigma_n^2 failed");
  }
  const Eigen::MatrixXcd w = llt.matrixL().solve(gram);
  const double s2 = fc_noise_power * fc_noise_power;
  return detail::hermitian_part(gram / fc_noise_power - w.adjoint() * w / s2);
}

// Factorizes whichever of the two covariances is smaller.
inline FisherMatrix fisher_matrix(const ChannelRealization& channel, const Scenario& scenario) {
  if (!(scenario.fc_noise_power > 0.0)) throw UsageError("fisher_matrix: need sigma_n^2 > 0");
  if (scenario.sensor_noise_powers.size() != static_cast<std::size_t>(channel.n_sensors())) {
    throw UsageError("fisher_matrix: scenario / channel size mismatch");
  }
  const Eigen::VectorXd v = sensor_noise_vector(scenario);
  const bool woodbury = channel.n_antennas() > channel.n_sensors() && (v.array() > 0.0).all();
  return FisherMatrix(woodbury ? fisher_matrix_woodbury(channel.matrix, v, scenario.fc_noise_power)
                               : fisher_matrix_direct(channel.matrix, v, scenario.fc_noise_power));
}

// theta_hat = a^H H^H C^{-1} y / (a^H H^H C^{-1} H a).
inline std::complex<double> ml_estimate(const Eigen::VectorXcd& y, const ChannelRealization& channel,
                                        const Scenario& scenario, const PhaseVector& a) {
  if (y.size() != channel.n_antennas() || a.size() != channel.n_sensors()) {
    throw UsageError("ml_estimate: dimension mismatch");
  }
  const Eigen::LLT<Eigen::MatrixXcd> llt(noise_covariance(channel, scenario));
  if (llt.info() != Eigen::Success) throw NumericalError("ml_estimate: Cholesky failed");
  const Eigen::VectorXcd u = llt.matrixL().solve(channel.matrix * a.values());
  const Eigen::VectorXcd w = llt.matrixL().solve(y);
  const double den = u.squaredNorm();
  if (den <= std::numeric_limits<double>::min()) {
    throw DegenerateInstance("ml_estimate: a^H B a is zero (channel carries no signal)");
  }
  return u.dot(w) / den;
}

// Variance 1 / (a^H B a) of the ML estimate.
inline double estimator_variance(const PhaseVector& a, const FisherMatrix& b) {
  if (a.size() != b.size()) throw UsageError("estimator_variance: dimension mismatch");
  const double q = b.quadratic_form(a);
  if (q <= detail::degenerate_floor(b.trace())) {
    throw DegenerateInstance("estimator_variance: a^H B a is not positive");
  }
  return 1.0 / q;
}

// 1 / (N lambda_max(B)); no unit-modulus a can do better.
inline double variance_lower_bound(const FisherMatrix& b) {
  const double lmax = b.lambda_max();
  if (lmax <= detail::degenerate_floor(b.trace())) {
    throw DegenerateInstance("variance_lower_bound: lambda_max(B) is zero");
  }
  return 1.0 / (static_cast<double>(b.size()) * lmax);
}

}  // namespace phasefuse
