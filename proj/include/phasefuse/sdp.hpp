#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phasefuse/error.hpp"
#include "phasefuse/phase_vector.hpp"
#include "phasefuse/rng.hpp"

namespace phasefuse {

/// max tr(B A) subject to A_ii = 1, A >= 0, over N x N Hermitian A.
class SdpProblem {
 public:
  static constexpr double kHermitianTolerance = 1e-12;

  explicit SdpProblem(const Eigen::MatrixXcd& objective) {
    if (objective.rows() != objective.cols() || objective.rows() == 0) {
      throw UsageError("SdpProblem: objective must be a nonempty square matrix");
    }
    const double scale = std::max(objective.norm(), std::numeric_limits<double>::min());
    if ((objective - objective.adjoint()).norm() > kHermitianTolerance * scale) {
      throw UsageError("SdpProblem: objective is not Hermitian");
    }
    objective_ = 0.5 * (objective + objective.adjoint());
  }

  const Eigen::MatrixXcd& objective() const { return objective_; }
  Eigen::Index dimension() const { return objective_.rows(); }

  double value(const Eigen::MatrixXcd& a) const { return (objective_ * a).trace().real(); }
  double value(const PhaseVector& a) const {
    return a.values().dot(objective_ * a.values()).real();
  }

 private:
  Eigen::MatrixXcd objective_;
};

/// Real form of the problem: max tr(B_r A_r - B_i A_i) subject to
/// diag(A_r) = 1 and [[A_r, -A_i], [A_i, A_r]] >= 0.
struct RealEmbedding {
  Eigen::MatrixXd obj_r;  // symmetric
  Eigen::MatrixXd obj_i;  // antisymmetric

  Eigen::Index dimension() const { return obj_r.rows(); }

  double objective(const Eigen::MatrixXd& a_r, const Eigen::MatrixXd& a_i) const {
    return (obj_r * a_r - obj_i * a_i).trace();
  }

  static Eigen::MatrixXd block(const Eigen::MatrixXd& a_r, const Eigen::MatrixXd& a_i) {
    const Eigen::Index n = a_r.rows();
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = a_r;
    out.topRightCorner(n, n) = -a_i;
    out.bottomLeftCorner(n, n) = a_i;
    out.bottomRightCorner(n, n) = a_r;
    return out;
  }

  static Eigen::MatrixXd block(const Eigen::MatrixXcd& a) { return block(a.real(), a.imag()); }

  static Eigen::MatrixXcd to_complex(const Eigen::MatrixXd& a_r, const Eigen::MatrixXd& a_i) {
    Eigen::MatrixXcd out(a_r.rows(), a_r.cols());
    out.real() = a_r;
    out.imag() = a_i;
    return out;
  }
};

inline RealEmbedding embed_real(const SdpProblem& problem) {
  // SdpProblem already guarantees a Hermitian objective.
  return RealEmbedding{problem.objective().real(), problem.objective().imag()};
}

struct SdpOptions {
  double gap_tolerance = 1e-7;          // relative, max(1, |objective|)
  double feasibility_tolerance = 1e-8;  // diagonal residual and relative min eigenvalue
  int max_iterations = 200;
  // The iteration keeps going past gap_tolerance down to this target so the
  // reported objective sits well inside the certificate.
  double target_gap = 1e-10;
  double step_fraction = 0.98;
};

struct SdpSolution {
  Eigen::MatrixXcd gram;        // A*, unit diagonal, PSD
  Eigen::VectorXd dual;         // y; Z = Diag(y) - B is PSD
  double objective_value = 0.0;  // tr(B A*)
  double dual_value = 0.0;       // sum(y)
  double duality_gap = 0.0;      // dual_value - objective_value, >= 0
  double diag_residual = 0.0;    // max_i |A*_ii - 1|
  double min_eigenvalue = 0.0;   // of A*
  double max_eigenvalue = 0.0;   // of A*
  double dual_min_eigenvalue = 0.0;  // of Z, relative to lambda_max(Z)
  int iterations = 0;

  double relative_gap() const { return duality_gap / std::max(1.0, std::abs(objective_value)); }

  bool certified(const SdpOptions& opt = {}) const {
    return relative_gap() <= opt.gap_tolerance && diag_residual <= opt.feasibility_tolerance &&
           min_eigenvalue >= -opt.feasibility_tolerance * std::max(1.0, max_eigenvalue);
  }
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SdpSolution best)
      : Error(what), best_(std::move(best)) {}
  const SdpSolution& best_iterate() const { return best_; }

 private:
  SdpSolution best_;
};

namespace detail {

// Largest alpha with X + alpha dX still PSD (infinity when dX >= 0).
// X must be positive definite.
inline double max_psd_step(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& dx) {
  const Eigen::LLT<Eigen::MatrixXcd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXcd t = llt.matrixL().solve(dx);
  Eigen::MatrixXcd w = llt.matrixL().solve(t.adjoint()).adjoint();
  w = 0.5 * (w + w.adjoint()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

inline Eigen::MatrixXcd unit_diagonal(const Eigen::MatrixXcd& x) {
  const Eigen::VectorXd s = x.diagonal().real().cwiseMax(std::numeric_limits<double>::min())
                                .cwiseSqrt().cwiseInverse();
  Eigen::MatrixXcd a = s.asDiagonal() * x * s.asDiagonal();
  a = 0.5 * (a + a.adjoint()).eval();
  a.diagonal().setOnes();
  return a;
}

// Evaluates certificates of (X, y) against the unscaled objective.
inline SdpSolution make_solution(const SdpProblem& problem, const Eigen::MatrixXcd& x,
                                 const Eigen::VectorXd& y_scaled, double scale, int iterations) {
  SdpSolution sol;
  sol.gram = unit_diagonal(x);
  sol.dual = y_scaled * scale;
  sol.iterations = iterations;
  sol.objective_value = problem.value(sol.gram);
  sol.dual_value = sol.dual.sum();
  sol.duality_gap = std::max(0.0, sol.dual_value - sol.objective_value);
  sol.diag_residual = (sol.gram.diagonal().real().array() - 1.0).abs().maxCoeff();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sol.gram, Eigen::EigenvaluesOnly);
  sol.min_eigenvalue = es.eigenvalues()(0);
  sol.max_eigenvalue = es.eigenvalues()(es.eigenvalues().size() - 1);
  Eigen::MatrixXcd z = -problem.objective();
  z.diagonal() += sol.dual.cast<std::complex<double>>();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> zs(z, Eigen::EigenvaluesOnly);
  const double zmax = std::max(std::abs(zs.eigenvalues()(zs.eigenvalues().size() - 1)), 1.0);
  sol.dual_min_eigenvalue = zs.eigenvalues()(0) / zmax;
  return sol;
}

}  // namespace detail

/// Primal-dual interior-point solve with Mehrotra predictor-corrector steps
/// along the HKM direction, carried out directly on Hermitian matrices.
///
/// Primal: max <C, X>, diag(X) = 1, X >= 0.  Dual: min 1^T y, Z = Diag(y) - C >= 0.
/// The objective is scaled to unit max-entry before iterating. The start point
/// (X = I, y_i = sum_j |C_ij| + 1) is strictly feasible for both problems, and
/// Z is always recomputed from y so dual feasibility holds to rounding.
/// The Schur complement for the unit-diagonal constraints is Re(X o conj(Z^{-1})).
inline SdpSolution solve(const SdpProblem& problem, const SdpOptions& opt = {}) {
  using Eigen::MatrixXcd;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Eigen::Index n = problem.dimension();
  const double nd = static_cast<double>(n);

  if (n == 1) {
    VectorXd y(1);
    y(0) = problem.objective()(0, 0).real();
    return detail::make_solution(problem, MatrixXcd::Ones(1, 1), y, 1.0, 0);
  }

  const double max_entry = problem.objective().cwiseAbs().maxCoeff();
  const double scale = max_entry > 0.0 ? max_entry : 1.0;
  const MatrixXcd c = problem.objective() / scale;

  MatrixXcd x = MatrixXcd::Identity(n, n);
  VectorXd y = c.cwiseAbs().rowwise().sum() + VectorXd::Ones(n);
  auto dual_slack = [&](const VectorXd& yy) {
    MatrixXcd z = -c;
    z.diagonal() += yy.cast<std::complex<double>>();
    return z;
  };
  MatrixXcd z = dual_slack(y);

  // Near the optimum the Schur complement gets ill-conditioned and a late
  // step can lose accuracy, so the best iterate seen is what gets returned.
  MatrixXcd best_x = x;
  VectorXd best_y = y;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  int stalled = 0;

  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    const double primal = (c * x).trace().real();
    const double gap = y.sum() - primal;
    const VectorXd rp = VectorXd::Ones(n) - x.diagonal().real();
    const double rel_gap = std::abs(gap) / std::max(1.0, std::abs(primal));
    const double merit = rel_gap + rp.cwiseAbs().maxCoeff();
    if (merit < best_merit) {
      stalled = (merit > 0.5 * best_merit) ? stalled + 1 : 0;
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_iter = iter;
    } else {
      ++stalled;
    }
    if (merit <= opt.target_gap) break;
    if (stalled >= 5 && best_merit <= opt.gap_tolerance) break;

    const Eigen::LLT<MatrixXcd> zllt(z);
    if (zllt.info() != Eigen::Success) break;
    MatrixXcd zinv = zllt.solve(MatrixXcd::Identity(n, n));
    zinv = 0.5 * (zinv + zinv.adjoint()).eval();

    MatrixXd schur(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        schur(i, j) = (x(i, j) * std::conj(zinv(i, j))).real();
      }
    }
    const Eigen::LLT<MatrixXd> sllt(schur);
    if (sllt.info() != Eigen::Success) break;

    const double mu = (x * z).trace().real() / nd;

    // Solves for (dX, dy) given the right-hand side R of dX + X dZ Z^{-1} = R.
    auto direction = [&](const MatrixXcd& r, MatrixXcd& dx, VectorXd& dy) {
      const VectorXd rhs = r.diagonal().real() - rp;
      dy = sllt.solve(rhs);
      dx = r - x * (dy.asDiagonal() * zinv);
      dx = 0.5 * (dx + dx.adjoint()).eval();
    };

    MatrixXcd dx_aff;
    VectorXd dy_aff;
    direction(-x, dx_aff, dy_aff);
    const MatrixXcd dz_aff = dy_aff.cast<std::complex<double>>().asDiagonal();
    const double ap_aff = std::min(1.0, detail::max_psd_step(x, dx_aff));
    const double ad_aff = std::min(1.0, detail::max_psd_step(z, dz_aff));
    const double mu_aff = ((x + ap_aff * dx_aff) * (z + ad_aff * dz_aff)).trace().real() / nd;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    const MatrixXcd r = sigma * mu * zinv - x - dx_aff * dz_aff * zinv;
    MatrixXcd dx;
    VectorXd dy;
    direction(r, dx, dy);
    const MatrixXcd dz = dy.cast<std::complex<double>>().asDiagonal();
    const double ap = std::min(1.0, opt.step_fraction * detail::max_psd_step(x, dx));
    const double ad = std::min(1.0, opt.step_fraction * detail::max_psd_step(z, dz));
    if (ap < 1e-14 && ad < 1e-14) break;

    x += ap * dx;
    x = 0.5 * (x + x.adjoint()).eval();
    y += ad * dy;
    z = dual_slack(y);
  }

  SdpSolution sol = detail::make_solution(problem, best_x, best_y, scale, best_iter);
  if (!sol.certified(opt)) {
    throw ConvergenceError("sdp solve: tolerances not met after " + std::to_string(iter) +
                               " iterations (relative gap " + std::to_string(sol.relative_gap()) +
                               ")",
                           std::move(sol));
  }
  return sol;
}

/// Candidate unit-modulus vectors from a relaxed solution, in evaluation order:
/// the phase-normalized leading eigenvector of A*, the all-ones vector, then
/// `num_random` vectors phase-normalize(C^H r) with A* = C^H C and r uniform
/// unit phasors. Eigenvalues below 1e-12 lambda_max(A*) are clipped to zero.
inline std::vector<PhaseVector> rounding_candidates(const SdpSolution& solution, RngStream& rng,
                                                    int num_random) {
  const Eigen::Index n = solution.gram.rows();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (solution.gram + solution.gram.adjoint()));
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double lmax = std::max(lambda(n - 1), 0.0);
  Eigen::VectorXd root(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    root(k) = lambda(k) < 1e-12 * lmax ? 0.0 : std::sqrt(lambda(k));
  }
  const Eigen::MatrixXcd factor = es.eigenvectors() * root.asDiagonal();  // C^H

  std::vector<PhaseVector> out;
  out.reserve(static_cast<std::size_t>(num_random) + 2);
  out.push_back(PhaseVector::normalized(es.eigenvectors().col(n - 1)));
  out.push_back(PhaseVector::ones(n));
  Eigen::VectorXcd r(n);
  for (int k = 0; k < num_random; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) r(i) = rng.unit_phasor();
    out.push_back(PhaseVector::normalized(factor * r));
  }
  return out;
}

/// Best candidate by a^H B a; the first of equal candidates wins.
inline PhaseVector extract_rank_one(const SdpSolution& solution, const SdpProblem& problem,
                                    RngStream& rng, int num_candidates = 100) {
  if (solution.gram.rows() != problem.dimension()) {
    throw UsageError("extract_rank_one: solution / problem size mismatch");
  }
  if (num_candidates < 0) throw UsageError("extract_rank_one: negative candidate count");
  std::vector<PhaseVector> candidates = rounding_candidates(solution, rng, num_candidates);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double v = problem.value(candidates[k]);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  return std::move(candidates[best]);
}

}  // namespace phasefuse
