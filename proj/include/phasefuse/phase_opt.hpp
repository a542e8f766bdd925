#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phasefuse/channel.hpp"
#include "phasefuse/error.hpp"
#include "phasefuse/estimator.hpp"
#include "phasefuse/phase_vector.hpp"
#include "phasefuse/rng.hpp"
#include "phasefuse/sdp.hpp"

namespace phasefuse {

enum class StrategyKind { ClosedFormN2, SdpRelaxation, AllOnes, GridOracle };

struct PhaseStrategy {
  StrategyKind kind = StrategyKind::SdpRelaxation;
  int num_candidates = 100;      // SdpRelaxation: random rounding draws
  double grid_step_deg = 0.0;    // GridOracle: 0 picks 1 deg for N <= 3, 4 deg for N = 4
  SdpOptions sdp{};

  static PhaseStrategy closed_form_n2() { return {StrategyKind::ClosedFormN2}; }
  static PhaseStrategy sdp_relaxation(int candidates = 100) {
    return {StrategyKind::SdpRelaxation, candidates};
  }
  static PhaseStrategy all_ones() { return {StrategyKind::AllOnes}; }
  static PhaseStrategy grid_oracle(double step_deg = 0.0) {
    return {StrategyKind::GridOracle, 0, step_deg};
  }

  std::string_view name() const {
    switch (kind) {
      case StrategyKind::ClosedFormN2: return "closed-form-n2";
      case StrategyKind::SdpRelaxation: return "sdp";
      case StrategyKind::AllOnes: return "all-ones";
      case StrategyKind::GridOracle: return "grid";
    }
    return "unknown";
  }

  static PhaseStrategy parse(std::string_view text) {
    if (text == "closed-form-n2" || text == "closed-form") return closed_form_n2();
    if (text == "sdp") return sdp_relaxation();
    if (text == "all-ones" || text == "ones") return all_ones();
    if (text == "grid" || text == "grid-oracle") return grid_oracle();
    throw UsageError("unknown strategy '" + std::string(text) + "'");
  }

  double grid_step_for(Eigen::Index n) const {
    if (grid_step_deg > 0.0) return grid_step_deg;
    return n <= 3 ? 1.0 : 4.0;
  }

  void validate_for(Eigen::Index n) const {
    if (kind == StrategyKind::ClosedFormN2 && n != 2) {
      throw UsageError("closed-form strategy requires exactly 2 sensors");
    }
    if (kind == StrategyKind::GridOracle) {
      if (n > 4) throw UsageError("grid oracle is limited to N <= 4");
      if (!(grid_step_for(n) > 0.0) || grid_step_for(n) > 360.0) {
        throw UsageError("grid oracle step must be in (0, 360] degrees");
      }
    }
    if (kind == StrategyKind::SdpRelaxation && num_candidates < 0) {
      throw UsageError("candidate count must be nonnegative");
    }
  }
};

struct OptimizationReport {
  PhaseVector phases;
  double achieved_variance = 0.0;
  double lower_bound = 0.0;
  std::optional<double> relaxation_value;
  PhaseStrategy strategy;
  std::optional<SdpSolution> sdp;  // solver diagnostics for SdpRelaxation
  bool fallback = false;           // SDP did not certify; phases came from its best iterate
};

// Raised when the SDP fails to certify; carries a usable report built by
// rounding the solver's best iterate.
class PhaseOptimizationError : public Error {
 public:
  PhaseOptimizationError(const std::string& what, OptimizationReport partial)
      : Error(what), partial_(std::move(partial)) {}
  const OptimizationReport& partial_report() const { return partial_; }

 private:
  OptimizationReport partial_;
};

/// Two-sensor optimum a = (e^{j arg B12}, 1), giving B11 + B22 + 2|B12|.
inline PhaseVector optimize_phases_n2(const FisherMatrix& b) {
  if (b.size() != 2) throw UsageError("optimize_phases_n2: requires N = 2");
  const std::complex<double> off = b.matrix()(0, 1);
  const double beta = std::abs(off) > 0.0 ? std::arg(off) : 0.0;
  Eigen::VectorXcd a(2);
  a << std::polar(1.0, beta), 1.0;
  return PhaseVector(std::move(a));
}

/// Exhaustive search over phases quantized to `step_deg`, first phase fixed
/// at 0. Cost is (360/step)^(N-1) quadratic forms.
inline PhaseVector grid_search_phases(const FisherMatrix& b, double step_deg) {
  const Eigen::Index n = b.size();
  const int steps = static_cast<int>(std::lround(360.0 / step_deg));
  if (n == 1) return PhaseVector::ones(1);
  std::vector<std::complex<double>> phasors(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    phasors[static_cast<std::size_t>(k)] = std::polar(1.0, k * step_deg * std::numbers::pi / 180.0);
  }
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXcd a = Eigen::VectorXcd::Ones(n);
  Eigen::VectorXcd best = a;
  double best_value = -std::numeric_limits<double>::infinity();
  while (true) {
    for (Eigen::Index i = 1; i < n; ++i) a(i) = phasors[static_cast<std::size_t>(idx[i])];
    const double v = b.quadratic_form(a);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
    Eigen::Index i = 1;
    while (i < n && ++idx[static_cast<std::size_t>(i)] == steps) {
      idx[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return PhaseVector::normalized(best);
}

namespace detail {

inline OptimizationReport make_report(const FisherMatrix& b, PhaseVector phases,
                                      const PhaseStrategy& strategy) {
  OptimizationReport r;
  r.achieved_variance = estimator_variance(phases, b);
  r.lower_bound = variance_lower_bound(b);
  r.phases = std::move(phases);
  r.strategy = strategy;
  return r;
}

}  // namespace detail

inline OptimizationReport optimize_phases(const FisherMatrix& b, const PhaseStrategy& strategy,
                                          RngStream& rng) {
  strategy.validate_for(b.size());
  // Degenerate B is rejected up front rather than producing a meaningless report.
  variance_lower_bound(b);

  switch (strategy.kind) {
    case StrategyKind::ClosedFormN2:
      return detail::make_report(b, optimize_phases_n2(b), strategy);
    case StrategyKind::AllOnes:
      return detail::make_report(b, PhaseVector::ones(b.size()), strategy);
    case StrategyKind::GridOracle:
      return detail::make_report(b, grid_search_phases(b, strategy.grid_step_for(b.size())),
                                 strategy);
    case StrategyKind::SdpRelaxation: {
      const SdpProblem problem(b.matrix());
      try {
        SdpSolution sol = solve(problem, strategy.sdp);
        OptimizationReport r = detail::make_report(
            b, extract_rank_one(sol, problem, rng, strategy.num_candidates), strategy);
        r.relaxation_value = sol.objective_value;
        r.sdp = std::move(sol);
        return r;
      } catch (const ConvergenceError& e) {
        OptimizationReport r =
            detail::make_report(b, extract_rank_one(e.best_iterate(), problem, rng, 0), strategy);
        r.fallback = true;
        r.sdp = e.best_iterate();
        throw PhaseOptimizationError(e.what(), std::move(r));
      }
    }
  }
  throw UsageError("optimize_phases: unknown strategy");
}

/// One ideal feedback cycle: the FC forms B from its channel knowledge,
/// optimizes the phases, and the sensors adopt them.
inline OptimizationReport feedback_round(const ChannelRealization& channel, const Scenario& scenario,
                                         const PhaseStrategy& strategy, RngStream& rng) {
  return optimize_phases(fisher_matrix(channel, scenario), strategy, rng);
}

}  // namespace phasefuse
