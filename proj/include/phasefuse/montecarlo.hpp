#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "phasefuse/asymptotics.hpp"
#include "phasefuse/channel.hpp"
#include "phasefuse/error.hpp"
#include "phasefuse/estimator.hpp"
#include "phasefuse/phase_opt.hpp"
#include "phasefuse/rng.hpp"

namespace phasefuse {

enum class SweepKind { SensorSweep, AntennaSweep };

inline const char* sweep_param_name(SweepKind kind) {
  return kind == SweepKind::SensorSweep ? "N" : "M";
}

struct ExperimentConfig {
  SweepKind sweep = SweepKind::SensorSweep;
  std::vector<int> sweep_values;
  int fixed_count = 4;
  int trials = 300;
  std::uint64_t master_seed = 0;
  std::vector<PhaseStrategy> strategies{PhaseStrategy::sdp_relaxation(), PhaseStrategy::all_ones()};
  ScenarioTemplate scenario_template{};
  bool resample_scenario_per_trial = true;
  bool include_asymptotics = true;
  unsigned threads = 0;  // 0: hardware concurrency

  // Sensor sweep at M = 4, N in {2, 4, ..., 30}.
  static ExperimentConfig fig1_defaults() {
    ExperimentConfig c;
    c.sweep = SweepKind::SensorSweep;
    c.fixed_count = 4;
    for (int n = 2; n <= 30; n += 2) c.sweep_values.push_back(n);
    return c;
  }

  // Antenna sweep at N = 4, M in {1, 2, 4, ..., 128}.
  static ExperimentConfig fig2_defaults() {
    ExperimentConfig c;
    c.sweep = SweepKind::AntennaSweep;
    c.fixed_count = 4;
    for (int m = 1; m <= 128; m *= 2) c.sweep_values.push_back(m);
    return c;
  }

  void validate() const {
    if (sweep_values.empty()) throw ConfigError("sweep_values must be nonempty");
    for (std::size_t i = 0; i < sweep_values.size(); ++i) {
      if (sweep_values[i] < 1) throw ConfigError("sweep values must be positive");
      if (i > 0 && sweep_values[i] <= sweep_values[i - 1]) {
        throw ConfigError("sweep values must be strictly increasing");
      }
    }
    if (fixed_count < 1) throw ConfigError("fixed_count must be positive");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (strategies.empty()) throw ConfigError("at least one strategy is required");
    ScenarioTemplate t = scenario_template;
    t.n_sensors = 1;
    t.n_antennas = 1;
    t.validate();
    for (int v : sweep_values) {
      const int n = sweep == SweepKind::SensorSweep ? v : fixed_count;
      for (const auto& s : strategies) {
        try {
          s.validate_for(n);
        } catch (const UsageError& e) {
          throw ConfigError(std::string("strategy ") + std::string(s.name()) + ": " + e.what());
        }
      }
    }
  }
};

struct StrategyStats {
  PhaseStrategy strategy;
  double mean_variance = 0.0;
  double std_err = 0.0;
  int failures = 0;
};

struct SweepPoint {
  int value = 0;
  int n_sensors = 0;
  int n_antennas = 0;
  std::vector<StrategyStats> strategies;
  double lower_bound_mean = 0.0;
  double lower_bound_std_err = 0.0;
  std::optional<double> eq11;  // large-N lower bound, mean over trials
  std::optional<double> eq12;  // single-antenna co-phased variance, mean over trials
  std::optional<double> eq17;  // large-M variance, mean over trials
  int trials = 0;
  int failures = 0;
  bool degraded = false;  // more than 1% of solves failed to certify

  const StrategyStats* find(StrategyKind kind) const {
    for (const auto& s : strategies) {
      if (s.strategy.kind == kind) return &s;
    }
    return nullptr;
  }
};

struct SweepResult {
  SweepKind sweep = SweepKind::SensorSweep;
  std::vector<SweepPoint> points;

  bool degraded() const {
    return std::any_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.degraded; });
  }
};

namespace detail {

// Fixed-order pairwise summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> x) {
  MeanSe r;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return r;
  r.mean = pairwise_sum(x) / n;
  if (x.size() > 1) {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - r.mean) * (x[i] - r.mean);
    r.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return r;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs job(i) for i in [0, count) on `threads` workers. Jobs write to
// disjoint slots, so the outcome does not depend on scheduling. The first
// exception thrown by any job is rethrown after all workers stop.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

struct TrialRecord {
  std::vector<double> variances;
  std::vector<char> failed;
  double lower_bound = 0.0;
  double eq11 = 0.0;
  double eq12 = 0.0;
  double eq17 = 0.0;
};

constexpr std::uint64_t kSharedScenarioStream = std::uint64_t{1} << 63;

}  // namespace detail

/// Runs every (point, trial) of the sweep. Trial t of point p draws from
/// RngStream(master_seed, p * trials + t); strategy k inside it uses substream
/// k, so results are bit-identical for any worker count.
///
/// With resample_scenario_per_trial off, one scenario is drawn for the whole
/// curve (for a sensor sweep, at the largest N; smaller points use a prefix).
inline SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_points = config.sweep_values.size();
  const std::size_t n_trials = static_cast<std::size_t>(config.trials);
  const std::size_t n_strat = config.strategies.size();
  const bool sensor_sweep = config.sweep == SweepKind::SensorSweep;

  auto counts_for = [&](std::size_t p) {
    const int v = config.sweep_values[p];
    return sensor_sweep ? std::pair{v, config.fixed_count} : std::pair{config.fixed_count, v};
  };

  std::optional<Scenario> shared;
  if (!config.resample_scenario_per_trial) {
    ScenarioTemplate t = config.scenario_template;
    t.n_sensors = sensor_sweep ? config.sweep_values.back() : config.fixed_count;
    t.n_antennas = sensor_sweep ? config.fixed_count : config.sweep_values.front();
    RngStream rng(config.master_seed, detail::kSharedScenarioStream);
    shared = sample_scenario(t, rng);
  }

  std::vector<detail::TrialRecord> records(n_points * n_trials);
  detail::parallel_for(records.size(), detail::resolve_threads(config.threads), [&](std::size_t job) {
    const std::size_t p = job / n_trials;
    const auto [n_sensors, n_antennas] = counts_for(p);
    RngStream rng(config.master_seed, job);

    Scenario scenario;
    if (shared) {
      scenario = shared->first_sensors(n_sensors);
      scenario.n_antennas = n_antennas;
    } else {
      ScenarioTemplate t = config.scenario_template;
      t.n_sensors = n_sensors;
      t.n_antennas = n_antennas;
      scenario = sample_scenario(t, rng);
    }
    const ChannelRealization channel = generate_channel(scenario, rng);
    const FisherMatrix b = fisher_matrix(channel, scenario);

    detail::TrialRecord& rec = records[job];
    rec.variances.resize(n_strat);
    rec.failed.assign(n_strat, 0);
    rec.lower_bound = variance_lower_bound(b);
    for (std::size_t k = 0; k < n_strat; ++k) {
      RngStream srng = rng.substream(k);
      try {
        rec.variances[k] = optimize_phases(b, config.strategies[k], srng).achieved_variance;
      } catch (const PhaseOptimizationError& e) {
        rec.variances[k] = e.partial_report().achieved_variance;
        rec.failed[k] = 1;
      }
    }
    if (config.include_asymptotics) {
      const AsymptoticInputs in = AsymptoticInputs::from(scenario);
      rec.eq11 = large_n_lower_bound(in);
      rec.eq12 = single_antenna_upper_bound(in);
      rec.eq17 = large_m_variance(in);
    }
  });

  SweepResult result;
  result.sweep = config.sweep;
  std::vector<double> column(n_trials);
  for (std::size_t p = 0; p < n_points; ++p) {
    const auto [n_sensors, n_antennas] = counts_for(p);
    SweepPoint point;
    point.value = config.sweep_values[p];
    point.n_sensors = n_sensors;
    point.n_antennas = n_antennas;
    point.trials = config.trials;
    const detail::TrialRecord* recs = records.data() + p * n_trials;
    for (std::size_t k = 0; k < n_strat; ++k) {
      StrategyStats st;
      st.strategy = config.strategies[k];
      for (std::size_t t = 0; t < n_trials; ++t) {
        column[t] = recs[t].variances[k];
        st.failures += recs[t].failed[k];
      }
      const auto ms = detail::mean_and_se(column);
      st.mean_variance = ms.mean;
      st.std_err = ms.se;
      point.failures += st.failures;
      point.strategies.push_back(std::move(st));
    }
    auto column_mean = [&](auto member) {
      for (std::size_t t = 0; t < n_trials; ++t) column[t] = recs[t].*member;
      return detail::mean_and_se(column);
    };
    const auto lb = column_mean(&detail::TrialRecord::lower_bound);
    point.lower_bound_mean = lb.mean;
    point.lower_bound_std_err = lb.se;
    if (config.include_asymptotics) {
      point.eq11 = column_mean(&detail::TrialRecord::eq11).mean;
      point.eq12 = column_mean(&detail::TrialRecord::eq12).mean;
      point.eq17 = column_mean(&detail::TrialRecord::eq17).mean;
    }
    point.degraded = static_cast<double>(point.failures) >
                     0.01 * static_cast<double>(n_trials * n_strat);
    result.points.push_back(std::move(point));
  }
  return result;
}

struct UnbiasednessReport {
  std::complex<double> theta;
  std::complex<double> sample_mean;
  double sample_variance = 0.0;     // E|theta_hat - mean|^2, unbiased
  double predicted_variance = 0.0;  // 1 / (a^H B a)
  double standard_error = 0.0;      // sqrt(predicted / trials)
  double z_real = 0.0;
  double z_imag = 0.0;
  double mean_error_in_se = 0.0;    // |mean - theta| / standard_error
  int trials = 0;
};

/// Synthesizes `trials` received vectors at fixed channel and phases and
/// compares the ML estimates' sample moments with the predicted variance.
inline UnbiasednessReport verify_unbiasedness(const Scenario& scenario,
                                              const ChannelRealization& channel,
                                              const PhaseVector& a, int trials, RngStream& rng) {
  if (trials < 1000) throw UsageError("verify_unbiasedness: need at least 1000 trials");
  UnbiasednessReport r;
  r.theta = scenario.theta;
  r.trials = trials;
  std::vector<std::complex<double>> est(static_cast<std::size_t>(trials));
  for (auto& e : est) {
    const Eigen::VectorXcd y = synthesize_received_signal(scenario, channel, a, rng);
    e = ml_estimate(y, channel, scenario, a);
  }
  std::vector<double> re(est.size()), im(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    re[i] = est[i].real();
    im[i] = est[i].imag();
  }
  const auto mr = detail::mean_and_se(re);
  const auto mi = detail::mean_and_se(im);
  const double n = static_cast<double>(trials);
  r.sample_mean = {mr.mean, mi.mean};
  r.sample_variance = (mr.se * mr.se + mi.se * mi.se) * n;
  r.predicted_variance = estimator_variance(a, fisher_matrix(channel, scenario));
  r.standard_error = std::sqrt(r.predicted_variance / n);
  const double axis_se = std::sqrt(r.predicted_variance / 2.0 / n);
  r.z_real = (r.sample_mean.real() - r.theta.real()) / axis_se;
  r.z_imag = (r.sample_mean.imag() - r.theta.imag()) / axis_se;
  r.mean_error_in_se = std::abs(r.sample_mean - r.theta) / r.standard_error;
  return r;
}

struct ConcentrationConfig {
  // SensorSweep: (1/N) H V H^H at fixed M.  AntennaSweep: (1/M) H^H H at fixed N.
  SweepKind kind = SweepKind::SensorSweep;
  std::vector<int> counts{1000, 2000, 4000, 8000};
  int fixed_count = 4;
  int draws = 50;
  std::uint64_t master_seed = 0;
  ScenarioTemplate scenario_template{};
  double threshold = 0.05;
};

struct ConcentrationPoint {
  int count = 0;
  bool applicable = true;  // false when nothing is averaged or there are no off-diagonals
  double median_relative_offdiag = 0.0;
  double fraction_below_threshold = 0.0;
  std::vector<double> samples;
};

struct ConcentrationReport {
  SweepKind kind = SweepKind::SensorSweep;
  std::vector<ConcentrationPoint> points;

  // median[k-1] / median[k] for consecutive applicable points.
  std::vector<double> decay_factors() const {
    std::vector<double> out;
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (points[k - 1].applicable && points[k].applicable) {
        out.push_back(points[k - 1].median_relative_offdiag / points[k].median_relative_offdiag);
      }
    }
    return out;
  }
};

// max |G_mn| over m != n divided by the mean diagonal of G.
inline double relative_offdiagonal(const Eigen::MatrixXcd& g) {
  const double mean_diag = g.diagonal().real().mean();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      if (i != j) worst = std::max(worst, std::abs(g(i, j)));
    }
  }
  return worst / mean_diag;
}

/// Measures how fast the averaged Gram matrices approach diagonal form as the
/// averaging dimension grows.
inline ConcentrationReport verify_diagonal_concentration(const ConcentrationConfig& config) {
  if (config.counts.empty() || config.draws < 1 || config.fixed_count < 1) {
    throw ConfigError("verify_diagonal_concentration: invalid configuration");
  }
  const bool sensors = config.kind == SweepKind::SensorSweep;
  ConcentrationReport report;
  report.kind = config.kind;
  for (std::size_t p = 0; p < config.counts.size(); ++p) {
    ConcentrationPoint pt;
    pt.count = config.counts[p];
    const int averaged = pt.count;
    const int side = config.fixed_count;
    pt.applicable = averaged > 1 && side > 1;
    if (!pt.applicable) {
      report.points.push_back(std::move(pt));
      continue;
    }
    ScenarioTemplate t = config.scenario_template;
    t.n_sensors = sensors ? pt.count : config.fixed_count;
    t.n_antennas = sensors ? config.fixed_count : pt.count;
    int below = 0;
    for (int k = 0; k < config.draws; ++k) {
      RngStream rng(config.master_seed,
                    static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(config.draws) +
                        static_cast<std::uint64_t>(k));
      const Scenario s = sample_scenario(t, rng);
      const ChannelRealization ch = generate_channel(s, rng);
      Eigen::MatrixXcd g;
      if (sensors) {
        g = ch.matrix * sensor_noise_vector(s).asDiagonal() * ch.matrix.adjoint() /
            static_cast<double>(pt.count);
      } else {
        g = ch.matrix.adjoint() * ch.matrix / static_cast<double>(pt.count);
      }
      const double rel = relative_offdiagonal(g);
      pt.samples.push_back(rel);
      if (rel <= config.threshold) ++below;
    }
    std::vector<double> sorted = pt.samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    pt.median_relative_offdiag =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    pt.fraction_below_threshold = static_cast<double>(below) / static_cast<double>(config.draws);
    report.points.push_back(std::move(pt));
  }
  return report;
}

}  // namespace phasefuse
