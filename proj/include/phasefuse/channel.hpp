#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phasefuse/error.hpp"
#include "phasefuse/phase_vector.hpp"
#include "phasefuse/rng.hpp"

namespace phasefuse {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  void validate(const std::string& what) const {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
      throw ConfigError(what + ": invalid interval [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]; need 0 < lo <= hi");
    }
  }
};

// Fixed parts of a scenario plus the ranges its per-sensor values are drawn
// from. Defaults are the desk-scale numerical setup (alpha = 1, d in [2, 7],
// sensor noise in [0.001, 0.01], FC noise 0.1).
struct ScenarioTemplate {
  int n_sensors = 4;
  int n_antennas = 4;
  double path_loss_exp = 1.0;
  double fc_noise_power = 0.1;
  Interval distance_range{2.0, 7.0};
  Interval sensor_noise_range{0.001, 0.01};
  std::complex<double> theta{1.0, 0.0};

  void validate() const {
    if (n_sensors < 1) throw ConfigError("n_sensors must be positive");
    if (n_antennas < 1) throw ConfigError("n_antennas must be positive");
    if (!(path_loss_exp >= 0.0)) throw ConfigError("path_loss_exp must be nonnegative");
    if (!(fc_noise_power > 0.0)) throw ConfigError("fc_noise_power must be positive");
    distance_range.validate("distance_range");
    sensor_noise_range.validate("sensor_noise_range");
  }
};

struct Scenario {
  int n_sensors = 0;
  int n_antennas = 0;
  double path_loss_exp = 1.0;
  double fc_noise_power = 0.1;
  std::vector<double> distances;
  std::vector<double> sensor_noise_powers;
  Interval distance_range{2.0, 7.0};
  Interval sensor_noise_range{0.001, 0.01};
  std::complex<double> theta{1.0, 0.0};

  void validate() const {
    if (n_sensors < 1 || n_antennas < 1) throw ConfigError("scenario counts must be positive");
    if (distances.size() != static_cast<std::size_t>(n_sensors) ||
        sensor_noise_powers.size() != static_cast<std::size_t>(n_sensors)) {
      throw ConfigError("scenario vectors must have n_sensors entries");
    }
    if (!(fc_noise_power > 0.0)) throw ConfigError("fc_noise_power must be positive");
    for (double d : distances) {
      if (!(d > 0.0)) throw ConfigError("distances must be positive");
    }
    for (double s : sensor_noise_powers) {
      if (!(s > 0.0)) throw ConfigError("sensor noise powers must be positive");
    }
  }

  // Channel amplitude d_i^{-alpha} of sensor i.
  double amplitude(int i) const { return std::pow(distances[i], -path_loss_exp); }

  // Restriction to the first n sensors; used to share one draw across a sweep.
  Scenario first_sensors(int n) const {
    if (n < 1 || n > n_sensors) throw UsageError("first_sensors: count out of range");
    Scenario out = *this;
    out.n_sensors = n;
    out.distances.resize(n);
    out.sensor_noise_powers.resize(n);
    return out;
  }
};

struct ChannelRealization {
  Eigen::MatrixXcd matrix;  // M x N, column i is sensor i's channel
  Eigen::MatrixXd phases;   // M x N, in [0, 2*pi)

  int n_antennas() const { return static_cast<int>(matrix.rows()); }
  int n_sensors() const { return static_cast<int>(matrix.cols()); }
};

inline Scenario sample_scenario(const ScenarioTemplate& config, RngStream& rng) {
  config.validate();
  Scenario s;
  s.n_sensors = config.n_sensors;
  s.n_antennas = config.n_antennas;
  s.path_loss_exp = config.path_loss_exp;
  s.fc_noise_power = config.fc_noise_power;
  s.distance_range = config.distance_range;
  s.sensor_noise_range = config.sensor_noise_range;
  s.theta = config.theta;
  s.distances.resize(config.n_sensors);
  s.sensor_noise_powers.resize(config.n_sensors);
  for (int i = 0; i < config.n_sensors; ++i) {
    s.distances[i] = rng.uniform(config.distance_range.lo, config.distance_range.hi);
  }
  for (int i = 0; i < config.n_sensors; ++i) {
    s.sensor_noise_powers[i] =
        rng.uniform(config.sensor_noise_range.lo, config.sensor_noise_range.hi);
  }
  return s;
}

// Constant-amplitude, uniform-random-phase channel: H(m, i) = d_i^{-alpha} e^{j gamma}.
inline ChannelRealization generate_channel(const Scenario& scenario, RngStream& rng) {
  const int m_count = scenario.n_antennas;
  const int n_count = scenario.n_sensors;
  ChannelRealization ch;
  ch.matrix.resize(m_count, n_count);
  ch.phases.resize(m_count, n_count);
  for (int i = 0; i < n_count; ++i) {
    const double amp = scenario.amplitude(i);
    for (int m = 0; m < m_count; ++m) {
      const double g = rng.phase();
      ch.phases(m, i) = g;
      ch.matrix(m, i) = std::polar(amp, g);
    }
  }
  return ch;
}

// Received vector y = H a theta + H D v + n, with v ~ CN(0, V) and
// n ~ CN(0, sigma_n^2 I). Zero variances are accepted and give exact zeros.
inline Eigen::VectorXcd synthesize_received_signal(const Scenario& scenario,
                                                   const ChannelRealization& channel,
                                                   const PhaseVector& phases,
                                                   RngStream& rng) {
  const Eigen::Index n_count = channel.matrix.cols();
  if (phases.size() != n_count ||
      scenario.sensor_noise_powers.size() != static_cast<std::size_t>(n_count)) {
    throw UsageError("synthesize_received_signal: phase vector / scenario size mismatch");
  }
  Eigen::VectorXcd transmitted(n_count);
  for (Eigen::Index i = 0; i < n_count; ++i) {
    const std::complex<double> v = rng.complex_normal(scenario.sensor_noise_powers[i]);
    transmitted(i) = phases[i] * (scenario.theta + v);
  }
  Eigen::VectorXcd y = channel.matrix * transmitted;
  for (Eigen::Index m = 0; m < y.size(); ++m) {
    y(m) += rng.complex_normal(scenario.fc_noise_power);
  }
  return y;
}

}  // namespace phasefuse
