#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "phasefuse/channel.hpp"
#include "phasefuse/error.hpp"

namespace phasefuse {

// Expectations over sensors are empirical means over the realized values.
struct AsymptoticInputs {
  std::vector<double> distances;
  std::vector<double> sensor_noise_powers;
  double fc_noise_power = 0.1;
  double path_loss_exp = 1.0;
  int n_antennas = 1;

  static AsymptoticInputs from(const Scenario& s) {
    return {s.distances, s.sensor_noise_powers, s.fc_noise_power, s.path_loss_exp, s.n_antennas};
  }

  std::size_t n_sensors() const { return distances.size(); }

  void validate() const {
    if (distances.empty() || distances.size() != sensor_noise_powers.size()) {
      throw UsageError("asymptotics: need matching, nonempty distance and noise vectors");
    }
    if (n_antennas < 1) throw UsageError("asymptotics: n_antennas must be positive");
  }
};

namespace detail {

struct AsymptoticSums {
  double inv_d_alpha = 0.0;      // sum 1/d^alpha
  double inv_d_2alpha = 0.0;     // sum 1/d^{2 alpha}
  double noise_over_d2 = 0.0;    // sum sigma_v^2 / d^{2 alpha}
};

inline AsymptoticSums sums(const AsymptoticInputs& in) {
  in.validate();
  AsymptoticSums s;
  for (std::size_t i = 0; i < in.n_sensors(); ++i) {
    const double g = std::pow(in.distances[i], -in.path_loss_exp);
    s.inv_d_alpha += g;
    s.inv_d_2alpha += g * g;
    s.noise_over_d2 += in.sensor_noise_powers[i] * g * g;
  }
  return s;
}

}  // namespace detail

// (sigma_n^2 + sum sigma_v^2/d^{2a}) / (N sum 1/d^{2a})
inline double large_n_lower_bound(const AsymptoticInputs& in) {
  const auto s = detail::sums(in);
  return (in.fc_noise_power + s.noise_over_d2) /
         (static_cast<double>(in.n_sensors()) * s.inv_d_2alpha);
}

// (sigma_n^2 + sum sigma_v^2/d^{2a}) / (sum 1/d^a)^2: co-phased single antenna.
inline double single_antenna_upper_bound(const AsymptoticInputs& in) {
  const auto s = detail::sums(in);
  return (in.fc_noise_power + s.noise_over_d2) / (s.inv_d_alpha * s.inv_d_alpha);
}

struct BoundRatio {
  double ratio = 1.0;         // (sum 1/d^a)^2 / (N sum 1/d^{2a})
  double moment_form = 1.0;   // 1 - Var{1/d^a} / E{1/d^{2a}}
  double mean_inv_d = 0.0;
  double var_inv_d = 0.0;
};

inline BoundRatio bound_ratio(const AsymptoticInputs& in) {
  const auto s = detail::sums(in);
  const double n = static_cast<double>(in.n_sensors());
  BoundRatio r;
  r.mean_inv_d = s.inv_d_alpha / n;
  const double second = s.inv_d_2alpha / n;
  // Deviations are taken from the first sensor so equal distances give a
  // variance of exactly zero.
  const double g0 = std::pow(in.distances.front(), -in.path_loss_exp);
  double m1 = 0.0, m2 = 0.0;
  for (double d : in.distances) {
    const double dev = std::pow(d, -in.path_loss_exp) - g0;
    m1 += dev;
    m2 += dev * dev;
  }
  m1 /= n;
  r.var_inv_d = std::max(0.0, m2 / n - m1 * m1);
  r.moment_form = 1.0 - r.var_inv_d / second;
  r.ratio = r.var_inv_d == 0.0 ? 1.0 : s.inv_d_alpha * s.inv_d_alpha / (n * s.inv_d_2alpha);
  return r;
}

// 1 / (M sum 1/(d^{2a} sigma_n^2 + M sigma_v^2)): B is nearly diagonal for
// large M, so this holds for any phase vector.
inline double large_m_variance(const AsymptoticInputs& in) {
  in.validate();
  const double m = static_cast<double>(in.n_antennas);
  double acc = 0.0;
  for (std::size_t i = 0; i < in.n_sensors(); ++i) {
    const double d2a = std::pow(in.distances[i], 2.0 * in.path_loss_exp);
    acc += 1.0 / (d2a * in.fc_noise_power + m * in.sensor_noise_powers[i]);
  }
  return 1.0 / (m * acc);
}

}  // namespace phasefuse
