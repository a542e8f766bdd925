#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "phasefuse/asymptotics.hpp"
#include "phasefuse/estimator.hpp"
#include "phasefuse/phase_opt.hpp"

namespace phasefuse {
namespace {

AsymptoticInputs hand_inputs() {
  AsymptoticInputs in;
  in.distances = {2.0, 4.0};
  in.sensor_noise_powers = {0.01, 0.02};
  in.fc_noise_power = 0.1;
  in.path_loss_exp = 1.0;
  in.n_antennas = 4;
  return in;
}

TEST(Asymptotics, HandComputedValues) {
  const AsymptoticInputs in = hand_inputs();
  // sum 1/d = 0.75, sum 1/d^2 = 0.3125, sum v/d^2 = 0.0025 + 0.00125 = 0.00375
  EXPECT_NEAR(large_n_lower_bound(in), 0.10375 / (2.0 * 0.3125), 1e-15);
  EXPECT_NEAR(single_antenna_upper_bound(in), 0.10375 / 0.5625, 1e-15);
  // 1 / (4 (1/(4*0.1 + 4*0.01) + 1/(16*0.1 + 4*0.02)))
  const double expected = 1.0 / (4.0 * (1.0 / 0.44 + 1.0 / 1.68));
  EXPECT_NEAR(large_m_variance(in), expected, 1e-15);
  const BoundRatio r = bound_ratio(in);
  EXPECT_NEAR(r.ratio, 0.5625 / 0.625, 1e-15);
  EXPECT_NEAR(r.mean_inv_d, 0.375, 1e-15);
  EXPECT_NEAR(r.var_inv_d, 0.015625, 1e-15);
  EXPECT_NEAR(r.moment_form, r.ratio, 1e-15);
}

TEST(Asymptotics, RatioIdentityOnRandomInputs) {
  RngStream rng(41, 0);
  for (int k = 0; k < 1000; ++k) {
    AsymptoticInputs in;
    const int n = 1 + static_cast<int>(rng.canonical() * 50);
    for (int i = 0; i < n; ++i) {
      in.distances.push_back(rng.uniform(0.5, 20.0));
      in.sensor_noise_powers.push_back(rng.uniform(1e-4, 1.0));
    }
    in.fc_noise_power = rng.uniform(0.01, 1.0);
    in.path_loss_exp = rng.uniform(0.0, 4.0);
    const double direct = large_n_lower_bound(in) / single_antenna_upper_bound(in);
    const BoundRatio r = bound_ratio(in);
    EXPECT_NEAR(r.ratio, direct, 1e-12);
    EXPECT_NEAR(r.moment_form, direct, 1e-12);
    EXPECT_LE(r.ratio, 1.0 + 1e-15);
  }
}

TEST(Asymptotics, EqualDistancesGiveUnitRatio) {
  AsymptoticInputs in;
  in.distances.assign(17, 3.3);
  in.sensor_noise_powers.assign(17, 0.005);
  in.path_loss_exp = 1.7;
  EXPECT_EQ(bound_ratio(in).ratio, 1.0);
  EXPECT_EQ(bound_ratio(in).var_inv_d, 0.0);
}

TEST(Asymptotics, SingleAntennaBoundIsCoPhasedOptimum) {
  // With one antenna B is rank one and the co-phased vector is optimal.
  ScenarioTemplate tpl;
  tpl.n_sensors = 6;
  tpl.n_antennas = 1;
  RngStream rng(42, 0);
  const Scenario s = sample_scenario(tpl, rng);
  const auto ch = generate_channel(s, rng);
  const FisherMatrix b = fisher_matrix(ch, s);
  const double eq12 = single_antenna_upper_bound(AsymptoticInputs::from(s));
  EXPECT_LE(variance_lower_bound(b), eq12);
  Eigen::VectorXcd co = ch.matrix.row(0).adjoint();
  EXPECT_NEAR(estimator_variance(PhaseVector::normalized(co), b), eq12, 1e-12 * eq12);
  const auto r = optimize_phases(b, PhaseStrategy::sdp_relaxation(), rng);
  EXPECT_NEAR(r.achieved_variance, eq12, 1e-7 * eq12);
}

TEST(Asymptotics, LargeMVarianceApproachedByAnyPhases) {
  ScenarioTemplate tpl;
  tpl.n_sensors = 4;
  tpl.n_antennas = 4096;
  RngStream rng(43, 0);
  const Scenario s = sample_scenario(tpl, rng);
  const auto ch = generate_channel(s, rng);
  const FisherMatrix b = fisher_matrix(ch, s);
  const double eq17 = large_m_variance(AsymptoticInputs::from(s));
  EXPECT_NEAR(estimator_variance(PhaseVector::ones(4), b), eq17, 0.1 * eq17);
}

TEST(Asymptotics, RejectsMalformedInputs) {
  AsymptoticInputs in;
  EXPECT_THROW(large_n_lower_bound(in), UsageError);
  in.distances = {1.0};
  EXPECT_THROW(large_m_variance(in), UsageError);
  in.sensor_noise_powers = {0.1};
  in.n_antennas = 0;
  EXPECT_THROW(large_m_variance(in), UsageError);
}

}  // namespace
}  // namespace phasefuse
