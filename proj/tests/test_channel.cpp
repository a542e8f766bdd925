#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "phasefuse/channel.hpp"
#include "phasefuse/estimator.hpp"

namespace phasefuse {
namespace {

TEST(SampleScenario, DrawsStayInsideConfiguredRanges) {
  ScenarioTemplate tpl;
  tpl.n_sensors = 4;
  for (std::uint64_t k = 0; k < 200; ++k) {
    RngStream rng(11, k);
    const Scenario s = sample_scenario(tpl, rng);
    ASSERT_EQ(s.distances.size(), 4u);
    for (int i = 0; i < 4; ++i) {
      EXPECT_GE(s.distances[i], 2.0);
      EXPECT_LE(s.distances[i], 7.0);
      EXPECT_GE(s.sensor_noise_powers[i], 0.001);
      EXPECT_LE(s.sensor_noise_powers[i], 0.01);
    }
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(SampleScenario, DegenerateIntervalIsExact) {
  ScenarioTemplate tpl;
  tpl.n_sensors = 6;
  tpl.distance_range = {3.0, 3.0};
  RngStream rng(1, 2);
  const Scenario s = sample_scenario(tpl, rng);
  for (double d : s.distances) EXPECT_EQ(d, 3.0);
}

TEST(SampleScenario, SameKeyGivesIdenticalScenario) {
  ScenarioTemplate tpl;
  tpl.n_sensors = 9;
  RngStream a(42, 7), b(42, 7), c(42, 8);
  const Scenario sa = sample_scenario(tpl, a);
  const Scenario sb = sample_scenario(tpl, b);
  const Scenario sc = sample_scenario(tpl, c);
  EXPECT_EQ(sa.distances, sb.distances);
  EXPECT_EQ(sa.sensor_noise_powers, sb.sensor_noise_powers);
  EXPECT_NE(sa.distances, sc.distances);
}

TEST(SampleScenario, RejectsInvalidIntervals) {
  ScenarioTemplate tpl;
  RngStream rng(0, 0);
  tpl.distance_range = {7.0, 2.0};
  EXPECT_THROW(sample_scenario(tpl, rng), ConfigError);
  tpl.distance_range = {0.0, 2.0};
  EXPECT_THROW(sample_scenario(tpl, rng), ConfigError);
  tpl.distance_range = {2.0, 7.0};
  tpl.sensor_noise_range = {-0.1, 0.01};
  EXPECT_THROW(sample_scenario(tpl, rng), ConfigError);
  tpl.sensor_noise_range = {0.001, 0.01};
  tpl.fc_noise_power = 0.0;
  EXPECT_THROW(sample_scenario(tpl, rng), ConfigError);
}

TEST(RngStream, SubstreamsAreDeterministicAndDistinct) {
  RngStream base(3, 4);
  RngStream s1 = base.substream(0), s2 = base.substream(0), s3 = base.substream(1);
  const double x1 = s1.canonical(), x2 = s2.canonical(), x3 = s3.canonical();
  EXPECT_EQ(x1, x2);
  EXPECT_NE(x1, x3);
  // Deriving a substream does not depend on how far the parent has advanced.
  base.canonical();
  EXPECT_EQ(base.substream(0).canonical(), x1);
}

TEST(RngStream, ComplexNormalIsCircular) {
  RngStream rng(5, 0);
  const int k = 40000;
  const double var = 0.3;
  double sr = 0.0, si = 0.0, sri = 0.0;
  for (int i = 0; i < k; ++i) {
    const auto z = rng.complex_normal(var);
    sr += z.real() * z.real();
    si += z.imag() * z.imag();
    sri += z.real() * z.imag();
  }
  EXPECT_NEAR(sr / k, var / 2.0, 0.05 * var / 2.0);
  EXPECT_NEAR(si / k, var / 2.0, 0.05 * var / 2.0);
  EXPECT_NEAR(sri / k, 0.0, 0.05 * var / 2.0);
  EXPECT_EQ(rng.complex_normal(0.0), std::complex<double>(0.0, 0.0));
}

Scenario fixed_scenario(int n, int m, double d, double alpha) {
  Scenario s;
  s.n_sensors = n;
  s.n_antennas = m;
  s.path_loss_exp = alpha;
  s.fc_noise_power = 0.1;
  s.distances.assign(n, d);
  s.sensor_noise_powers.assign(n, 0.01);
  return s;
}

TEST(GenerateChannel, ZeroExponentGivesUnitModulus) {
  const Scenario s = fixed_scenario(5, 3, 4.7, 0.0);
  RngStream rng(1, 1);
  const auto ch = generate_channel(s, rng);
  for (Eigen::Index i = 0; i < ch.matrix.size(); ++i) {
    EXPECT_NEAR(std::abs(ch.matrix(i)), 1.0, 1e-15);
  }
}

TEST(GenerateChannel, ModulusFollowsPathLoss) {
  const Scenario s = fixed_scenario(4, 6, 2.0, 1.0);
  RngStream rng(1, 2);
  const auto ch = generate_channel(s, rng);
  for (Eigen::Index i = 0; i < ch.matrix.size(); ++i) {
    EXPECT_NEAR(std::abs(ch.matrix(i)), 0.5, 1e-15);
  }
}

TEST(GenerateChannel, EntryModulusLawOnRandomScenarios) {
  ScenarioTemplate tpl;
  tpl.n_sensors = 7;
  tpl.n_antennas = 5;
  tpl.path_loss_exp = 2.3;
  for (std::uint64_t k = 0; k < 50; ++k) {
    RngStream rng(9, k);
    const Scenario s = sample_scenario(tpl, rng);
    const auto ch = generate_channel(s, rng);
    for (int i = 0; i < s.n_sensors; ++i) {
      for (int m = 0; m < s.n_antennas; ++m) {
        EXPECT_NEAR(std::abs(ch.matrix(m, i)) * std::pow(s.distances[i], s.path_loss_exp), 1.0,
                    4e-16);
        EXPECT_GE(ch.phases(m, i), 0.0);
        EXPECT_LT(ch.phases(m, i), 2.0 * std::numbers::pi);
      }
    }
  }
}

TEST(GenerateChannel, PhasesHaveZeroMean) {
  const Scenario s = fixed_scenario(1000, 100, 1.0, 0.0);
  RngStream rng(2, 0);
  const auto ch = generate_channel(s, rng);
  EXPECT_LT(std::abs(ch.matrix.mean()), 0.02);
}

TEST(ReceivedSignal, NoiselessIsExact) {
  Scenario s = fixed_scenario(3, 4, 2.5, 1.0);
  s.fc_noise_power = 0.0;  // synthesis accepts zero variances
  s.sensor_noise_powers.assign(3, 0.0);
  s.theta = {0.7, -1.2};
  RngStream rng(3, 0);
  const auto ch = generate_channel(s, rng);
  const PhaseVector a = PhaseVector::from_phases(std::vector<double>{0.1, 2.0, -1.0});
  const Eigen::VectorXcd y = synthesize_received_signal(s, ch, a, rng);
  const Eigen::VectorXcd expected = ch.matrix * (a.values() * s.theta);
  EXPECT_LE((y - expected).norm(), 1e-15 * expected.norm());

  s.theta = 0.0;
  EXPECT_EQ(synthesize_received_signal(s, ch, a, rng).norm(), 0.0);
}

TEST(ReceivedSignal, NoiseCovarianceMatchesModel) {
  ScenarioTemplate tpl;
  tpl.n_sensors = 5;
  tpl.n_antennas = 3;
  tpl.sensor_noise_range = {0.2, 0.5};  // visible next to sigma_n^2
  RngStream rng(4, 0);
  const Scenario s = sample_scenario(tpl, rng);
  const auto ch = generate_channel(s, rng);
  const PhaseVector a = PhaseVector::from_phases(std::vector<double>{0.3, 1.0, 2.0, -2.5, 0.0});
  const Eigen::VectorXcd mean = ch.matrix * a.values() * s.theta;
  std::vector<Eigen::VectorXcd> residuals;
  for (int k = 0; k < 10000; ++k) {
    residuals.push_back(synthesize_received_signal(s, ch, a, rng) - mean);
  }
  const Eigen::MatrixXcd emp = oracle::sample_covariance(residuals);
  const Eigen::MatrixXcd model = noise_covariance(ch, s);
  EXPECT_LT(oracle::spectral_norm(emp - model) / oracle::spectral_norm(model), 0.05);
}

TEST(ReceivedSignal, RejectsDimensionMismatch) {
  const Scenario s = fixed_scenario(3, 2, 2.0, 1.0);
  RngStream rng(0, 0);
  const auto ch = generate_channel(s, rng);
  EXPECT_THROW(synthesize_received_signal(s, ch, PhaseVector::ones(4), rng), UsageError);
}

TEST(PhaseVectorType, RejectsNonUnitModulus) {
  Eigen::VectorXcd v(2);
  v << 1.0, std::complex<double>(0.5, 0.0);
  EXPECT_THROW(PhaseVector{v}, UsageError);
  v(1) = 0.0;
  const PhaseVector p = PhaseVector::normalized(v);
  EXPECT_EQ(p[1], std::complex<double>(1.0, 0.0));
}

}  // namespace
}  // namespace phasefuse
