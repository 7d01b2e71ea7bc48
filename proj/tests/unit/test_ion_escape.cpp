#include <gtest/gtest.h>

#include <cmath>

#include "superatom/common.hpp"
#include "superatom/ion_escape.hpp"

using namespace superatom;

namespace {

IonEscapeConfig base_config(std::size_t trajectories = 20) {
  IonEscapeConfig cfg;
  cfg.differential_polarizability = kSr88ClockDeltaAlpha;
  cfg.n_trajectories = trajectories;
  cfg.rng_seed = 7;
  return cfg;
}

}  // namespace

TEST(IonEscapeConfig, Validation) {
  IonEscapeConfig cfg;
  EXPECT_THROW(cfg.validate(), DomainError);  // polarizability not supplied
  cfg = base_config();
  EXPECT_NO_THROW(cfg.validate());
  cfg.trap_volume = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = base_config();
  cfg.ramp_field_max = -1;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = base_config();
  cfg.n_atoms = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = base_config();
  cfg.time_step = std::nan("");
  EXPECT_THROW(cfg.validate(), DomainError);
  EXPECT_THROW(simulate_escape(IonEscapeConfig{}), DomainError);
}

TEST(Kinematics, ClosedFormExitTime) {
  const IonEscapeConfig cfg = base_config();
  const double q_over_m = si::elementary_charge / (cfg.ion_mass * si::atomic_mass_unit);
  const double tau = cfg.ramp_time * 1e-9;
  const double x = 0.5e-6;
  const double t = std::cbrt(6.0 * x * tau / (q_over_m * cfg.ramp_field_max));
  ASSERT_LT(t, tau);
  const auto kin = kinematic_escape_time(cfg);
  ASSERT_TRUE(kin);
  EXPECT_NEAR(*kin, t * 1e9, 1e-9 * t * 1e9);
}

TEST(Kinematics, ConstantForceAfterRamp) {
  IonEscapeConfig cfg = base_config();
  cfg.ramp_time = 5;  // ns, ion still inside when the ramp ends
  const double q_over_m = si::elementary_charge / (cfg.ion_mass * si::atomic_mass_unit);
  const double a = q_over_m * cfg.ramp_field_max;
  const double tau = cfg.ramp_time * 1e-9;
  const double x_tau = a * tau * tau / 6.0;
  const double v_tau = a * tau / 2.0;
  const double rest = 0.5e-6 - x_tau;
  const double s = (-v_tau + std::sqrt(v_tau * v_tau + 2.0 * a * rest)) / a;
  EXPECT_NEAR(*kinematic_escape_time(cfg), (tau + s) * 1e9, 1e-6);
}

TEST(Kinematics, NoFieldNoEscape) {
  IonEscapeConfig cfg = base_config(3);
  cfg.ramp_field_max = 0;
  EXPECT_FALSE(kinematic_escape_time(cfg).has_value());
  const EscapeResult r = simulate_escape(cfg, 1);
  EXPECT_EQ(r.escaped, 0u);
  EXPECT_FALSE(r.escape_time.has_value());
}

TEST(Trajectory, MatchesKinematicOracle) {
  const IonEscapeConfig cfg = base_config();
  const TrajectoryOutcome o = simulate_trajectory(cfg, 0);
  ASSERT_TRUE(o.escape_time);
  EXPECT_NEAR(*o.escape_time / *kinematic_escape_time(cfg), 1.0, 1e-3);
}

TEST(Trajectory, EnergyBookkeeping) {
  const EscapeResult r = simulate_escape(base_config(), 2);
  EXPECT_EQ(r.escaped, 20u);
  EXPECT_LT(r.max_energy_error, 1e-3);
  for (const auto& o : r.trajectories) {
    EXPECT_GT(o.kinetic_energy, 0.0);
    EXPECT_NEAR(o.kinetic_energy / o.field_work, 1.0, 1e-3);
  }
}

TEST(Trajectory, StepConvergence) {
  IonEscapeConfig cfg = base_config();
  const auto coarse = simulate_trajectory(cfg, 3);
  cfg.time_step *= 0.5;
  const auto fine = simulate_trajectory(cfg, 3);
  ASSERT_TRUE(coarse.escape_time && fine.escape_time);
  EXPECT_NEAR(*coarse.escape_time / *fine.escape_time, 1.0, 5e-3);
  EXPECT_NEAR(coarse.max_phase / fine.max_phase, 1.0, 5e-3);
}

TEST(MonteCarlo, ReproducibleAcrossWorkerCounts) {
  const IonEscapeConfig cfg = base_config(16);
  const EscapeResult a = simulate_escape(cfg, 1);
  const EscapeResult b = simulate_escape(cfg, 4);
  EXPECT_EQ(a.per_atom_phases, b.per_atom_phases);
  EXPECT_EQ(a.close_collision, b.close_collision);
  EXPECT_EQ(a.escape_time, b.escape_time);
  EXPECT_EQ(a.significant, b.significant);
  EXPECT_EQ(a.per_atom_phases.size(), 16u * 99u);
  EXPECT_EQ(a.spectators_total, 16u * 99u);
}

TEST(MonteCarlo, SeedChangesSample) {
  IonEscapeConfig cfg = base_config(4);
  const EscapeResult a = simulate_escape(cfg, 1);
  cfg.rng_seed = 8;
  const EscapeResult b = simulate_escape(cfg, 1);
  EXPECT_NE(a.per_atom_phases, b.per_atom_phases);
}

TEST(MonteCarlo, FractionFallsWithVolume) {
  double previous = 2.0;
  for (double volume : {0.5, 1.0, 2.0, 4.0}) {
    IonEscapeConfig cfg = base_config(40);
    cfg.trap_volume = volume;
    const double f = simulate_escape(cfg, 2).fraction_above(1e-3);
    EXPECT_LE(f, previous) << volume;
    previous = f;
  }
}

TEST(MonteCarlo, ThresholdCurveMonotone) {
  const EscapeResult r = simulate_escape(base_config(), 2);
  const auto curve = r.threshold_curve(1e-4, 1.0, 9);
  ASSERT_EQ(curve.size(), 9u);
  EXPECT_NEAR(curve.front().first, 1e-4, 1e-16);
  EXPECT_NEAR(curve.back().first, 1.0, 1e-12);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].second, curve[i - 1].second);
  }
  EXPECT_NEAR(r.fraction_above(0.01), r.fraction_significant, 1e-15);
}

TEST(Phase, CubicGrowthDuringRamp) {
  const IonEscapeConfig cfg = base_config();
  for (double t : {5.0, 20.0, 60.0}) {
    EXPECT_NEAR(ramp_field_phase(cfg, 2 * t) / ramp_field_phase(cfg, t), 8.0, 1e-12);
  }
  const double e = cfg.ramp_field_max * 10.0 / cfg.ramp_time;
  const double expected = cfg.differential_polarizability / (2 * si::hbar) * e * e * 10e-9 / 3.0;
  EXPECT_NEAR(ramp_field_phase(cfg, 10.0) / expected, 1.0, 1e-12);
}

TEST(Phase, ZeroPolarizabilityGivesZeroPhase) {
  IonEscapeConfig cfg = base_config(5);
  cfg.differential_polarizability = 0;
  EXPECT_EQ(ramp_field_phase(cfg), 0.0);
  const EscapeResult r = simulate_escape(cfg, 1);
  for (double p : r.per_atom_phases) EXPECT_EQ(p, 0.0);
  EXPECT_EQ(r.close_collisions, r.significant);
}

TEST(Phase, SegmentIntegralMatchesQuadrature) {
  const double cases[][7] = {
      {0.3, -0.2, 0.1, 1.0, 0.5, -0.3, 0.2},
      {-1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0},  // passes through the origin
      {0.5, 0.5, 0.5, 1e-4, 0.0, 0.0, 3.0},  // nearly static
  };
  const double a2 = 1e-3;
  for (const auto& c : cases) {
    const double w[3] = {c[0], c[1], c[2]};
    const double u[3] = {c[3], c[4], c[5]};
    const double dt = c[6];
    auto f = [&](double s) {
      double r2 = a2;
      for (int k = 0; k < 3; ++k) r2 += (w[k] + u[k] * s) * (w[k] + u[k] * s);
      return 1.0 / (r2 * r2);
    };
    const int n = 200000;
    const double h = dt / n;
    double simpson = f(0) + f(dt);
    for (int i = 1; i < n; ++i) simpson += (i % 2 ? 4.0 : 2.0) * f(i * h);
    simpson *= h / 3.0;
    EXPECT_NEAR(segment_inverse_square_integral(w, u, a2, dt) / simpson, 1.0, 1e-8);
  }
}
