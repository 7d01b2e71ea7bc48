#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "superatom/dynamics.hpp"
#include "superatom/hamiltonians.hpp"
#include "superatom/protocol.hpp"

using namespace superatom;

namespace {

ComplexVector basis_state(Eigen::Index dim, Eigen::Index k) {
  ComplexVector v = ComplexVector::Zero(dim);
  v[k] = 1;
  return v;
}

Eigen::Index dicke_pos(const EnsembleSpec& spec, DickeIndex idx) {
  return static_cast<Eigen::Index>(DickeBasis(spec).at(idx));
}

}  // namespace

TEST(FalseHerald, DefinedOnlyWithRydbergPopulation) {
  EXPECT_FALSE(false_herald_fraction(0.0, 0.0));
  EXPECT_FALSE(false_herald_fraction(kRydbergEpsilon, 0.0));
  EXPECT_DOUBLE_EQ(*false_herald_fraction(0.5, 0.4), 0.2);
}

TEST(Observables, ReferenceStates) {
  const EnsembleSpec spec(5);
  const Eigen::Index dim = 11;
  const Observables er = observables(QuantumState{BasisKind::dicke, basis_state(dim, dicke_pos(spec, kTargetER))}, spec);
  EXPECT_DOUBLE_EQ(er.p_rydberg, 1.0);
  EXPECT_DOUBLE_EQ(er.p_ER, 1.0);
  EXPECT_EQ(er.infidelity, 0.0);

  const Observables g = observables(QuantumState{BasisKind::dicke, basis_state(dim, 0)}, spec);
  EXPECT_EQ(g.p_rydberg, 0.0);
  EXPECT_FALSE(g.infidelity.has_value());

  // |2+> = (|E^2> + sqrt2 |ER>)/sqrt3
  ComplexVector t = ComplexVector::Zero(dim);
  t[dicke_pos(spec, kDoubleE)] = 1 / std::sqrt(3.0);
  t[dicke_pos(spec, kTargetER)] = std::sqrt(2.0 / 3.0);
  const Observables tp = observables(QuantumState{BasisKind::dicke, t}, spec);
  EXPECT_NEAR(tp.p_rydberg, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(tp.p_ER, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*tp.infidelity, 0.0, 1e-15);
}

TEST(Observables, ProductBasisCountsAsymmetricRydbergPopulation) {
  const EnsembleSpec spec(3);
  const ProductBasis pb(spec);
  ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(pb.size()));
  psi[static_cast<Eigen::Index>(*pb.index_of({Level::r, Level::g, Level::g}))] = 1;
  const Observables o = observables(QuantumState{BasisKind::product, psi}, spec);
  EXPECT_NEAR(o.p_rydberg, 1.0, 1e-15);
  EXPECT_NEAR(o.p_R, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(*o.infidelity, 1.0, 1e-15);
}

TEST(Observables, PureAndMixedAgree) {
  const EnsembleSpec spec(3);
  const ProductBasis pb(spec);
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  ComplexVector psi(static_cast<Eigen::Index>(pb.size()));
  for (auto& x : psi) x = Complex(g(rng), g(rng));
  psi.normalize();
  const ObservableMap m = ObservableMap::product(pb);
  const Observables a = m(psi);
  const Observables b = m(ComplexMatrix(psi * psi.adjoint()));
  EXPECT_NEAR(a.p_G, b.p_G, 1e-14);
  EXPECT_NEAR(a.p_ER, b.p_ER, 1e-14);
  EXPECT_NEAR(a.p_rydberg, b.p_rydberg, 1e-14);
  EXPECT_NEAR(*a.infidelity, *b.infidelity, 1e-13);
}

TEST(Observables, RejectsDressedBasis) {
  const QuantumState s{BasisKind::dressed_restricted, ComplexVector::Ones(6) / std::sqrt(6.0)};
  EXPECT_THROW(observables(s, EnsembleSpec(3)), DomainError);
}

TEST(PropagatePure, ZeroHamiltonianIsIdentity) {
  const EnsembleSpec spec(4);
  const RealMatrix h = RealMatrix::Zero(9, 9);
  ComplexVector psi = ComplexVector::Ones(9) / 3.0;
  const SpectralPropagator prop(h);
  for (double t : {0.0, 1.0, 100.0}) EXPECT_LE((prop.evolve(psi, t) - psi).norm(), 1e-14);
  const auto times = linspace_times(5.0, 11);
  const Trajectory tr = propagate_pure(h, psi, times, ObservableMap::dicke(spec));
  for (const auto& s : tr.samples) EXPECT_NEAR(s.p_G, 1.0 / 9.0, 1e-14);
}

TEST(PropagatePure, SingleAtomRabi) {
  const EnsembleSpec spec(1);
  const double w = kTwoPi * 0.8;
  const RealMatrix h = build_dicke_hamiltonian({w, 0, 0, 0}, spec);
  const auto times = linspace_times(3.0, 301);
  const Trajectory tr = propagate_pure(h, basis_state(3, 0), times, ObservableMap::dicke(spec));
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(tr.samples[i].p_E, rabi_population(w, times[i]), 1e-12);
    EXPECT_NEAR(tr.norm_or_trace[i], 1.0, 1e-12);
  }
}

TEST(PropagatePure, Errors) {
  const RealMatrix h = RealMatrix::Identity(3, 3);
  const auto map = ObservableMap::dicke(EnsembleSpec(1));
  const std::vector<double> times{0.0, 1.0};
  EXPECT_THROW(propagate_pure(h, ComplexVector::Ones(4) / 2.0, times, map), DomainError);
  EXPECT_THROW(propagate_pure(h, ComplexVector::Ones(3), times, map), DomainError);
  RealMatrix bad = h;
  bad(0, 1) = 0.3;
  EXPECT_THROW(propagate_pure(bad, basis_state(3, 0), times, map), DomainError);
  const std::vector<double> backwards{1.0, 0.5};
  EXPECT_THROW(propagate_pure(h, basis_state(3, 0), backwards, map), DomainError);
  EXPECT_THROW(linspace_times(0.0, 5), DomainError);
  EXPECT_THROW(linspace_times(1.0, 1), DomainError);
}

TEST(PropagatePure, DickeAndProductBasesAgree) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.2, 5.0);
  for (int n = 1; n <= 5; ++n) {
    const EnsembleSpec spec(n);
    const ProductBasis pb(spec);
    const LaserParams p{pos(rng), pos(rng), u(rng), u(rng)};
    const auto times = linspace_times(4.0, 41);
    const Trajectory d = propagate_pure(build_dicke_hamiltonian(p, spec), basis_state(2 * n + 1, 0),
                                        times, ObservableMap::dicke(spec));
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(pb.size()));
    psi[0] = 1;  // all atoms in g
    const RealMatrix hp = build_product_hamiltonian(p, pb);
    const Trajectory f = propagate_pure(hp, psi, times, ObservableMap::product(pb));
    const SpectralPropagator prop(hp);
    for (std::size_t i = 0; i < times.size(); ++i) {
      EXPECT_NEAR(d.samples[i].p_G, f.samples[i].p_G, 1e-8);
      EXPECT_NEAR(d.samples[i].p_E, f.samples[i].p_E, 1e-8);
      EXPECT_NEAR(d.samples[i].p_R, f.samples[i].p_R, 1e-8);
      EXPECT_NEAR(d.samples[i].p_ER, f.samples[i].p_ER, 1e-8);
      EXPECT_NEAR(d.samples[i].p_rydberg, f.samples[i].p_rydberg, 1e-8);
      const auto proj = project_to_dicke({BasisKind::product, prop.evolve(psi, times[i])}, pb);
      EXPECT_LE(proj.leakage, 1e-10);
    }
  }
}

TEST(PropagatePure, ProbabilitiesBoundedAndTimesIncreasing) {
  const EnsembleSpec spec(12);
  const RealMatrix h = build_dicke_hamiltonian(LaserParams::from_mhz(2, 10, 3, -5), spec);
  const auto times = linspace_times(2.0, 201);
  const Trajectory tr = propagate_pure(h, basis_state(25, 0), times, ObservableMap::dicke(spec));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (i > 0) EXPECT_GT(tr.times[i], tr.times[i - 1]);
    const auto& s = tr.samples[i];
    for (double p : {s.p_G, s.p_E, s.p_R, s.p_E2, s.p_ER, s.p_rydberg}) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0 + 1e-9);
    }
    if (s.infidelity) {
      EXPECT_GE(*s.infidelity, 0.0);
      EXPECT_LE(*s.infidelity, 1.0);
    }
  }
}

TEST(PropagatePure, NearCompleteTransferAtFig2Point) {
  ProtocolConfig cfg;
  cfg.spec = EnsembleSpec(4);
  cfg.omega_c = kTwoPi * 10;
  cfg.delta_c = -cfg.omega_c / 2;
  cfg.omega_p = kTwoPi * 0.7;
  cfg.calibration = Calibration::closed_form;
  cfg.samples = 401;
  const ResolvedProtocol r = resolve_protocol(cfg);
  cfg.pulse_time = 1.5 * r.pulse_time;
  const ProtocolResult res = run_protocol(cfg, Model::full);
  double peak = 0;
  double t_peak = 0;
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    const double p = *res.trajectory.samples[i].p_target;
    if (p > peak) {
      peak = p;
      t_peak = res.trajectory.times[i];
    }
  }
  EXPECT_GT(peak, 0.9);
  EXPECT_LT(peak, 0.99);  // imperfections from singly and triply excited states
  EXPECT_NEAR(t_peak / r.pulse_time, 1.0, 0.1);
}

// Full product space vs the 6-state dressed model at the N = 4 parameter point.
TEST(ReducedModels, RestrictedTracksFullOverOnePeriod) {
  ProtocolConfig cfg;
  cfg.spec = EnsembleSpec(4);
  cfg.omega_c = kTwoPi * 10;
  cfg.delta_c = -cfg.omega_c / 2;
  cfg.omega_p = kTwoPi * 0.7;
  cfg.calibration = Calibration::closed_form;
  cfg.samples = 801;
  cfg.pulse_time = kTwoPi / resolve_protocol(cfg).omega_eff;
  const ProtocolResult full = run_protocol(cfg, Model::full);
  const ProtocolResult six = run_protocol(cfg, Model::restricted6);
  double dev = 0;
  for (std::size_t i = 0; i < full.trajectory.size(); ++i) {
    dev = std::max(dev, std::abs(*full.trajectory.samples[i].p_target -
                                 *six.trajectory.samples[i].p_target));
  }
  EXPECT_LE(dev, 0.02);
}

TEST(FitOscillation, RecoversSyntheticFrequency) {
  const auto times = linspace_times(10.0, 500);
  std::vector<double> y;
  for (double t : times) y.push_back(0.3 + 0.4 * std::cos(2.345 * t + 0.7));
  EXPECT_NEAR(fit_oscillation_frequency(times, y, 1.0, 4.0), 2.345, 1e-8);
  EXPECT_THROW(fit_oscillation_frequency(times, std::vector<double>(3), 1.0, 2.0), DomainError);
}

TEST(SpectralPropagator, UnitaryAndGroupProperty) {
  const RealMatrix h = build_dicke_hamiltonian(LaserParams::from_mhz(1, 7, 2, -3), EnsembleSpec(6));
  const SpectralPropagator prop(h);
  ComplexVector psi = ComplexVector::Zero(h.rows());
  psi[0] = 1;
  const ComplexVector a = prop.evolve(prop.evolve(psi, 0.3), 0.45);
  const ComplexVector b = prop.evolve(psi, 0.75);
  EXPECT_LE((a - b).norm(), 1e-12);
  EXPECT_NEAR(b.norm(), 1.0, 1e-13);
}
