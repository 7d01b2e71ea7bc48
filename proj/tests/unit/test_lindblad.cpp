#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "superatom/hamiltonians.hpp"
#include "superatom/lindblad.hpp"

using namespace superatom;

namespace {

Eigen::Index rank_of(const Eigen::SparseMatrix<double>& op) {
  Eigen::ColPivHouseholderQR<RealMatrix> qr{RealMatrix(op)};
  return qr.rank();
}

// Blockaded configurations of the other N-1 atoms with atom k fixed.
Eigen::Index spectator_count(int n_others, bool fixed_is_rydberg) {
  const Eigen::Index no_r = Eigen::Index{1} << n_others;
  return fixed_is_rydberg ? no_r : no_r + n_others * (Eigen::Index{1} << (n_others - 1));
}

ComplexMatrix pure(const ComplexVector& v) { return v * v.adjoint(); }

}  // namespace

TEST(DecoherenceRates, Validation) {
  DecoherenceRates r;
  EXPECT_TRUE(r.all_zero());
  EXPECT_NO_THROW(r.validate());
  r.gamma_d = -1;
  EXPECT_THROW(r.validate(), DomainError);
  r.gamma_d = NAN;
  EXPECT_THROW(r.validate(), DomainError);
}

TEST(LindbladOperators, EmptyWhenAllRatesZero) {
  EXPECT_TRUE(lindblad_operators({}, EnsembleSpec(3), BasisKind::product).empty());
  EXPECT_TRUE(lindblad_operators({}, EnsembleSpec(3), BasisKind::dicke).empty());
}

TEST(LindbladOperators, SingleAtomChannels) {
  const EnsembleSpec spec(3);
  DecoherenceRates r;
  r.gamma_e = 0.5;
  const auto e_ops = lindblad_operators(r, spec, BasisKind::product);
  ASSERT_EQ(e_ops.size(), 3u);
  for (const auto& j : e_ops) {
    EXPECT_EQ(j.op.rows(), 20);
    EXPECT_EQ(j.rate, 0.5);
    // atom k in e, the two others anywhere in the blockaded space: 2^2 + 2 * 2
    EXPECT_EQ(rank_of(j.op), spectator_count(2, false));
    EXPECT_EQ(rank_of(j.op), 8);
  }
  r = {};
  r.gamma_r = 0.2;
  for (const auto& j : lindblad_operators(r, spec, BasisKind::product)) {
    EXPECT_EQ(rank_of(j.op), spectator_count(2, true));
    EXPECT_EQ(rank_of(j.op), 4);
  }
  r = {};
  r.gamma_d = 0.2;
  const auto d_ops = lindblad_operators(r, spec, BasisKind::product);
  ASSERT_EQ(d_ops.size(), 3u);
  for (const auto& j : d_ops) {
    EXPECT_EQ(rank_of(j.op), 4);
    const RealMatrix m(j.op);
    EXPECT_LE((m * m - m).cwiseAbs().maxCoeff(), 0.0);  // projector
  }
}

TEST(LindbladOperators, CollectiveProjectors) {
  DecoherenceRates r;
  r.gamma_coll = 0.1;
  const auto dicke_ops = lindblad_operators(r, EnsembleSpec(3), BasisKind::dicke);
  EXPECT_EQ(dicke_ops.size(), 7u);
  const auto prod_ops = lindblad_operators(r, EnsembleSpec(3), BasisKind::product);
  ASSERT_EQ(prod_ops.size(), 7u);
  RealMatrix sum = RealMatrix::Zero(20, 20);
  for (const auto& j : prod_ops) {
    const RealMatrix m(j.op);
    EXPECT_LE((m * m - m).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(m.trace(), 1.0, 1e-14);
    sum += m;
  }
  EXPECT_NEAR(sum.trace(), 7.0, 1e-12);
}

TEST(LindbladOperators, BasisIncompatibility) {
  DecoherenceRates r;
  r.gamma_e = 0.1;
  EXPECT_THROW(lindblad_operators(r, EnsembleSpec(3), BasisKind::dicke), DomainError);
  EXPECT_THROW(lindblad_operators(r, EnsembleSpec(3), BasisKind::dressed_restricted), DomainError);
  EXPECT_THROW(lindblad_operators(r, EnsembleSpec(5), BasisKind::product), CapacityError);
}

TEST(EvolveLindblad, UnitaryLimit) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.5, 6.0);
  for (int n = 1; n <= 3; ++n) {
    const EnsembleSpec spec(n);
    const ProductBasis pb(spec, kMaxProductAtomsDensity);
    const RealMatrix h = build_product_hamiltonian({u(rng), u(rng), u(rng) - 3, u(rng) - 3}, pb);
    ComplexVector psi = ComplexVector::Zero(h.rows());
    psi[0] = 1;
    const auto times = linspace_times(3.0, 31);
    const ObservableMap obs = ObservableMap::product(pb);
    const LindbladResult lr = evolve_lindblad(h, {}, pure(psi), times, obs);
    const Trajectory tr = propagate_pure(h, psi, times, obs);
    const SpectralPropagator prop(h);
    for (std::size_t i = 0; i < times.size(); ++i) {
      EXPECT_NEAR(lr.trajectory.samples[i].p_G, tr.samples[i].p_G, 1e-7);
      EXPECT_NEAR(lr.trajectory.samples[i].p_E, tr.samples[i].p_E, 1e-7);
      EXPECT_NEAR(lr.trajectory.samples[i].p_rydberg, tr.samples[i].p_rydberg, 1e-7);
    }
    const ComplexVector fin = prop.evolve(psi, times.back());
    EXPECT_LE((lr.final_rho - pure(fin)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(EvolveLindblad, IntermediateDecayOracle) {
  const EnsembleSpec one(1);
  const ProductBasis pb(one);
  DecoherenceRates r;
  r.gamma_e = 1.3;
  const auto jumps = lindblad_operators(r, one, BasisKind::product);
  ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
  rho(1, 1) = 1;
  const auto times = linspace_times(4.0, 41);
  const LindbladResult lr =
      evolve_lindblad(RealMatrix::Zero(3, 3), jumps, rho, times, ObservableMap::product(pb));
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(lr.trajectory.samples[i].p_E, std::exp(-1.3 * times[i]), 1e-8);
    EXPECT_NEAR(lr.trajectory.samples[i].p_G, 1 - std::exp(-1.3 * times[i]), 1e-8);
  }
}

TEST(EvolveLindblad, RydbergDecayOracle) {
  const EnsembleSpec one(1);
  const ProductBasis pb(one);
  DecoherenceRates r;
  r.gamma_r = 0.7;
  const auto jumps = lindblad_operators(r, one, BasisKind::product);
  ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
  rho(2, 2) = 1;
  const auto times = linspace_times(3.0, 31);
  const LindbladResult lr =
      evolve_lindblad(RealMatrix::Zero(3, 3), jumps, rho, times, ObservableMap::product(pb));
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(lr.trajectory.samples[i].p_rydberg, std::exp(-0.7 * times[i]), 1e-8);
    EXPECT_NEAR(lr.trajectory.samples[i].p_E, 1 - std::exp(-0.7 * times[i]), 1e-8);
  }
}

TEST(EvolveLindblad, DephasingOracle) {
  const EnsembleSpec one(1);
  const ProductBasis pb(one);
  DecoherenceRates r;
  r.gamma_d = 0.9;
  const auto jumps = lindblad_operators(r, one, BasisKind::product);
  ComplexVector plus = ComplexVector::Zero(3);
  plus[0] = plus[2] = 1 / std::sqrt(2.0);
  const std::vector<double> times{0.5, 1.0, 2.0};
  const LindbladResult lr = evolve_lindblad(RealMatrix::Zero(3, 3), jumps, pure(plus), times,
                                            ObservableMap::product(pb));
  EXPECT_NEAR(std::abs(lr.final_rho(0, 2)), 0.5 * std::exp(-0.45 * 2.0), 1e-8);
  EXPECT_NEAR(lr.final_rho(2, 2).real(), 0.5, 1e-10);
}

TEST(EvolveLindblad, Linearity) {
  const EnsembleSpec spec(2);
  const ProductBasis pb(spec, kMaxProductAtomsDensity);
  const RealMatrix h = build_product_hamiltonian({2.0, 9.0, 3.0, -4.0}, pb);
  DecoherenceRates r;
  r.gamma_e = 0.6;
  r.gamma_r = 0.2;
  r.gamma_d = 0.3;
  const auto jumps = lindblad_operators(r, spec, BasisKind::product);
  ComplexVector a = ComplexVector::Zero(h.rows());
  a[0] = 1;
  ComplexVector b = ComplexVector::Ones(h.rows()).normalized();
  const std::vector<double> times{1.5};
  LindbladOptions tight;
  tight.rtol = 1e-11;
  tight.atol = 1e-13;
  const ObservableMap obs = ObservableMap::product(pb);
  const double w = 0.35;
  const ComplexMatrix mix = w * pure(a) + (1 - w) * pure(b);
  const ComplexMatrix ra = evolve_lindblad(h, jumps, pure(a), times, obs, tight).final_rho;
  const ComplexMatrix rb = evolve_lindblad(h, jumps, pure(b), times, obs, tight).final_rho;
  const ComplexMatrix rm = evolve_lindblad(h, jumps, mix, times, obs, tight).final_rho;
  EXPECT_LE((rm - (w * ra + (1 - w) * rb)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(EvolveLindblad, InvariantsAlongDissipativeTrajectory) {
  const EnsembleSpec spec(3);
  const ProductBasis pb(spec, kMaxProductAtomsDensity);
  const RealMatrix h = build_product_hamiltonian(LaserParams::from_mhz(1, 5, 2.5, -2.5), pb);
  DecoherenceRates r;
  r.gamma_e = 1.0;
  r.gamma_r = 0.5;
  r.gamma_d = 0.5;
  r.gamma_coll = 0.2;
  const auto jumps = lindblad_operators(r, spec, BasisKind::product);
  ComplexMatrix rho = ComplexMatrix::Zero(h.rows(), h.cols());
  rho(0, 0) = 1;
  const auto times = linspace_times(2.0, 21);
  const LindbladResult lr = evolve_lindblad(h, jumps, rho, times, ObservableMap::product(pb));
  for (double tr : lr.trajectory.norm_or_trace) EXPECT_NEAR(tr, 1.0, 1e-7);
  EXPECT_NO_THROW(check_density_matrix({BasisKind::product, lr.final_rho}, 1e-8, 1e-7, 1e-6));
  EXPECT_GT(lr.accepted_steps, 0u);
}

TEST(EvolveLindblad, Errors) {
  const RealMatrix h = RealMatrix::Zero(3, 3);
  const auto obs = ObservableMap::product(ProductBasis(EnsembleSpec(1)));
  ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
  rho(0, 0) = 1;
  const std::vector<double> times{1.0};
  EXPECT_THROW(evolve_lindblad(RealMatrix::Zero(49, 49), {}, ComplexMatrix::Identity(49, 49) / 49.0,
                               times, obs),
               CapacityError);
  EXPECT_THROW(evolve_lindblad(h, {}, ComplexMatrix::Identity(2, 2) / 2.0, times, obs), DomainError);
  EXPECT_THROW(evolve_lindblad(h, {}, ComplexMatrix(2.0 * rho), times, obs), NumericalError);
  const std::vector<double> backwards{1.0, 0.5};
  EXPECT_THROW(evolve_lindblad(h, {}, rho, backwards, obs), DomainError);

  LindbladOptions tiny;
  tiny.max_steps = 3;
  const RealMatrix hr = build_product_hamiltonian({5.0, 0, 0, 0}, ProductBasis(EnsembleSpec(1)));
  const std::vector<double> long_time{50.0};
  EXPECT_THROW(evolve_lindblad(hr, {}, rho, long_time, obs, tiny), NumericalError);
}
