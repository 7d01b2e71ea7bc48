#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "superatom/collective_basis.hpp"
#include "superatom/dynamics.hpp"

namespace superatom {

/// Decoherence rates in rad/us (file I/O uses Gamma / 2pi in MHz).
struct DecoherenceRates {
  double gamma_e = 0;     ///< |e> -> |g> spontaneous decay
  double gamma_r = 0;     ///< |r> -> |e> spontaneous decay
  double gamma_d = 0;     ///< single-atom dephasing of |r>
  double gamma_coll = 0;  ///< collective dephasing, projectors on Dicke states

  void validate() const;
  bool all_zero() const { return gamma_e == 0 && gamma_r == 0 && gamma_d == 0 && gamma_coll == 0; }
  bool operator==(const DecoherenceRates&) const = default;
};

struct JumpOperator {
  double rate = 0;
  Eigen::SparseMatrix<double> op;
  std::string label;
};

/// Per-atom |g_k><e_k| (gamma_e), |e_k><r_k| (gamma_r), |r_k><r_k| (gamma_d)
/// and collective |E^j R^s><E^j R^s| (gamma_coll). Single-atom terms need the
/// product basis; the Dicke basis accepts gamma_coll only.
std::vector<JumpOperator> lindblad_operators(const DecoherenceRates& rates,
                                             const EnsembleSpec& spec, BasisKind basis);

struct LindbladOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double min_step = 1e-14;        ///< us
  std::size_t max_steps = 50'000'000;
  /// Dimension limit, the product space of kMaxProductAtomsDensity atoms.
  Eigen::Index max_dimension = 48;
  double trace_tol = 1e-7;
  double hermitian_tol = 1e-8;
  double eigen_tol = 1e-6;
};

struct LindbladResult {
  Trajectory trajectory;
  ComplexMatrix final_rho;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// Integrates d rho/dt = -i[H, rho] + sum_k gamma_k (L rho L^dag - {L^dag L, rho}/2)
/// with an embedded Dormand-Prince 5(4) pair. Trace, Hermiticity and the
/// smallest eigenvalue are checked at every output time; violations throw
/// NumericalError rather than being projected away.
LindbladResult evolve_lindblad(const RealMatrix& hamiltonian, std::span<const JumpOperator> jumps,
                               const ComplexMatrix& rho0, std::span<const double> times,
                               const ObservableMap& observe, const LindbladOptions& options = {});

}  // namespace superatom
