#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "superatom/collective_basis.hpp"
#include "superatom/common.hpp"

namespace superatom {

/// Probe and coupling Rabi frequencies and detunings, angular units (rad/us).
struct LaserParams {
  double omega_p = 0;
  double omega_c = 0;
  double delta_p = 0;
  double delta_c = 0;

  /// Builds parameters from ordinary frequencies nu = Omega / 2pi in MHz.
  static LaserParams from_mhz(double omega_p_mhz, double omega_c_mhz, double delta_p_mhz,
                              double delta_c_mhz);

  /// Throws DomainError unless omega_p >= 0 and omega_c > 0.
  void validate() const;
  /// Weaker check used by the matrix builders: both Rabi frequencies >= 0, so
  /// probe-only and coupling-only stages can be built.
  void validate_drive() const;

  bool operator==(const LaserParams&) const = default;
};

/// Blockaded product-basis Hamiltonian in the rotating frame.
RealMatrix build_product_hamiltonian(const LaserParams& params, const ProductBasis& basis);

/// (2N+1)x(2N+1) Hamiltonian over the symmetric Dicke states. The matrix is
/// pentadiagonal in DickeBasis order; the sparse form is meant for large N.
RealMatrix build_dicke_hamiltonian(const LaserParams& params, const EnsembleSpec& spec);
Eigen::SparseMatrix<double> build_dicke_hamiltonian_sparse(const LaserParams& params,
                                                           const EnsembleSpec& spec);

enum class Branch { plus, minus };

/// Eigenstate of the coupling-laser block with total excitation n.
struct DressedState {
  int n = 0;
  Branch branch = Branch::plus;
  double energy = 0;
  /// Amplitudes on (|E^n R^0>, |E^{n-1} R^1>); first nonzero entry positive.
  Eigen::Vector2d composition = Eigen::Vector2d::Zero();
};

/// Both branches of the 2x2 block with diagonal (-n dp, -n dp - dc) and
/// off-diagonal sqrt(n) omega_c / 2. Element 0 is the + (higher) branch.
std::array<DressedState, 2> dressed_block(const LaserParams& params, int n);

/// Probe detuning that puts the chosen dressed state of block n at zero energy.
double resonance_probe_detuning(double omega_c, double delta_c, int n = 2,
                                Branch branch = Branch::plus);

/// Reduced model over the low-lying dressed states |G>, |1+>, |1->, |2+>,
/// |3+>, |3-> (states absent for small N are dropped).
struct RestrictedModel {
  std::vector<std::string> labels;
  RealMatrix hamiltonian;
  /// Columns are the dressed states expressed in the Dicke basis.
  RealMatrix embedding;
  /// Position of |2+> in the restricted basis.
  Eigen::Index target_index = -1;
};

RestrictedModel build_restricted_hamiltonian(const LaserParams& params, const EnsembleSpec& spec);

/// Adiabatically eliminated G <-> 2+ model. Valid only for delta_c = -omega_c / 2.
struct EffectiveTwoLevel {
  double omega_eff = 0;
  double delta_eff = 0;
  /// Amplitudes of |2+> on (|E^2>, |ER>).
  Eigen::Vector2d target_composition = Eigen::Vector2d::Zero();
};

/// True when delta_c equals -omega_c / 2 to relative precision tol.
bool is_half_coupling_detuning(double omega_c, double delta_c, double tol = 1e-9);

/// Closed forms Omega_eff = sqrt(2/3) sqrt(N(N-1)) Omega_p^2 / Omega_c and
/// Delta_eff = (2N - 7)/3 Omega_p^2 / Omega_c. Throws UnsupportedRegimeError
/// when delta_c != -omega_c / 2 and DomainError for N < 2.
EffectiveTwoLevel effective_two_level(const LaserParams& params, const EnsembleSpec& spec);

/// Probe Rabi frequency giving the requested Omega_eff under the closed form.
double probe_rabi_for_effective(double omega_eff, double omega_c, const EnsembleSpec& spec);

/// Delta_p = -Delta_c + Delta_eff / 2.
double compensated_probe_detuning(double omega_p, double omega_c, const EnsembleSpec& spec);

/// 2x2 Hamiltonian over {|G>, |2+>}: off-diagonal Omega_eff / 2, and |2+>
/// detuned by its dressed energy plus Delta_eff.
RealMatrix build_two_level_hamiltonian(const LaserParams& params, const EnsembleSpec& spec);

/// Same matrix as build_dicke_hamiltonian, read as a driven Jaynes-Cummings model.
RealMatrix build_jc_hamiltonian(const LaserParams& params, const EnsembleSpec& spec);

/// Jaynes-Cummings reading of a Dicke label: e-excitations are cavity photons,
/// the Rydberg excitation is the two-level atom.
struct JcLabel {
  int photons = 0;
  bool atom_excited = false;
  bool operator==(const JcLabel&) const = default;
};
JcLabel jc_label(const DickeIndex& idx);
std::string to_string(const JcLabel& label);

/// Quantum Fisher information N + 2m(N - m) of the Dicke state with m excitations.
double quantum_fisher_dicke(int n_atoms, int m);

}  // namespace superatom
