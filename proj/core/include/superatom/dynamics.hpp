#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "superatom/collective_basis.hpp"
#include "superatom/common.hpp"

namespace superatom {

/// Below this total Rydberg population the false-herald fraction is undefined.
inline constexpr double kRydbergEpsilon = 1e-12;

/// Protocol observables of one state. `infidelity` is empty when no ion would
/// be detected (p_rydberg <= kRydbergEpsilon); it is never replaced by 0 or 1.
struct Observables {
  double p_G = 0;
  double p_E = 0;
  double p_R = 0;
  double p_E2 = 0;
  double p_ER = 0;
  double p_rydberg = 0;
  std::optional<double> p_target;  ///< population of |2+>, when a target is set
  std::optional<double> infidelity;
};

/// (p_rydberg - p_ER) / p_rydberg, or nullopt below kRydbergEpsilon.
std::optional<double> false_herald_fraction(double p_rydberg, double p_er);

/// Maps states of one basis onto the protocol observables.
///
/// Symmetric-state populations are taken from the projection onto the Dicke
/// basis. The total Rydberg population is read off the native basis when it
/// is diagonal there (product and Dicke bases), so population that leaked out
/// of the symmetric manifold still counts as a herald.
class ObservableMap {
public:
  static ObservableMap dicke(const EnsembleSpec& spec);
  static ObservableMap product(const ProductBasis& basis);
  /// `embedding` has the Dicke-basis expansion of each native basis vector as a column.
  static ObservableMap embedded(const EnsembleSpec& spec, RealMatrix embedding);

  /// Adds p_target = |<target|psi>|^2 with target given in the native basis.
  ObservableMap& with_target(ComplexVector target);

  Observables operator()(const ComplexVector& psi) const;
  Observables operator()(const ComplexMatrix& rho) const;

  Eigen::Index dimension() const { return to_dicke_.cols(); }
  /// Row i is <D_i| expressed in the native basis.
  const RealMatrix& to_dicke() const { return to_dicke_; }
  /// Rydberg projector diagonal: over the native basis when rydberg_mask_native(),
  /// otherwise over the Dicke basis.
  const RealVector& rydberg_mask() const { return rydberg_mask_; }
  bool rydberg_mask_native() const { return mask_native_; }
  /// Rydberg projector as a matrix over the native basis.
  RealMatrix rydberg_projector() const;
  const EnsembleSpec& spec() const { return spec_; }

private:
  ObservableMap(EnsembleSpec spec, RealMatrix to_dicke, std::optional<RealVector> mask);

  Observables finish(const Eigen::VectorXd& dicke_pops, double p_rydberg,
                     std::optional<double> p_target) const;

  EnsembleSpec spec_;
  RealMatrix to_dicke_;
  RealVector rydberg_mask_;
  bool mask_native_ = true;
  std::optional<ComplexVector> target_;
  Eigen::Index i_g_, i_e_, i_r_, i_e2_ = -1, i_er_ = -1;
};

/// Observables of a single state (pure or mixed) in a product or Dicke basis.
Observables observables(const QuantumState& state, const EnsembleSpec& spec);
Observables observables(const DensityMatrix& state, const EnsembleSpec& spec);

/// Time series of observables.
struct Trajectory {
  std::vector<double> times;  ///< us, strictly increasing
  std::vector<Observables> samples;
  std::vector<double> norm_or_trace;

  std::size_t size() const { return times.size(); }
};

/// Evenly spaced times 0, T/(n-1), ..., T.
std::vector<double> linspace_times(double t_end, std::size_t n_samples);

/// Exact propagator exp(-iHt) from the spectral decomposition of a real
/// symmetric H.
class SpectralPropagator {
public:
  explicit SpectralPropagator(const RealMatrix& hamiltonian, double hermitian_tol = 1e-12);

  ComplexVector evolve(const ComplexVector& psi0, double t) const;

  const RealVector& energies() const { return energies_; }
  const RealMatrix& eigenvectors() const { return vectors_; }
  Eigen::Index dimension() const { return energies_.size(); }

private:
  RealVector energies_;
  RealMatrix vectors_;
};

/// psi(t) = exp(-iHt) psi0 at each time; the norm is checked to 1e-10.
Trajectory propagate_pure(const RealMatrix& hamiltonian, const ComplexVector& psi0,
                          std::span<const double> times, const ObservableMap& observe);

/// Exact Rabi population sin^2(omega t / 2) of a resonant two-level system.
double rabi_population(double omega, double t);

/// Least-squares frequency of the dominant oscillation a + b cos(w t) + c sin(w t)
/// in `values`, searched in [w_min, w_max].
double fit_oscillation_frequency(std::span<const double> times, std::span<const double> values,
                                 double w_min, double w_max);

}  // namespace superatom
