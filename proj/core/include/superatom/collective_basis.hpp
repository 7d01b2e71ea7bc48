#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "superatom/common.hpp"

namespace superatom {

/// Atom-local level. The ordering g < e < r fixes the product-basis enumeration.
enum class Level : std::uint8_t { g = 0, e = 1, r = 2 };

/// Default size limits for objects built in the blockaded product space.
inline constexpr int kMaxProductAtomsVector = 8;
inline constexpr int kMaxProductAtomsDensity = 4;

/// N three-level atoms under perfect Rydberg blockade.
class EnsembleSpec {
public:
  explicit EnsembleSpec(int n_atoms);

  int n_atoms() const { return n_atoms_; }
  /// Always true: states with two or more Rydberg atoms are excluded.
  static constexpr bool perfect_blockade() { return true; }

  bool operator==(const EnsembleSpec&) const = default;

private:
  int n_atoms_;
};

/// Label |E^j R^s> of a symmetric collective state.
struct DickeIndex {
  int j = 0;  ///< atoms in |e>
  int s = 0;  ///< atoms in |r>, 0 or 1

  int excitations() const { return j + s; }
  bool admissible(const EnsembleSpec& spec) const;

  auto operator<=>(const DickeIndex&) const = default;
};

inline constexpr DickeIndex kGround{0, 0};
inline constexpr DickeIndex kSingleE{1, 0};
inline constexpr DickeIndex kSingleR{0, 1};
inline constexpr DickeIndex kDoubleE{2, 0};
inline constexpr DickeIndex kTargetER{1, 1};

std::string to_string(const DickeIndex& idx);

/// All admissible (j, s) ordered by total excitation n = j + s, then s.
std::vector<DickeIndex> enumerate_dicke(const EnsembleSpec& spec);

/// The 2N+1 symmetric states with a fixed ordering and reverse lookup.
class DickeBasis {
public:
  explicit DickeBasis(const EnsembleSpec& spec);

  const EnsembleSpec& spec() const { return spec_; }
  std::size_t size() const { return states_.size(); }
  const DickeIndex& state(std::size_t i) const { return states_[i]; }
  std::span<const DickeIndex> states() const { return states_; }

  /// Position of idx in the ordering, or nullopt when idx is not admissible.
  std::optional<std::size_t> index_of(const DickeIndex& idx) const;
  /// Like index_of but throws DomainError.
  std::size_t at(const DickeIndex& idx) const;

private:
  EnsembleSpec spec_;
  std::vector<DickeIndex> states_;
};

/// Configuration of all atoms, one Level per atom.
using Configuration = std::vector<Level>;

/// Blockade-truncated product basis, lexicographic in atom-local levels.
/// Dimension is 2^N + N 2^(N-1).
class ProductBasis {
public:
  explicit ProductBasis(const EnsembleSpec& spec,
                        int max_atoms = kMaxProductAtomsVector);

  const EnsembleSpec& spec() const { return spec_; }
  std::size_t size() const { return configs_.size(); }
  const Configuration& config(std::size_t i) const { return configs_[i]; }
  std::optional<std::size_t> index_of(const Configuration& c) const;

  /// Excitation content (j, s) of basis state i.
  DickeIndex content(std::size_t i) const { return content_[i]; }
  bool has_rydberg(std::size_t i) const { return content_[i].s == 1; }

  static std::size_t expected_dimension(int n_atoms);

private:
  static std::uint64_t encode(const Configuration& c);

  EnsembleSpec spec_;
  std::vector<Configuration> configs_;
  std::vector<DickeIndex> content_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

enum class BasisKind { product, dicke, dressed_restricted, effective_two_level };

std::string to_string(BasisKind kind);

/// Pure state over a declared basis.
struct QuantumState {
  BasisKind basis = BasisKind::dicke;
  ComplexVector amplitudes;

  double norm() const { return amplitudes.norm(); }
};

/// Mixed state over a declared basis.
struct DensityMatrix {
  BasisKind basis = BasisKind::product;
  ComplexMatrix rho;
};

/// Throws NumericalError unless |norm - 1| <= tol.
void check_normalized(const QuantumState& state, double tol = 1e-10);

/// Throws NumericalError unless rho is Hermitian, unit-trace and positive
/// semidefinite within the given tolerances.
void check_density_matrix(const DensityMatrix& state, double hermitian_tol = 1e-10,
                          double trace_tol = 1e-8, double eigen_tol = 1e-8);

/// Explicitly symmetrized, unit-norm |E^j R^s> in the product basis.
QuantumState dicke_vector(const ProductBasis& basis, const DickeIndex& idx);

/// Columns are dicke_vector for every Dicke state, in DickeBasis order.
RealMatrix symmetrizer(const ProductBasis& basis, const DickeBasis& dicke);

enum class Transition { ge, er };

/// <target| sum_i |e_i><g_i| (or |e_i><r_i|) |E^j R^s>. For ge the target is
/// |E^{j+1} R^s>; for er the source must have s = 1 and the target is
/// |E^{j+1} R^0>. Returns 0 for pairs that are not coupled.
double collective_raising_element(const EnsembleSpec& spec, int j, int s,
                                  Transition transition);

struct DickeProjection {
  QuantumState state;  ///< Dicke-basis amplitudes, not renormalized
  double leakage = 0;  ///< norm^2 of the component outside the symmetric manifold
};

/// Splits a product-basis pure state into its symmetric part and leakage.
DickeProjection project_to_dicke(const QuantumState& state, const ProductBasis& basis);

}  // namespace superatom
