#include "superatom/collective_basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace superatom {

EnsembleSpec::EnsembleSpec(int n_atoms) : n_atoms_(n_atoms) {
  if (n_atoms < 1) {
    throw DomainError("EnsembleSpec: n_atoms must be >= 1, got " + std::to_string(n_atoms));
  }
}

bool DickeIndex::admissible(const EnsembleSpec& spec) const {
  return j >= 0 && (s == 0 || s == 1) && j + s <= spec.n_atoms();
}

std::string to_string(const DickeIndex& idx) {
  std::ostringstream os;
  os << "|E^" << idx.j << " R^" << idx.s << ">";
  return os.str();
}

std::vector<DickeIndex> enumerate_dicke(const EnsembleSpec& spec) {
  const int n_atoms = spec.n_atoms();
  std::vector<DickeIndex> out;
  out.reserve(2 * static_cast<std::size_t>(n_atoms) + 1);
  out.push_back({0, 0});
  for (int n = 1; n <= n_atoms; ++n) {
    out.push_back({n, 0});
    out.push_back({n - 1, 1});
  }
  return out;
}

DickeBasis::DickeBasis(const EnsembleSpec& spec) : spec_(spec), states_(enumerate_dicke(spec)) {}

std::optional<std::size_t> DickeBasis::index_of(const DickeIndex& idx) const {
  if (!idx.admissible(spec_)) return std::nullopt;
  // n = 0 -> 0; n >= 1 -> 2n - 1 + s.
  const int n = idx.excitations();
  if (n == 0) return 0;
  return static_cast<std::size_t>(2 * n - 1 + idx.s);
}

std::size_t DickeBasis::at(const DickeIndex& idx) const {
  auto i = index_of(idx);
  if (!i) {
    throw DomainError("Dicke index " + to_string(idx) + " is not admissible for N=" +
                      std::to_string(spec_.n_atoms()));
  }
  return *i;
}

ProductBasis::ProductBasis(const EnsembleSpec& spec, int max_atoms) : spec_(spec) {
  const int n_atoms = spec.n_atoms();
  if (n_atoms > max_atoms) {
    throw CapacityError("product basis for N=" + std::to_string(n_atoms) +
                        " exceeds the configured limit N<=" + std::to_string(max_atoms));
  }
  configs_.reserve(expected_dimension(n_atoms));
  Configuration c(static_cast<std::size_t>(n_atoms), Level::g);
  // Odometer over {g,e,r}^N with atom 0 most significant.
  while (true) {
    const auto n_r = std::count(c.begin(), c.end(), Level::r);
    if (n_r <= 1) {
      const auto n_e = std::count(c.begin(), c.end(), Level::e);
      lookup_.emplace(encode(c), configs_.size());
      configs_.push_back(c);
      content_.push_back({static_cast<int>(n_e), static_cast<int>(n_r)});
    }
    int pos = n_atoms - 1;
    while (pos >= 0 && c[pos] == Level::r) {
      c[pos] = Level::g;
      --pos;
    }
    if (pos < 0) break;
    c[pos] = static_cast<Level>(static_cast<int>(c[pos]) + 1);
  }
}

std::uint64_t ProductBasis::encode(const Configuration& c) {
  std::uint64_t code = 0;
  for (Level l : c) code = code * 3 + static_cast<std::uint64_t>(l);
  return code;
}

std::optional<std::size_t> ProductBasis::index_of(const Configuration& c) const {
  if (c.size() != static_cast<std::size_t>(spec_.n_atoms())) return std::nullopt;
  auto it = lookup_.find(encode(c));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t ProductBasis::expected_dimension(int n_atoms) {
  const std::size_t pow2 = std::size_t{1} << n_atoms;
  return pow2 + static_cast<std::size_t>(n_atoms) * (pow2 / 2);
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::product: return "product";
    case BasisKind::dicke: return "dicke";
    case BasisKind::dressed_restricted: return "dressed-restricted";
    case BasisKind::effective_two_level: return "effective-two-level";
  }
  return "unknown";
}

void check_normalized(const QuantumState& state, double tol) {
  const double n = state.norm();
  if (std::abs(n - 1.0) > tol) {
    throw NumericalError("state norm deviates from 1 by " + std::to_string(n - 1.0));
  }
}

void check_density_matrix(const DensityMatrix& state, double hermitian_tol, double trace_tol,
                          double eigen_tol) {
  const ComplexMatrix& rho = state.rho;
  if (rho.rows() != rho.cols()) throw NumericalError("density matrix is not square");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > hermitian_tol) {
    throw NumericalError("density matrix not Hermitian: max |rho - rho^dag| = " +
                         std::to_string(herm));
  }
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > trace_tol) {
    throw NumericalError("density matrix trace deviates from 1 by " + std::to_string(tr - 1.0));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -eigen_tol) {
    throw NumericalError("density matrix has negative eigenvalue " + std::to_string(min_ev));
  }
}

QuantumState dicke_vector(const ProductBasis& basis, const DickeIndex& idx) {
  if (!idx.admissible(basis.spec())) {
    throw DomainError("dicke_vector: " + to_string(idx) + " is not admissible for N=" +
                      std::to_string(basis.spec().n_atoms()));
  }
  QuantumState out{BasisKind::product, ComplexVector::Zero(static_cast<Eigen::Index>(basis.size()))};
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis.content(i) == idx) out.amplitudes[static_cast<Eigen::Index>(i)] = 1.0;
  }
  out.amplitudes /= out.amplitudes.norm();
  return out;
}

RealMatrix symmetrizer(const ProductBasis& basis, const DickeBasis& dicke) {
  RealMatrix s = RealMatrix::Zero(static_cast<Eigen::Index>(basis.size()),
                                  static_cast<Eigen::Index>(dicke.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto col = dicke.index_of(basis.content(i));
    s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*col)) = 1.0;
  }
  for (Eigen::Index c = 0; c < s.cols(); ++c) s.col(c).normalize();
  return s;
}

double collective_raising_element(const EnsembleSpec& spec, int j, int s, Transition transition) {
  const int n_atoms = spec.n_atoms();
  const DickeIndex source{j, s};
  if (!source.admissible(spec)) return 0.0;
  switch (transition) {
    case Transition::ge: {
      const DickeIndex target{j + 1, s};
      if (!target.admissible(spec)) return 0.0;
      return std::sqrt(static_cast<double>(j + 1) * static_cast<double>(n_atoms - j - s));
    }
    case Transition::er: {
      if (s != 1) return 0.0;
      return std::sqrt(static_cast<double>(j + 1));
    }
  }
  return 0.0;
}

DickeProjection project_to_dicke(const QuantumState& state, const ProductBasis& basis) {
  if (state.basis != BasisKind::product) {
    throw DomainError("project_to_dicke expects a product-basis state");
  }
  if (state.amplitudes.size() != static_cast<Eigen::Index>(basis.size())) {
    throw DomainError("project_to_dicke: dimension mismatch");
  }
  const DickeBasis dicke(basis.spec());
  ComplexVector sums = ComplexVector::Zero(static_cast<Eigen::Index>(dicke.size()));
  std::vector<double> counts(dicke.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto k = *dicke.index_of(basis.content(i));
    sums[static_cast<Eigen::Index>(k)] += state.amplitudes[static_cast<Eigen::Index>(i)];
    counts[k] += 1.0;
  }
  for (std::size_t k = 0; k < dicke.size(); ++k) {
    sums[static_cast<Eigen::Index>(k)] /= std::sqrt(counts[k]);
  }
  const double total = state.amplitudes.squaredNorm();
  const double inside = sums.squaredNorm();
  return {QuantumState{BasisKind::dicke, sums}, std::max(0.0, total - inside)};
}

}  // namespace superatom
