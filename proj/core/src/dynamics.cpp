#include "superatom/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <boost/math/tools/minima.hpp>

namespace superatom {

std::optional<double> false_herald_fraction(double p_rydberg, double p_er) {
  if (!(p_rydberg > kRydbergEpsilon)) return std::nullopt;
  return std::clamp((p_rydberg - p_er) / p_rydberg, 0.0, 1.0);
}

ObservableMap::ObservableMap(EnsembleSpec spec, RealMatrix to_dicke, std::optional<RealVector> mask)
    : spec_(spec), to_dicke_(std::move(to_dicke)) {
  const DickeBasis dicke(spec_);
  if (mask) {
    rydberg_mask_ = std::move(*mask);
  } else {
    mask_native_ = false;
    rydberg_mask_ = RealVector::Zero(static_cast<Eigen::Index>(dicke.size()));
    for (std::size_t k = 0; k < dicke.size(); ++k) {
      if (dicke.state(k).s == 1) rydberg_mask_[static_cast<Eigen::Index>(k)] = 1.0;
    }
  }
  auto pos = [&](const DickeIndex& idx) -> Eigen::Index {
    auto i = dicke.index_of(idx);
    return i ? static_cast<Eigen::Index>(*i) : -1;
  };
  i_g_ = pos(kGround);
  i_e_ = pos(kSingleE);
  i_r_ = pos(kSingleR);
  i_e2_ = pos(kDoubleE);
  i_er_ = pos(kTargetER);
}

ObservableMap ObservableMap::dicke(const EnsembleSpec& spec) {
  const DickeBasis basis(spec);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  RealVector mask = RealVector::Zero(dim);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis.state(k).s == 1) mask[static_cast<Eigen::Index>(k)] = 1.0;
  }
  return ObservableMap(spec, RealMatrix::Identity(dim, dim), std::move(mask));
}

ObservableMap ObservableMap::product(const ProductBasis& basis) {
  const DickeBasis dicke(basis.spec());
  RealVector mask = RealVector::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis.has_rydberg(i)) mask[static_cast<Eigen::Index>(i)] = 1.0;
  }
  return ObservableMap(basis.spec(), symmetrizer(basis, dicke).transpose(), std::move(mask));
}

ObservableMap ObservableMap::embedded(const EnsembleSpec& spec, RealMatrix embedding) {
  if (embedding.rows() != 2 * static_cast<Eigen::Index>(spec.n_atoms()) + 1) {
    throw DomainError("ObservableMap::embedded: embedding rows must equal the Dicke dimension");
  }
  return ObservableMap(spec, std::move(embedding), std::nullopt);
}

RealMatrix ObservableMap::rydberg_projector() const {
  if (mask_native_) return rydberg_mask_.asDiagonal();
  return to_dicke_.transpose() * rydberg_mask_.asDiagonal() * to_dicke_;
}

ObservableMap& ObservableMap::with_target(ComplexVector target) {
  if (target.size() != dimension()) {
    throw DomainError("ObservableMap::with_target: dimension mismatch");
  }
  target_ = std::move(target);
  return *this;
}

Observables ObservableMap::finish(const Eigen::VectorXd& pops, double p_rydberg,
                                  std::optional<double> p_target) const {
  auto at = [&](Eigen::Index i) { return i >= 0 ? pops[i] : 0.0; };
  Observables o;
  o.p_G = at(i_g_);
  o.p_E = at(i_e_);
  o.p_R = at(i_r_);
  o.p_E2 = at(i_e2_);
  o.p_ER = at(i_er_);
  o.p_rydberg = p_rydberg;
  o.p_target = p_target;
  o.infidelity = false_herald_fraction(o.p_rydberg, o.p_ER);
  return o;
}

Observables ObservableMap::operator()(const ComplexVector& psi) const {
  if (psi.size() != dimension()) throw DomainError("observables: dimension mismatch");
  const ComplexVector d = to_dicke_.cast<Complex>() * psi;
  const Eigen::VectorXd pops = d.cwiseAbs2();
  const double p_ryd = mask_native_ ? rydberg_mask_.dot(psi.cwiseAbs2())
                                    : rydberg_mask_.dot(pops);
  std::optional<double> pt;
  if (target_) pt = std::norm(target_->dot(psi));
  return finish(pops, p_ryd, pt);
}

Observables ObservableMap::operator()(const ComplexMatrix& rho) const {
  if (rho.rows() != dimension() || rho.cols() != dimension()) {
    throw DomainError("observables: dimension mismatch");
  }
  const ComplexMatrix proj = to_dicke_.cast<Complex>();
  const ComplexMatrix rho_d = proj * rho * proj.transpose();
  const Eigen::VectorXd pops = rho_d.diagonal().real();
  const double p_ryd = mask_native_ ? rydberg_mask_.dot(rho.diagonal().real())
                                    : rydberg_mask_.dot(pops);
  std::optional<double> pt;
  if (target_) pt = (target_->adjoint() * rho * (*target_))(0, 0).real();
  return finish(pops, p_ryd, pt);
}

Observables observables(const QuantumState& state, const EnsembleSpec& spec) {
  switch (state.basis) {
    case BasisKind::dicke: return ObservableMap::dicke(spec)(state.amplitudes);
    case BasisKind::product: return ObservableMap::product(ProductBasis(spec))(state.amplitudes);
    default: throw DomainError("observables: state basis must be product or dicke");
  }
}

Observables observables(const DensityMatrix& state, const EnsembleSpec& spec) {
  switch (state.basis) {
    case BasisKind::dicke: return ObservableMap::dicke(spec)(state.rho);
    case BasisKind::product:
      return ObservableMap::product(ProductBasis(spec, kMaxProductAtomsDensity))(state.rho);
    default: throw DomainError("observables: state basis must be product or dicke");
  }
}

std::vector<double> linspace_times(double t_end, std::size_t n_samples) {
  if (n_samples < 2) throw DomainError("linspace_times: need at least two samples");
  if (!(t_end > 0)) throw DomainError("linspace_times: end time must be > 0");
  std::vector<double> t(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    t[i] = t_end * static_cast<double>(i) / static_cast<double>(n_samples - 1);
  }
  return t;
}

SpectralPropagator::SpectralPropagator(const RealMatrix& hamiltonian, double hermitian_tol) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw DomainError("SpectralPropagator: Hamiltonian is not square");
  }
  const double asym = (hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff();
  if (asym > hermitian_tol * std::max(1.0, hamiltonian.cwiseAbs().maxCoeff())) {
    throw DomainError("SpectralPropagator: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(hamiltonian);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  energies_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

ComplexVector SpectralPropagator::evolve(const ComplexVector& psi0, double t) const {
  if (psi0.size() != dimension()) throw DomainError("evolve: dimension mismatch");
  ComplexVector c = vectors_.transpose().cast<Complex>() * psi0;
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::polar(1.0, -energies_[k] * t);
  return vectors_.cast<Complex>() * c;
}

Trajectory propagate_pure(const RealMatrix& hamiltonian, const ComplexVector& psi0,
                          std::span<const double> times, const ObservableMap& observe) {
  if (hamiltonian.rows() != psi0.size()) throw DomainError("propagate_pure: dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("propagate_pure: psi0 not normalized");
  const SpectralPropagator prop(hamiltonian);
  Trajectory out;
  out.times.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw DomainError("propagate_pure: times must be strictly increasing");
    }
    const ComplexVector psi = prop.evolve(psi0, times[i]);
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) throw NumericalError("propagate_pure: norm drift");
    out.times.push_back(times[i]);
    out.samples.push_back(observe(psi));
    out.norm_or_trace.push_back(norm);
  }
  return out;
}

double rabi_population(double omega, double t) {
  const double s = std::sin(0.5 * omega * t);
  return s * s;
}

double fit_oscillation_frequency(std::span<const double> times, std::span<const double> values,
                                 double w_min, double w_max) {
  if (times.size() != values.size() || times.size() < 4) {
    throw DomainError("fit_oscillation_frequency: need matching samples");
  }
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = values[static_cast<std::size_t>(i)];
  auto residual = [&](double w) {
    Eigen::MatrixXd a(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = times[static_cast<std::size_t>(i)];
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(w * t);
      a(i, 2) = std::sin(w * t);
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
    return (a * coef - y).squaredNorm();
  };
  // Coarse scan, then Brent refinement inside the best cell.
  constexpr int kCoarse = 400;
  double best_w = w_min;
  double best_r = residual(w_min);
  for (int k = 1; k <= kCoarse; ++k) {
    const double w = w_min + (w_max - w_min) * k / kCoarse;
    const double r = residual(w);
    if (r < best_r) {
      best_r = r;
      best_w = w;
    }
  }
  const double cell = (w_max - w_min) / kCoarse;
  const auto res = boost::math::tools::brent_find_minima(
      residual, std::max(w_min, best_w - cell), std::min(w_max, best_w + cell), 40);
  return res.first;
}

}  // namespace superatom
