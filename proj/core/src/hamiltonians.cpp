#include "superatom/hamiltonians.hpp"

#include <cmath>
#include <sstream>

namespace superatom {

LaserParams LaserParams::from_mhz(double omega_p_mhz, double omega_c_mhz, double delta_p_mhz,
                                  double delta_c_mhz) {
  return {angular_from_mhz(omega_p_mhz), angular_from_mhz(omega_c_mhz),
          angular_from_mhz(delta_p_mhz), angular_from_mhz(delta_c_mhz)};
}

void LaserParams::validate() const {
  validate_drive();
  if (!(omega_c > 0)) throw DomainError("omega_c must be > 0");
}

void LaserParams::validate_drive() const {
  if (!(omega_p >= 0) || !std::isfinite(omega_p)) throw DomainError("omega_p must be >= 0");
  if (!(omega_c >= 0) || !std::isfinite(omega_c)) throw DomainError("omega_c must be >= 0");
  if (!std::isfinite(delta_p) || !std::isfinite(delta_c)) {
    throw DomainError("detunings must be finite");
  }
}

namespace {

double diagonal_energy(const LaserParams& p, const DickeIndex& idx) {
  return -idx.j * p.delta_p - idx.s * (p.delta_p + p.delta_c);
}

template <typename Emit>
void for_each_dicke_element(const LaserParams& params, const EnsembleSpec& spec, Emit&& emit) {
  const DickeBasis basis(spec);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const DickeIndex idx = basis.state(i);
    emit(i, i, diagonal_energy(params, idx));
    if (auto k = basis.index_of({idx.j + 1, idx.s})) {
      const double v = 0.5 * params.omega_p *
                       collective_raising_element(spec, idx.j, idx.s, Transition::ge);
      emit(i, *k, v);
      emit(*k, i, v);
    }
    if (idx.s == 1) {
      const auto k = basis.at({idx.j + 1, 0});
      const double v = 0.5 * params.omega_c *
                       collective_raising_element(spec, idx.j, 1, Transition::er);
      emit(i, k, v);
      emit(k, i, v);
    }
  }
}

}  // namespace

RealMatrix build_product_hamiltonian(const LaserParams& params, const ProductBasis& basis) {
  params.validate_drive();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  const int n_atoms = basis.spec().n_atoms();
  RealMatrix h = RealMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    h(ii, ii) = diagonal_energy(params, basis.content(i));
    const Configuration& c = basis.config(i);
    for (int a = 0; a < n_atoms; ++a) {
      // Raising moves only; the Hermitian partner is written alongside.
      Configuration up = c;
      double coupling = 0;
      if (c[a] == Level::g) {
        up[a] = Level::e;
        coupling = 0.5 * params.omega_p;
      } else if (c[a] == Level::e) {
        up[a] = Level::r;
        coupling = 0.5 * params.omega_c;
      } else {
        continue;
      }
      if (auto k = basis.index_of(up)) {
        const auto kk = static_cast<Eigen::Index>(*k);
        h(ii, kk) = coupling;
        h(kk, ii) = coupling;
      }
    }
  }
  return h;
}

RealMatrix build_dicke_hamiltonian(const LaserParams& params, const EnsembleSpec& spec) {
  params.validate_drive();
  const auto dim = 2 * static_cast<Eigen::Index>(spec.n_atoms()) + 1;
  RealMatrix h = RealMatrix::Zero(dim, dim);
  for_each_dicke_element(params, spec, [&](std::size_t r, std::size_t c, double v) {
    h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
  });
  return h;
}

Eigen::SparseMatrix<double> build_dicke_hamiltonian_sparse(const LaserParams& params,
                                                           const EnsembleSpec& spec) {
  params.validate_drive();
  const auto dim = 2 * static_cast<Eigen::Index>(spec.n_atoms()) + 1;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * dim));
  for_each_dicke_element(params, spec, [&](std::size_t r, std::size_t c, double v) {
    if (v != 0.0) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
  });
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

std::array<DressedState, 2> dressed_block(const LaserParams& params, int n) {
  if (n < 1) throw DomainError("dressed_block: n must be >= 1");
  const double a = -n * params.delta_p;
  const double b = a - params.delta_c;
  const double off = 0.5 * std::sqrt(static_cast<double>(n)) * params.omega_c;
  const double mean = 0.5 * (a + b);
  const double radius = std::hypot(0.5 * (a - b), off);
  // theta = 0 puts the + branch on |E^n>, theta = pi/2 on |E^{n-1} R>.
  const double theta = 0.5 * std::atan2(2.0 * off, a - b);
  DressedState plus{n, Branch::plus, mean + radius, {std::cos(theta), std::sin(theta)}};
  DressedState minus{n, Branch::minus, mean - radius, {std::sin(theta), -std::cos(theta)}};
  for (DressedState* d : {&plus, &minus}) {
    auto& v = d->composition;
    if (v[0] < 0 || (v[0] == 0 && v[1] < 0)) v = -v;
  }
  return {plus, minus};
}

double resonance_probe_detuning(double omega_c, double delta_c, int n, Branch branch) {
  if (!(omega_c > 0)) throw DomainError("resonance_probe_detuning: omega_c must be > 0");
  if (n < 1) throw DomainError("resonance_probe_detuning: n must be >= 1");
  // E_pm = -n dp - dc/2 pm sqrt(dc^2/4 + n omega_c^2/4).
  const double root = std::sqrt(0.25 * delta_c * delta_c + 0.25 * n * omega_c * omega_c);
  const double sign = branch == Branch::plus ? 1.0 : -1.0;
  const double dp = (-0.5 * delta_c + sign * root) / n;
  if (!std::isfinite(dp)) throw DomainError("resonance_probe_detuning: no real solution");
  return dp;
}

RestrictedModel build_restricted_hamiltonian(const LaserParams& params, const EnsembleSpec& spec) {
  params.validate();
  const DickeBasis dicke(spec);
  const int n_atoms = spec.n_atoms();
  const auto dim = static_cast<Eigen::Index>(dicke.size());

  RestrictedModel model;
  std::vector<Eigen::VectorXd> columns;
  auto add = [&](const std::string& label, const DressedState* d) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    if (d == nullptr) {
      v[static_cast<Eigen::Index>(dicke.at(kGround))] = 1.0;
    } else {
      v[static_cast<Eigen::Index>(dicke.at({d->n, 0}))] = d->composition[0];
      v[static_cast<Eigen::Index>(dicke.at({d->n - 1, 1}))] = d->composition[1];
    }
    model.labels.push_back(label);
    columns.push_back(std::move(v));
  };

  add("G", nullptr);
  for (int n = 1; n <= std::min(3, n_atoms); ++n) {
    const auto block = dressed_block(params, n);
    add(std::to_string(n) + "+", &block[0]);
    if (n == 2) {
      model.target_index = static_cast<Eigen::Index>(columns.size() - 1);
      continue;
    }
    add(std::to_string(n) + "-", &block[1]);
  }

  model.embedding.resize(dim, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    model.embedding.col(static_cast<Eigen::Index>(c)) = columns[c];
  }
  const RealMatrix h = build_dicke_hamiltonian(params, spec);
  model.hamiltonian = model.embedding.transpose() * h * model.embedding;
  model.hamiltonian = 0.5 * (model.hamiltonian + model.hamiltonian.transpose()).eval();
  return model;
}

bool is_half_coupling_detuning(double omega_c, double delta_c, double tol) {
  return std::abs(delta_c + 0.5 * omega_c) <= tol * std::abs(omega_c);
}

EffectiveTwoLevel effective_two_level(const LaserParams& params, const EnsembleSpec& spec) {
  params.validate();
  if (!is_half_coupling_detuning(params.omega_c, params.delta_c)) {
    throw UnsupportedRegimeError(
        "effective_two_level: closed forms hold only for delta_c = -omega_c/2");
  }
  const double n = spec.n_atoms();
  if (spec.n_atoms() < 2) throw DomainError("effective_two_level: requires N >= 2");
  const double scale = params.omega_p * params.omega_p / params.omega_c;
  EffectiveTwoLevel out;
  out.omega_eff = std::sqrt(2.0 / 3.0) * std::sqrt(n * (n - 1.0)) * scale;
  out.delta_eff = (2.0 * n - 7.0) / 3.0 * scale;
  out.target_composition = {1.0 / std::sqrt(3.0), std::sqrt(2.0 / 3.0)};
  return out;
}

double probe_rabi_for_effective(double omega_eff, double omega_c, const EnsembleSpec& spec) {
  if (spec.n_atoms() < 2) throw DomainError("probe_rabi_for_effective: requires N >= 2");
  if (!(omega_eff > 0) || !(omega_c > 0)) {
    throw DomainError("probe_rabi_for_effective: frequencies must be > 0");
  }
  const double n = spec.n_atoms();
  return std::sqrt(omega_eff * omega_c / (std::sqrt(2.0 / 3.0) * std::sqrt(n * (n - 1.0))));
}

double compensated_probe_detuning(double omega_p, double omega_c, const EnsembleSpec& spec) {
  const LaserParams p{omega_p, omega_c, 0.0, -0.5 * omega_c};
  return -p.delta_c + 0.5 * effective_two_level(p, spec).delta_eff;
}

RealMatrix build_two_level_hamiltonian(const LaserParams& params, const EnsembleSpec& spec) {
  const EffectiveTwoLevel eff = effective_two_level(params, spec);
  const double e_target = dressed_block(params, 2)[0].energy;
  RealMatrix h(2, 2);
  h << 0.0, 0.5 * eff.omega_eff, 0.5 * eff.omega_eff, e_target + eff.delta_eff;
  return h;
}

RealMatrix build_jc_hamiltonian(const LaserParams& params, const EnsembleSpec& spec) {
  return build_dicke_hamiltonian(params, spec);
}

JcLabel jc_label(const DickeIndex& idx) { return {idx.j, idx.s == 1}; }

std::string to_string(const JcLabel& label) {
  std::ostringstream os;
  os << "|" << label.photons << ", " << (label.atom_excited ? "e" : "g") << ">";
  return os.str();
}

double quantum_fisher_dicke(int n_atoms, int m) {
  if (n_atoms < 1 || m < 0 || m > n_atoms) {
    throw DomainError("quantum_fisher_dicke: require 0 <= m <= N");
  }
  return n_atoms + 2.0 * m * (n_atoms - m);
}

}  // namespace superatom
