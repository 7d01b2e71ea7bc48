#include "superatom/lindblad.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace superatom {

void DecoherenceRates::validate() const {
  for (double g : {gamma_e, gamma_r, gamma_d, gamma_coll}) {
    if (!(g >= 0) || !std::isfinite(g)) throw DomainError("decoherence rates must be >= 0");
  }
}

namespace {

Eigen::SparseMatrix<double> single_atom_operator(const ProductBasis& basis, int atom, Level from,
                                                 Level to) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Configuration& c = basis.config(i);
    if (c[static_cast<std::size_t>(atom)] != from) continue;
    Configuration d = c;
    d[static_cast<std::size_t>(atom)] = to;
    if (auto k = basis.index_of(d)) {
      t.emplace_back(static_cast<int>(*k), static_cast<int>(i), 1.0);
    }
  }
  Eigen::SparseMatrix<double> op(dim, dim);
  op.setFromTriplets(t.begin(), t.end());
  return op;
}

}  // namespace

std::vector<JumpOperator> lindblad_operators(const DecoherenceRates& rates,
                                             const EnsembleSpec& spec, BasisKind basis) {
  rates.validate();
  std::vector<JumpOperator> out;
  const bool single_atom = rates.gamma_e > 0 || rates.gamma_r > 0 || rates.gamma_d > 0;
  if (basis == BasisKind::dicke) {
    if (single_atom) {
      throw DomainError("single-atom decay and dephasing require the product basis");
    }
    const DickeBasis dicke(spec);
    if (rates.gamma_coll > 0) {
      const auto dim = static_cast<Eigen::Index>(dicke.size());
      for (std::size_t k = 0; k < dicke.size(); ++k) {
        Eigen::SparseMatrix<double> p(dim, dim);
        p.insert(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
        out.push_back({rates.gamma_coll, std::move(p), "coll" + to_string(dicke.state(k))});
      }
    }
    return out;
  }
  if (basis != BasisKind::product) {
    throw DomainError("lindblad_operators: basis must be product or dicke");
  }
  const ProductBasis pb(spec, kMaxProductAtomsDensity);
  const int n_atoms = spec.n_atoms();
  struct Channel {
    double rate;
    Level from;
    Level to;
    const char* name;
  };
  const std::array<Channel, 3> channels{{{rates.gamma_e, Level::e, Level::g, "decay_e"},
                                         {rates.gamma_r, Level::r, Level::e, "decay_r"},
                                         {rates.gamma_d, Level::r, Level::r, "dephase_r"}}};
  for (const Channel& ch : channels) {
    if (ch.rate <= 0) continue;
    for (int a = 0; a < n_atoms; ++a) {
      out.push_back({ch.rate, single_atom_operator(pb, a, ch.from, ch.to),
                     std::string(ch.name) + "[" + std::to_string(a) + "]"});
    }
  }
  if (rates.gamma_coll > 0) {
    const DickeBasis dicke(spec);
    const RealMatrix sym = symmetrizer(pb, dicke);
    for (std::size_t k = 0; k < dicke.size(); ++k) {
      const RealVector v = sym.col(static_cast<Eigen::Index>(k));
      const RealMatrix dense = v * v.transpose();
      out.push_back({rates.gamma_coll, dense.sparseView(), "coll" + to_string(dicke.state(k))});
    }
  }
  return out;
}

namespace {

// rho' = -i (Heff rho - rho Heff^dag) + sum_k gamma_k L_k rho L_k^dag,
// with Heff = H - (i/2) sum_k gamma_k L_k^dag L_k.
class LindbladGenerator {
public:
  LindbladGenerator(const RealMatrix& h, std::span<const JumpOperator> jumps) {
    ComplexMatrix anti = ComplexMatrix::Zero(h.rows(), h.cols());
    for (const JumpOperator& j : jumps) {
      const RealMatrix l = RealMatrix(j.op);
      anti += (j.rate * (l.transpose() * l)).cast<Complex>();
      ops_.push_back(l.cast<Complex>());
      rates_.push_back(j.rate);
    }
    const ComplexMatrix heff = h.cast<Complex>() - Complex(0.0, 0.5) * anti;
    neg_i_heff_ = Complex(0.0, -1.0) * heff;
    i_heff_dag_ = Complex(0.0, 1.0) * heff.adjoint();
  }

  void operator()(const ComplexMatrix& rho, ComplexMatrix& out) const {
    out.noalias() = neg_i_heff_ * rho;
    out.noalias() += rho * i_heff_dag_;
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      out.noalias() += rates_[k] * (ops_[k] * rho * ops_[k].adjoint());
    }
  }

private:
  ComplexMatrix neg_i_heff_;
  ComplexMatrix i_heff_dag_;
  std::vector<ComplexMatrix> ops_;
  std::vector<double> rates_;
};

void check_state(const ComplexMatrix& rho, const LindbladOptions& o, double t) {
  const double tr = rho.trace().real();
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  const double min_ev = es.eigenvalues().minCoeff();
  if (std::abs(tr - 1.0) > o.trace_tol || herm > o.hermitian_tol || min_ev < -o.eigen_tol) {
    throw NumericalError("evolve_lindblad: invariant violated at t=" + std::to_string(t) +
                         " (trace-1=" + std::to_string(tr - 1.0) +
                         ", hermiticity=" + std::to_string(herm) +
                         ", min eigenvalue=" + std::to_string(min_ev) + ")");
  }
}

}  // namespace

LindbladResult evolve_lindblad(const RealMatrix& hamiltonian, std::span<const JumpOperator> jumps,
                               const ComplexMatrix& rho0, std::span<const double> times,
                               const ObservableMap& observe, const LindbladOptions& options) {
  const Eigen::Index dim = hamiltonian.rows();
  if (dim > options.max_dimension) {
    throw CapacityError("evolve_lindblad: dimension " + std::to_string(dim) +
                        " exceeds the density-matrix capacity " +
                        std::to_string(options.max_dimension));
  }
  if (rho0.rows() != dim || rho0.cols() != dim) throw DomainError("evolve_lindblad: rho0 dimension");
  for (const JumpOperator& j : jumps) {
    if (j.op.rows() != dim || j.op.cols() != dim) {
      throw DomainError("evolve_lindblad: jump operator dimension");
    }
  }
  check_density_matrix({BasisKind::product, rho0}, 1e-10, 1e-8, 1e-8);

  // Dormand-Prince 5(4) tableau; the generator is autonomous so the nodes are unused.
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const LindbladGenerator f(hamiltonian, jumps);
  LindbladResult result;
  ComplexMatrix rho = rho0;
  ComplexMatrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), k5(dim, dim),
      k6(dim, dim), k7(dim, dim), y(dim, dim), ynew(dim, dim), err(dim, dim);

  double t = 0.0;
  const double rate_scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  double h = 0.01 / rate_scale;
  f(rho, k1);

  auto record = [&](double when) {
    check_state(rho, options, when);
    result.trajectory.times.push_back(when);
    result.trajectory.samples.push_back(observe(rho));
    result.trajectory.norm_or_trace.push_back(rho.trace().real());
  };

  for (std::size_t i = 0; i < times.size(); ++i) {
    const double target = times[i];
    if (i > 0 && !(target > times[i - 1])) {
      throw DomainError("evolve_lindblad: times must be strictly increasing");
    }
    if (target < t) throw DomainError("evolve_lindblad: times must start at >= 0");
    while (t < target) {
      if (result.accepted_steps + result.rejected_steps > options.max_steps) {
        throw NumericalError("evolve_lindblad: step budget exhausted");
      }
      const bool last = t + h >= target;
      const double step = last ? target - t : h;
      y = rho + step * (a21 * k1);
      f(y, k2);
      y = rho + step * (a31 * k1 + a32 * k2);
      f(y, k3);
      y = rho + step * (a41 * k1 + a42 * k2 + a43 * k3);
      f(y, k4);
      y = rho + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(y, k5);
      y = rho + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(y, k6);
      ynew = rho + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(ynew, k7);
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double err_norm = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) {
          const double scale =
              options.atol + options.rtol * std::max(std::abs(rho(r, c)), std::abs(ynew(r, c)));
          err_norm = std::max(err_norm, std::abs(err(r, c)) / scale);
        }
      }
      if (err_norm <= 1.0) {
        t = last ? target : t + step;
        rho.swap(ynew);
        k1.swap(k7);  // first-same-as-last
        ++result.accepted_steps;
        const double factor = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
        if (!last) h = step * std::clamp(factor, 0.2, 5.0);
      } else {
        ++result.rejected_steps;
        h = step * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        if (h < options.min_step) throw NumericalError("evolve_lindblad: step size underflow");
      }
    }
    record(target);
  }
  result.final_rho = rho;
  return result;
}

}  // namespace superatom
