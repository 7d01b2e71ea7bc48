#include "superatom/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/tools/minima.hpp>

#include "superatom/parallel.hpp"

namespace superatom {

std::string to_string(Model model) {
  switch (model) {
    case Model::full: return "full";
    case Model::dicke: return "dicke";
    case Model::restricted6: return "restricted6";
    case Model::effective2: return "effective2";
    case Model::lindblad: return "lindblad";
  }
  return "?";
}

std::optional<Model> parse_model(const std::string& name) {
  for (Model m : {Model::full, Model::dicke, Model::restricted6, Model::effective2,
                  Model::lindblad}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string to_string(Calibration c) {
  switch (c) {
    case Calibration::automatic: return "auto";
    case Calibration::closed_form: return "closed_form";
    case Calibration::numeric: return "numeric";
  }
  return "?";
}

std::optional<Calibration> parse_calibration(const std::string& name) {
  for (Calibration c : {Calibration::automatic, Calibration::closed_form, Calibration::numeric}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string to_string(InfidelityStatistic s) {
  switch (s) {
    case InfidelityStatistic::endpoint: return "endpoint";
    case InfidelityStatistic::plateau: return "plateau";
    case InfidelityStatistic::cycle_averaged: return "cycle_averaged";
  }
  return "?";
}

std::optional<InfidelityStatistic> parse_statistic(const std::string& name) {
  for (InfidelityStatistic s : {InfidelityStatistic::endpoint, InfidelityStatistic::plateau,
                                InfidelityStatistic::cycle_averaged}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string to_string(RateKind k) {
  switch (k) {
    case RateKind::gamma_e: return "gamma_e";
    case RateKind::gamma_r: return "gamma_r";
    case RateKind::gamma_d: return "gamma_d";
    case RateKind::gamma_coll: return "gamma_coll";
  }
  return "?";
}

std::optional<RateKind> parse_rate_kind(const std::string& name) {
  for (RateKind k : {RateKind::gamma_e, RateKind::gamma_r, RateKind::gamma_d,
                     RateKind::gamma_coll}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

RealVector dicke_unit(const DickeBasis& basis, const DickeIndex& idx) {
  RealVector v = RealVector::Zero(static_cast<Eigen::Index>(basis.size()));
  v[static_cast<Eigen::Index>(basis.at(idx))] = 1.0;
  return v;
}

RealVector dicke_target(const DickeBasis& basis, const Eigen::Vector2d& composition) {
  RealVector v = RealVector::Zero(static_cast<Eigen::Index>(basis.size()));
  v[static_cast<Eigen::Index>(basis.at(kDoubleE))] = composition[0];
  v[static_cast<Eigen::Index>(basis.at(kTargetER))] = composition[1];
  return v;
}

}  // namespace

ResonantPair resonant_pair(const SpectralPropagator& prop, const RealVector& ground,
                           const RealVector& target) {
  const RealMatrix& v = prop.eigenvectors();
  const RealVector score =
      (v.transpose() * ground).cwiseAbs2() + (v.transpose() * target).cwiseAbs2();
  if (score.size() < 2) throw DomainError("resonant_pair: need at least two eigenstates");
  ResonantPair p;
  for (Eigen::Index k = 0; k < score.size(); ++k) {
    if (p.first < 0 || score[k] > score[p.first]) {
      p.second = p.first;
      p.first = k;
    } else if (p.second < 0 || score[k] > score[p.second]) {
      p.second = k;
    }
  }
  p.splitting = std::abs(prop.energies()[p.first] - prop.energies()[p.second]);
  return p;
}

namespace {

double pair_splitting(const EnsembleSpec& spec, const LaserParams& laser, const RealVector& ground,
                      const RealVector& target) {
  const SpectralPropagator prop(build_dicke_hamiltonian(laser, spec));
  return resonant_pair(prop, ground, target).splitting;
}

}  // namespace

ExactResonance find_exact_resonance(const EnsembleSpec& spec, double omega_p, double omega_c,
                                    double delta_c) {
  if (spec.n_atoms() < 2) throw DomainError("find_exact_resonance: requires N >= 2");
  if (!(omega_p > 0) || !(omega_c > 0)) {
    throw DomainError("find_exact_resonance: Rabi frequencies must be > 0");
  }
  const double dp0 = resonance_probe_detuning(omega_c, delta_c);
  const DickeBasis basis(spec);
  const RealVector ground = dicke_unit(basis, kGround);
  const LaserParams base{omega_p, omega_c, dp0, delta_c};
  const RealVector target = dicke_target(basis, dressed_block(base, 2)[0].composition);

  auto gap = [&](double dp) {
    LaserParams p = base;
    p.delta_p = dp;
    return pair_splitting(spec, p, ground, target);
  };
  double width = std::max(3.0 * spec.n_atoms() * omega_p * omega_p / omega_c, 1e-6 * omega_c);
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double lo = dp0 - width;
    const double hi = dp0 + width;
    const auto [x, g] = boost::math::tools::brent_find_minima(gap, lo, hi, 40);
    const double margin = 0.02 * (hi - lo);
    if (x - lo > margin && hi - x > margin) return {x, g};
    width *= 2.0;
  }
  throw NumericalError("find_exact_resonance: no interior minimum of the pair splitting");
}

ResonanceCalibration calibrate_resonance(const EnsembleSpec& spec, double omega_c, double delta_c,
                                         double omega_eff_target) {
  if (!(omega_eff_target > 0)) throw DomainError("calibrate_resonance: target must be > 0");
  ResonanceCalibration out;
  out.omega_p = probe_rabi_for_effective(omega_eff_target, omega_c, spec);
  for (int it = 1; it <= 100; ++it) {
    const ExactResonance r = find_exact_resonance(spec, out.omega_p, omega_c, delta_c);
    out.delta_p = r.delta_p;
    out.omega_eff = r.splitting;
    out.iterations = it;
    const double ratio = omega_eff_target / r.splitting;
    if (!std::isfinite(ratio)) break;
    if (std::abs(ratio - 1.0) < 1e-9) return out;
    out.omega_p *= std::sqrt(ratio);
  }
  throw NumericalError("calibrate_resonance: did not converge for delta_c/omega_c = " +
                       std::to_string(delta_c / omega_c));
}

ResolvedProtocol resolve_protocol(const ProtocolConfig& cfg) {
  if (cfg.spec.n_atoms() < 2) throw DomainError("protocol: requires N >= 2");
  if (!(cfg.omega_c > 0) || !std::isfinite(cfg.omega_c)) {
    throw DomainError("protocol: omega_c must be > 0");
  }
  if (!std::isfinite(cfg.delta_c)) throw DomainError("protocol: delta_c must be finite");
  if (cfg.omega_p.has_value() == cfg.effective_rabi_target.has_value()) {
    throw DomainError("protocol: set exactly one of omega_p and effective_rabi_target");
  }
  if (cfg.omega_p && !(*cfg.omega_p > 0)) throw DomainError("protocol: omega_p must be > 0");
  if (cfg.effective_rabi_target && !(*cfg.effective_rabi_target > 0)) {
    throw DomainError("protocol: effective_rabi_target must be > 0");
  }
  if (cfg.pulse_time && !(*cfg.pulse_time > 0)) throw DomainError("protocol: pulse_time must be > 0");

  const bool half = is_half_coupling_detuning(cfg.omega_c, cfg.delta_c);
  Calibration route = cfg.calibration;
  if (route == Calibration::automatic) route = half ? Calibration::closed_form : Calibration::numeric;

  ResolvedProtocol res;
  res.calibration = route;
  res.laser.omega_c = cfg.omega_c;
  res.laser.delta_c = cfg.delta_c;
  if (route == Calibration::closed_form) {
    if (!half) {
      throw UnsupportedRegimeError(
          "protocol: closed-form calibration needs delta_c = -omega_c/2");
    }
    res.laser.omega_p = cfg.omega_p
                            ? *cfg.omega_p
                            : probe_rabi_for_effective(*cfg.effective_rabi_target, cfg.omega_c,
                                                       cfg.spec);
    const EffectiveTwoLevel eff = effective_two_level(res.laser, cfg.spec);
    res.laser.delta_p = cfg.delta_p ? *cfg.delta_p : -cfg.delta_c + 0.5 * eff.delta_eff;
    res.omega_eff = eff.omega_eff;
    res.delta_eff = eff.delta_eff;
  } else if (cfg.effective_rabi_target) {
    const ResonanceCalibration cal =
        calibrate_resonance(cfg.spec, cfg.omega_c, cfg.delta_c, *cfg.effective_rabi_target);
    res.laser.omega_p = cal.omega_p;
    res.laser.delta_p = cfg.delta_p ? *cfg.delta_p : cal.delta_p;
    res.omega_eff = cal.omega_eff;
  } else {
    res.laser.omega_p = *cfg.omega_p;
    const ExactResonance r =
        find_exact_resonance(cfg.spec, *cfg.omega_p, cfg.omega_c, cfg.delta_c);
    res.laser.delta_p = cfg.delta_p ? *cfg.delta_p : r.delta_p;
    res.omega_eff = r.splitting;
  }
  res.laser.validate();
  res.pulse_time = cfg.pulse_time ? *cfg.pulse_time : std::numbers::pi / res.omega_eff;
  res.target_composition = dressed_block(res.laser, 2)[0].composition;
  return res;
}

HeraldStatistics herald_statistics(const SpectralPropagator& prop, const ComplexVector& psi0,
                                   double t, const RealMatrix& rydberg, const RealVector& er,
                                   const RealVector& ground, const RealVector& target) {
  const RealMatrix& v = prop.eigenvectors();
  const RealVector& lambda = prop.energies();
  const Eigen::Index dim = lambda.size();
  const ComplexVector c = v.transpose().cast<Complex>() * psi0;
  ComplexVector ct(dim);
  for (Eigen::Index k = 0; k < dim; ++k) ct[k] = c[k] * std::polar(1.0, -lambda[k] * t);
  const ComplexMatrix rydc = rydberg.cast<Complex>();
  const ComplexVector erc = er.cast<Complex>();

  auto ryd_of = [&](const ComplexVector& psi) { return psi.dot(rydc * psi).real(); };
  auto er_of = [&](const ComplexVector& psi) { return std::norm(erc.dot(psi)); };

  HeraldStatistics out;
  const ComplexVector psi = v.cast<Complex>() * ct;
  out.success_endpoint = ryd_of(psi);
  out.endpoint = false_herald_fraction(out.success_endpoint, er_of(psi));

  const ResonantPair pair = resonant_pair(prop, ground, target);
  const ComplexVector psi_pair = v.col(pair.first).cast<Complex>() * ct[pair.first] +
                                 v.col(pair.second).cast<Complex>() * ct[pair.second];
  const double ryd_pair = ryd_of(psi_pair);
  const double er_pair = er_of(psi_pair);
  out.success_plateau = ryd_pair;
  out.plateau = false_herald_fraction(ryd_pair, er_pair);

  // Remaining eigenstates dephase against the pair; degenerate groups stay coherent.
  const double tol = 1e-9 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  double ryd_avg = ryd_pair;
  double er_avg = er_pair;
  Eigen::Index k = 0;
  while (k < dim) {
    Eigen::Index end = k + 1;
    while (end < dim && lambda[end] - lambda[end - 1] <= tol) ++end;
    ComplexVector group = ComplexVector::Zero(v.rows());
    for (Eigen::Index q = k; q < end; ++q) {
      if (q == pair.first || q == pair.second) continue;
      group += v.col(q).cast<Complex>() * c[q];
    }
    ryd_avg += ryd_of(group);
    er_avg += er_of(group);
    k = end;
  }
  out.success_cycle_averaged = ryd_avg;
  out.cycle_averaged = false_herald_fraction(ryd_avg, er_avg);
  return out;
}

std::optional<double> ProtocolResult::statistic(InfidelityStatistic s) const {
  switch (s) {
    case InfidelityStatistic::endpoint: return infidelity;
    case InfidelityStatistic::plateau: return infidelity_plateau;
    case InfidelityStatistic::cycle_averaged: return infidelity_cycle_averaged;
  }
  return std::nullopt;
}

double ProtocolResult::success(InfidelityStatistic s) const {
  switch (s) {
    case InfidelityStatistic::endpoint: return success_probability;
    case InfidelityStatistic::plateau: return success_plateau;
    case InfidelityStatistic::cycle_averaged: return success_cycle_averaged;
  }
  return success_probability;
}

namespace {

struct ModelSetup {
  RealMatrix hamiltonian;
  ComplexVector psi0;
  ObservableMap observe;
  BasisKind basis;
  RealVector target;  // native basis
};

ModelSetup make_setup(Model model, const EnsembleSpec& spec, const ResolvedProtocol& res) {
  const DickeBasis dicke(spec);
  const RealVector target_dicke = dicke_target(dicke, res.target_composition);
  switch (model) {
    case Model::full:
    case Model::lindblad: {
      const ProductBasis pb(spec, model == Model::full ? kMaxProductAtomsVector
                                                       : kMaxProductAtomsDensity);
      const RealMatrix sym = symmetrizer(pb, dicke);
      RealVector target = sym * target_dicke;
      ComplexVector psi0 = ComplexVector::Zero(static_cast<Eigen::Index>(pb.size()));
      psi0[0] = 1.0;  // all atoms in g come first
      ObservableMap obs = ObservableMap::product(pb);
      obs.with_target(target.cast<Complex>());
      return {build_product_hamiltonian(res.laser, pb), std::move(psi0), std::move(obs),
              BasisKind::product, std::move(target)};
    }
    case Model::dicke: {
      ComplexVector psi0 = dicke_unit(dicke, kGround).cast<Complex>();
      ObservableMap obs = ObservableMap::dicke(spec);
      obs.with_target(target_dicke.cast<Complex>());
      return {build_dicke_hamiltonian(res.laser, spec), std::move(psi0), std::move(obs),
              BasisKind::dicke, target_dicke};
    }
    case Model::restricted6: {
      RestrictedModel rm = build_restricted_hamiltonian(res.laser, spec);
      const Eigen::Index dim = rm.hamiltonian.rows();
      ComplexVector psi0 = ComplexVector::Zero(dim);
      psi0[0] = 1.0;
      RealVector target = RealVector::Zero(dim);
      target[rm.target_index] = 1.0;
      ObservableMap obs = ObservableMap::embedded(spec, rm.embedding);
      obs.with_target(target.cast<Complex>());
      return {std::move(rm.hamiltonian), std::move(psi0), std::move(obs),
              BasisKind::dressed_restricted, std::move(target)};
    }
    case Model::effective2: {
      RealMatrix embedding(static_cast<Eigen::Index>(dicke.size()), 2);
      embedding.col(0) = dicke_unit(dicke, kGround);
      embedding.col(1) = target_dicke;
      ComplexVector psi0 = ComplexVector::Zero(2);
      psi0[0] = 1.0;
      RealVector target = RealVector::Unit(2, 1);
      ObservableMap obs = ObservableMap::embedded(spec, std::move(embedding));
      obs.with_target(target.cast<Complex>());
      return {build_two_level_hamiltonian(res.laser, spec), std::move(psi0), std::move(obs),
              BasisKind::effective_two_level, std::move(target)};
    }
  }
  throw DomainError("unknown model");
}

}  // namespace

ProtocolResult run_protocol(const ProtocolConfig& cfg, Model model,
                            const LindbladOptions& lindblad) {
  cfg.rates.validate();
  if (model != Model::lindblad && !cfg.rates.all_zero()) {
    throw DomainError("protocol: decoherence rates require the lindblad model");
  }
  ProtocolResult out;
  out.model = model;
  out.resolved = resolve_protocol(cfg);
  const std::vector<double> times =
      linspace_times(out.resolved.pulse_time, std::max<std::size_t>(cfg.samples, 2));
  ModelSetup setup = make_setup(model, cfg.spec, out.resolved);
  out.basis = setup.basis;

  if (model == Model::lindblad) {
    const auto jumps = lindblad_operators(cfg.rates, cfg.spec, BasisKind::product);
    const ComplexMatrix rho0 = setup.psi0 * setup.psi0.adjoint();
    LindbladResult lr =
        evolve_lindblad(setup.hamiltonian, jumps, rho0, times, setup.observe, lindblad);
    out.trajectory = std::move(lr.trajectory);
    out.final_observables = setup.observe(lr.final_rho);
    out.final_state = std::move(lr.final_rho);
  } else {
    const SpectralPropagator prop(setup.hamiltonian);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const ComplexVector psi = prop.evolve(setup.psi0, times[i]);
      const double norm = psi.norm();
      if (std::abs(norm - 1.0) > 1e-10) throw NumericalError("run_protocol: norm drift");
      out.trajectory.times.push_back(times[i]);
      out.trajectory.samples.push_back(setup.observe(psi));
      out.trajectory.norm_or_trace.push_back(norm);
    }
    ComplexVector final_psi = prop.evolve(setup.psi0, out.resolved.pulse_time);
    out.final_observables = setup.observe(final_psi);

    const RealMatrix& to_dicke = setup.observe.to_dicke();
    const DickeBasis dicke(cfg.spec);
    const RealVector ground =
        to_dicke.row(static_cast<Eigen::Index>(dicke.at(kGround))).transpose();
    const RealVector er = to_dicke.row(static_cast<Eigen::Index>(dicke.at(kTargetER))).transpose();
    const HeraldStatistics stats =
        herald_statistics(prop, setup.psi0, out.resolved.pulse_time,
                          setup.observe.rydberg_projector(), er, ground, setup.target);
    out.infidelity_plateau = stats.plateau;
    out.infidelity_cycle_averaged = stats.cycle_averaged;
    out.success_plateau = stats.success_plateau;
    out.success_cycle_averaged = stats.success_cycle_averaged;
    out.final_state = std::move(final_psi);
  }
  out.success_probability = out.final_observables.p_rydberg;
  out.infidelity = out.final_observables.infidelity;
  if (model == Model::lindblad) {
    out.success_plateau = out.success_cycle_averaged = out.success_probability;
  }
  return out;
}

DeltaCScan scan_delta_c(const ProtocolConfig& cfg, const std::vector<double>& ratios,
                        const ScanOptions& options) {
  if (!cfg.effective_rabi_target) {
    throw DomainError("scan_delta_c: an effective_rabi_target is required");
  }
  DeltaCScan scan;
  scan.statistic = options.statistic;
  scan.rows.resize(ratios.size());
  parallel_for(ratios.size(), options.workers, [&](std::size_t i) {
    DeltaCRow& row = scan.rows[i];
    row.ratio = ratios[i];
    row.delta_c = ratios[i] * cfg.omega_c;
    ProtocolConfig c = cfg;
    c.delta_c = row.delta_c;
    c.delta_p.reset();
    c.pulse_time.reset();
    c.samples = 2;
    c.calibration = cfg.calibration == Calibration::closed_form ? Calibration::closed_form
                                                                : Calibration::numeric;
    try {
      const ProtocolResult r = run_protocol(c, options.model);
      row.omega_p = r.resolved.laser.omega_p;
      row.delta_p = r.resolved.laser.delta_p;
      row.omega_eff = r.resolved.omega_eff;
      row.success = r.success_probability;
      row.infidelity = r.infidelity;
      row.infidelity_plateau = r.infidelity_plateau;
      row.infidelity_cycle_averaged = r.infidelity_cycle_averaged;
      row.success_plateau = r.success_plateau;
    } catch (const Error& e) {
      row.status = e.what();
    }
  });

  auto value = [&](const DeltaCRow& r) -> std::optional<double> {
    if (r.status != "ok") return std::nullopt;
    switch (options.statistic) {
      case InfidelityStatistic::endpoint: return r.infidelity;
      case InfidelityStatistic::plateau: return r.infidelity_plateau;
      case InfidelityStatistic::cycle_averaged: return r.infidelity_cycle_averaged;
    }
    return std::nullopt;
  };
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    const auto v = value(scan.rows[i]);
    if (v && (!scan.best_row || *v < *value(scan.rows[*scan.best_row]))) scan.best_row = i;
  }
  if (scan.best_row) {
    const std::size_t b = *scan.best_row;
    scan.best_ratio = scan.rows[b].ratio;
    if (b > 0 && b + 1 < scan.rows.size()) {
      const auto y0 = value(scan.rows[b - 1]);
      const auto y2 = value(scan.rows[b + 1]);
      if (y0 && y2) {
        const double x0 = scan.rows[b - 1].ratio, x1 = scan.rows[b].ratio,
                     x2 = scan.rows[b + 1].ratio;
        const double y1 = *value(scan.rows[b]);
        const double num = (x1 - x0) * (x1 - x0) * (y1 - *y2) - (x1 - x2) * (x1 - x2) * (y1 - *y0);
        const double den = (x1 - x0) * (y1 - *y2) - (x1 - x2) * (y1 - *y0);
        if (den != 0.0) {
          const double vertex = x1 - 0.5 * num / den;
          scan.best_ratio = std::clamp(vertex, std::min(x0, x2), std::max(x0, x2));
        }
      }
    }
  }
  return scan;
}

PoissonEnsemble PoissonEnsemble::covering(double mean, double mass) {
  if (!(mean > 0)) throw DomainError("PoissonEnsemble: mean must be > 0");
  if (!(mass > 0 && mass < 1)) throw DomainError("PoissonEnsemble: mass must lie in (0, 1)");
  const boost::math::poisson_distribution<double> dist(mean);
  auto pmf = [&](int n) { return boost::math::pdf(dist, static_cast<double>(n)); };
  int lo = static_cast<int>(std::floor(mean));
  int hi = lo;
  double total = pmf(lo);
  while (total < mass) {
    const double left = lo > 0 ? pmf(lo - 1) : -1.0;
    const double right = pmf(hi + 1);
    if (left >= right) {
      total += left;
      --lo;
    } else {
      total += right;
      ++hi;
    }
  }
  // The protocol needs at least two atoms; lower counts are dropped from the window.
  return {mean, std::max(lo, 2), std::max(hi, 2)};
}

PoissonEnsemble PoissonEnsemble::degenerate(int n) {
  if (n < 2) throw DomainError("PoissonEnsemble: n must be >= 2");
  return {static_cast<double>(n), n, n};
}

std::vector<double> PoissonEnsemble::weights() const {
  if (n_min > n_max || n_min < 0) throw DomainError("PoissonEnsemble: empty window");
  std::vector<double> w(static_cast<std::size_t>(n_max - n_min + 1));
  if (n_min == n_max) {
    w[0] = 1.0;
    return w;
  }
  const boost::math::poisson_distribution<double> dist(mean_atoms);
  for (int n = n_min; n <= n_max; ++n) {
    w[static_cast<std::size_t>(n - n_min)] = boost::math::pdf(dist, static_cast<double>(n));
  }
  double sum = 0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return w;
}

double herald_weighted_mean(const std::vector<double>& weights, const std::vector<double>& success,
                            const std::vector<double>& values) {
  if (weights.size() != success.size() || weights.size() != values.size()) {
    throw DomainError("herald_weighted_mean: size mismatch");
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    num += weights[i] * success[i] * values[i];
    den += weights[i] * success[i];
  }
  if (!(den > 0)) throw DomainError("herald_weighted_mean: no herald probability");
  return num / den;
}

PoissonAverage poisson_average(const ProtocolConfig& cfg, const PoissonEnsemble& ensemble,
                               const ScanOptions& options) {
  PoissonAverage out;
  out.ensemble = ensemble;
  out.statistic = options.statistic;
  ProtocolConfig fixed_cfg = cfg;
  fixed_cfg.spec = EnsembleSpec(static_cast<int>(std::lround(ensemble.mean_atoms)));
  fixed_cfg.samples = 2;
  out.fixed = resolve_protocol(fixed_cfg);

  const std::vector<double> w = ensemble.weights();
  out.rows.resize(w.size());
  parallel_for(w.size(), options.workers, [&](std::size_t i) {
    PoissonRow& row = out.rows[i];
    row.n_atoms = ensemble.n_min + static_cast<int>(i);
    row.weight = w[i];
    ProtocolConfig c = cfg;
    c.spec = EnsembleSpec(row.n_atoms);
    c.omega_p = out.fixed.laser.omega_p;
    c.effective_rabi_target.reset();
    c.delta_p = out.fixed.laser.delta_p;
    c.pulse_time = out.fixed.pulse_time;
    c.calibration = out.fixed.calibration;
    c.samples = 2;
    const ProtocolResult r = run_protocol(c, options.model);
    row.success = r.success(options.statistic);
    row.infidelity = r.statistic(options.statistic);
    row.infidelity_endpoint = r.infidelity;
  });

  std::vector<double> weights, success, values;
  double uncond_num = 0, uncond_den = 0;
  for (const PoissonRow& row : out.rows) {
    out.mean_success += row.weight * row.success;
    if (row.infidelity) {
      weights.push_back(row.weight);
      success.push_back(row.success);
      values.push_back(*row.infidelity);
      uncond_num += row.weight * *row.infidelity;
      uncond_den += row.weight;
    }
    if (row.n_atoms == fixed_cfg.spec.n_atoms()) {
      out.fixed_success = row.success;
      out.fixed_infidelity = row.infidelity;
    }
  }
  out.mean_infidelity = herald_weighted_mean(weights, success, values);
  out.unconditional_mean_infidelity = uncond_den > 0 ? uncond_num / uncond_den : 0.0;
  if (!out.fixed_infidelity) {
    ProtocolConfig c = fixed_cfg;
    const ProtocolResult r = run_protocol(c, options.model);
    out.fixed_success = r.success(options.statistic);
    out.fixed_infidelity = r.statistic(options.statistic);
  }
  return out;
}

PowerLawFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit: need >= 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("linear_fit: x values are all equal");
  PowerLawFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

OmegaCScan scan_omega_c(const ProtocolConfig& cfg, const std::vector<double>& omega_c_grid,
                        const std::vector<int>& n_list, const ScanOptions& options) {
  if (!cfg.effective_rabi_target) {
    throw DomainError("scan_omega_c: an effective_rabi_target is required");
  }
  if (!(cfg.omega_c > 0)) throw DomainError("scan_omega_c: omega_c sets the delta_c ratio");
  const double ratio = cfg.delta_c / cfg.omega_c;
  OmegaCScan scan;
  scan.statistic = options.statistic;
  const std::size_t per_n = omega_c_grid.size();
  scan.rows.resize(per_n * n_list.size());
  parallel_for(scan.rows.size(), options.workers, [&](std::size_t i) {
    OmegaCRow& row = scan.rows[i];
    row.n_atoms = n_list[i / per_n];
    row.omega_c = omega_c_grid[i % per_n];
    ProtocolConfig c = cfg;
    c.spec = EnsembleSpec(row.n_atoms);
    c.omega_c = row.omega_c;
    c.delta_c = ratio * row.omega_c;
    c.delta_p.reset();
    c.pulse_time.reset();
    c.samples = 2;
    try {
      const ProtocolResult r = run_protocol(c, options.model);
      row.omega_p = r.resolved.laser.omega_p;
      row.delta_p = r.resolved.laser.delta_p;
      row.success = r.success(options.statistic);
      row.infidelity = r.statistic(options.statistic);
      row.infidelity_endpoint = r.infidelity;
      row.bound = 10.0 * r.resolved.omega_eff / row.omega_c;
    } catch (const Error& e) {
      row.status = e.what();
    }
  });
  for (int n : n_list) {
    std::vector<double> lx, ly;
    for (const OmegaCRow& row : scan.rows) {
      if (row.n_atoms == n && row.infidelity && *row.infidelity > 0) {
        lx.push_back(std::log(row.omega_c));
        ly.push_back(std::log(*row.infidelity));
      }
    }
    if (lx.size() >= 2) scan.fits.emplace_back(n, linear_fit(lx, ly));
  }
  return scan;
}

DecoherenceScan scan_decoherence(const ProtocolConfig& cfg, RateKind which,
                                 const std::vector<double>& grid, const ScanOptions& options,
                                 const LindbladOptions& lindblad) {
  DecoherenceScan scan;
  scan.which = which;
  scan.rows.resize(grid.size());
  parallel_for(grid.size(), options.workers, [&](std::size_t i) {
    ProtocolConfig c = cfg;
    c.samples = 2;
    switch (which) {
      case RateKind::gamma_e: c.rates.gamma_e = grid[i]; break;
      case RateKind::gamma_r: c.rates.gamma_r = grid[i]; break;
      case RateKind::gamma_d: c.rates.gamma_d = grid[i]; break;
      case RateKind::gamma_coll: c.rates.gamma_coll = grid[i]; break;
    }
    const ProtocolResult r = run_protocol(c, Model::lindblad, lindblad);
    scan.rows[i] = {grid[i], r.success_probability, r.infidelity};
  });
  std::vector<double> x, y;
  for (const DecoherenceRow& row : scan.rows) {
    if (row.infidelity) {
      x.push_back(row.rate);
      y.push_back(*row.infidelity);
    }
  }
  if (x.size() >= 2) scan.fit = linear_fit(x, y);
  return scan;
}

std::vector<double> oscillation_envelope(std::span<const double> times,
                                         std::span<const double> values, double window) {
  if (times.size() != values.size()) throw DomainError("oscillation_envelope: size mismatch");
  std::vector<double> env(times.size());
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    while (times[i] - times[lo] > 0.5 * window) ++lo;
    while (hi + 1 < times.size() && times[hi + 1] - times[i] <= 0.5 * window) ++hi;
    const auto [mn, mx] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(lo),
                                              values.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    env[i] = 0.5 * (*mx - *mn);
  }
  return env;
}

CollapseRevivalResult collapse_revival_demo(const EnsembleSpec& spec,
                                            const CollapseRevivalConfig& cfg) {
  if (!(cfg.probe_time >= 0) || !(cfg.coupling_time > 0) || !(cfg.omega_c > 0)) {
    throw DomainError("collapse_revival_demo: need probe_time >= 0, coupling_time > 0, omega_c > 0");
  }
  const DickeBasis dicke(spec);
  const auto dim = static_cast<Eigen::Index>(dicke.size());
  ComplexVector psi = ComplexVector::Zero(dim);
  psi[static_cast<Eigen::Index>(dicke.at(kGround))] = 1.0;

  const LaserParams probe{cfg.omega_p, 0.0, cfg.delta_p, cfg.delta_c};
  psi = SpectralPropagator(build_dicke_hamiltonian(probe, spec)).evolve(psi, cfg.probe_time);

  CollapseRevivalResult out;
  out.excitation_distribution.resize(static_cast<std::size_t>(spec.n_atoms()) + 1);
  for (int j = 0; j <= spec.n_atoms(); ++j) {
    const double p = std::norm(psi[static_cast<Eigen::Index>(dicke.at({j, 0}))]);
    out.excitation_distribution[static_cast<std::size_t>(j)] = p;
    out.mean_excitation += j * p;
  }

  const LaserParams coupling{0.0, cfg.omega_c, cfg.delta_p, cfg.delta_c};
  const std::vector<double> times = linspace_times(cfg.coupling_time, cfg.samples);
  out.coupling_stage =
      propagate_pure(build_dicke_hamiltonian(coupling, spec), psi, times, ObservableMap::dicke(spec));

  // Block n oscillates at sqrt(dc^2 + n oc^2); neighbouring blocks rephase after
  // 2 pi / (d Omega_n / dn).
  EnvelopeAnalysis& a = out.analysis;
  const double nbar = std::max(out.mean_excitation, 1.0);
  const double omega_n = std::sqrt(cfg.delta_c * cfg.delta_c + nbar * cfg.omega_c * cfg.omega_c);
  a.revival_time_estimate = kTwoPi * 2.0 * omega_n / (cfg.omega_c * cfg.omega_c);
  a.window = 2.0 * kTwoPi / omega_n;

  std::vector<double> ryd;
  ryd.reserve(times.size());
  for (const Observables& o : out.coupling_stage.samples) ryd.push_back(o.p_rydberg);
  out.envelope = oscillation_envelope(times, ryd, a.window);

  const double tr = a.revival_time_estimate;
  auto range_extreme = [&](double from, double to, bool want_max, double* where) {
    double best = want_max ? -1.0 : 2.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < from || times[i] > to) continue;
      const double e = out.envelope[i];
      if (want_max ? e > best : e < best) {
        best = e;
        if (where) *where = times[i];
      }
    }
    return best;
  };
  a.initial_amplitude = range_extreme(0.0, tr / 8, true, nullptr);
  a.collapsed_amplitude = range_extreme(tr / 4, 3 * tr / 4, false, nullptr);
  a.revival_amplitude = range_extreme(3 * tr / 4, 5 * tr / 4, true, &a.revival_time);
  const bool covered = times.back() >= 5 * tr / 4;
  a.collapsed = covered && a.collapsed_amplitude < 0.25 * a.initial_amplitude;
  a.revived = a.collapsed && a.revival_amplitude > 2.0 * a.collapsed_amplitude &&
              a.revival_amplitude > 0.1 * a.initial_amplitude;
  return out;
}

}  // namespace superatom
