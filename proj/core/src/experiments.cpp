#include "superatom/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include "json.hpp"
#include "superatom/results_io.hpp"
#include "superatom/version.hpp"

namespace superatom {

using Json = nlohmann::ordered_json;

namespace {

Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_significant(v);
}

Json num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

double delta_c_of(const RunConfig& cfg, double omega_c) {
  if (cfg.has("delta_c_mhz")) return angular_from_mhz(cfg.real("delta_c_mhz"));
  if (cfg.has("delta_c_over_omega_c")) return cfg.real("delta_c_over_omega_c") * omega_c;
  return -0.5 * omega_c;  // scans set their own delta_c per point
}

Json resolved_json(const ResolvedProtocol& r) {
  Json j;
  j["calibration"] = to_string(r.calibration);
  j["omega_p_mhz"] = num(mhz_from_angular(r.laser.omega_p));
  j["omega_c_mhz"] = num(mhz_from_angular(r.laser.omega_c));
  j["delta_p_mhz"] = num(mhz_from_angular(r.laser.delta_p));
  j["delta_c_mhz"] = num(mhz_from_angular(r.laser.delta_c));
  j["omega_eff_mhz"] = num(mhz_from_angular(r.omega_eff));
  j["delta_eff_mhz"] = r.delta_eff ? num(mhz_from_angular(*r.delta_eff)) : Json(nullptr);
  j["pulse_time_us"] = num(r.pulse_time);
  j["target_composition"] = {num(r.target_composition[0]), num(r.target_composition[1])};
  Json a;
  a["omega_p"] = num(r.laser.omega_p);
  a["omega_c"] = num(r.laser.omega_c);
  a["delta_p"] = num(r.laser.delta_p);
  a["delta_c"] = num(r.laser.delta_c);
  a["omega_eff"] = num(r.omega_eff);
  a["delta_eff"] = num(r.delta_eff);
  j["angular_rad_per_us"] = a;
  return j;
}

Json observables_json(const Observables& o) {
  Json j;
  j["p_G"] = num(o.p_G);
  j["p_E"] = num(o.p_E);
  j["p_R"] = num(o.p_R);
  j["p_E2"] = num(o.p_E2);
  j["p_ER"] = num(o.p_ER);
  j["p_ryd"] = num(o.p_rydberg);
  j["p_2plus"] = num(o.p_target);
  j["infidelity"] = num(o.infidelity);
  return j;
}

InfidelityStatistic statistic_of(const RunConfig& cfg) {
  return *parse_statistic(cfg.text("statistic"));
}

ScanOptions scan_options(const RunConfig& cfg, const RunOptions& o) {
  ScanOptions s;
  s.workers = o.workers;
  if (cfg.has("statistic")) s.statistic = statistic_of(cfg);
  if (cfg.has("model")) s.model = *parse_model(cfg.text("model"));
  return s;
}

void run_rabi(const RunConfig& cfg, const RunOptions&, ExperimentOutput& out, Json& results) {
  const ProtocolConfig pc = protocol_config(cfg);
  const Model model = *parse_model(cfg.text("model"));
  const ProtocolResult r = run_protocol(pc, model);
  results["model"] = to_string(model);
  results["resolved"] = resolved_json(r.resolved);
  results["success_probability"] = num(r.success_probability);
  results["infidelity"] = num(r.infidelity);
  results["infidelity_plateau"] = num(r.infidelity_plateau);
  results["infidelity_cycle_averaged"] = num(r.infidelity_cycle_averaged);
  results["success_plateau"] = num(r.success_plateau);
  results["success_cycle_averaged"] = num(r.success_cycle_averaged);
  results["final"] = observables_json(r.final_observables);
  if (cfg.flag("write_trajectory")) out.files["trajectory.csv"] = trajectory_csv(r.trajectory);
}

void run_scan_dc(const RunConfig& cfg, const RunOptions& o, ExperimentOutput& out, Json& results) {
  const ProtocolConfig pc = protocol_config(cfg);
  const DeltaCScan scan = scan_delta_c(pc, cfg.reals("delta_c_ratio_grid"), scan_options(cfg, o));
  Table t{{"delta_c_over_omega_c", "delta_c_mhz", "omega_p_mhz", "delta_p_mhz", "omega_eff_mhz",
           "success", "infidelity", "infidelity_plateau", "infidelity_cycle_averaged",
           "success_plateau", "status"},
          {}};
  for (const DeltaCRow& r : scan.rows) {
    t.rows.push_back({r.ratio, mhz_from_angular(r.delta_c), mhz_from_angular(r.omega_p),
                      mhz_from_angular(r.delta_p), mhz_from_angular(r.omega_eff), r.success,
                      r.infidelity, r.infidelity_plateau, r.infidelity_cycle_averaged,
                      r.success_plateau, r.status});
  }
  out.files["scan.csv"] = table_csv(t);
  results["statistic"] = to_string(scan.statistic);
  results["points"] = scan.rows.size();
  std::size_t failed = 0;
  for (const auto& r : scan.rows) failed += r.status != "ok";
  results["failed_points"] = failed;
  if (scan.best_row) {
    const DeltaCRow& b = scan.rows[*scan.best_row];
    Json m;
    m["row"] = *scan.best_row;
    m["delta_c_over_omega_c"] = num(b.ratio);
    m["refined_delta_c_over_omega_c"] = num(scan.best_ratio);
    m["infidelity"] = num(b.infidelity);
    m["infidelity_plateau"] = num(b.infidelity_plateau);
    m["infidelity_cycle_averaged"] = num(b.infidelity_cycle_averaged);
    m["success"] = num(b.success);
    m["success_plateau"] = num(b.success_plateau);
    results["minimum"] = m;
  } else {
    results["minimum"] = nullptr;
  }
}

void run_scan_oc(const RunConfig& cfg, const RunOptions& o, ExperimentOutput& out, Json& results) {
  ProtocolConfig pc;
  pc.effective_rabi_target = angular_from_mhz(cfg.real("effective_rabi_target_mhz"));
  pc.omega_c = 1.0;
  pc.delta_c = cfg.real("delta_c_over_omega_c");
  pc.calibration = *parse_calibration(cfg.text("calibration"));
  std::vector<double> grid;
  for (double v : cfg.reals("omega_c_mhz_grid")) grid.push_back(angular_from_mhz(v));
  std::vector<int> ns;
  for (long long n : cfg.integers("n_atoms_list")) ns.push_back(static_cast<int>(n));
  const OmegaCScan scan = scan_omega_c(pc, grid, ns, scan_options(cfg, o));
  Table t{{"omega_c_mhz", "n_atoms", "omega_p_mhz", "delta_p_mhz", "success", "infidelity",
           "infidelity_endpoint", "bound", "status"},
          {}};
  for (const OmegaCRow& r : scan.rows) {
    t.rows.push_back({mhz_from_angular(r.omega_c), static_cast<long long>(r.n_atoms),
                      mhz_from_angular(r.omega_p), mhz_from_angular(r.delta_p), r.success,
                      r.infidelity, r.infidelity_endpoint, r.bound, r.status});
  }
  out.files["scan.csv"] = table_csv(t);
  results["statistic"] = to_string(scan.statistic);
  Json fits = Json::array();
  for (const auto& [n, f] : scan.fits) {
    fits.push_back({{"n_atoms", n},
                    {"loglog_slope", num(f.slope)},
                    {"intercept", num(f.intercept)},
                    {"r_squared", num(f.r_squared)}});
  }
  results["fits"] = fits;
  std::size_t above = 0;
  for (const OmegaCRow& r : scan.rows) above += r.infidelity && *r.infidelity > r.bound;
  results["points_above_bound"] = above;
}

void run_scan_n(const RunConfig& cfg, const RunOptions& o, ExperimentOutput& out, Json& results) {
  const double mean = cfg.real("mean_atoms");
  const double mass = cfg.real("window_mass");
  if (!(mass < 1)) throw ConfigError("key 'window_mass': must be < 1");
  RunConfig with_n = cfg;
  with_n.values["n_atoms"] = static_cast<long long>(std::lround(mean));
  const ProtocolConfig pc = protocol_config(with_n);
  const PoissonEnsemble ens = PoissonEnsemble::covering(mean, mass);
  const PoissonAverage avg = poisson_average(pc, ens, scan_options(cfg, o));
  Table t{{"n_atoms", "weight", "success", "infidelity", "infidelity_endpoint"}, {}};
  for (const PoissonRow& r : avg.rows) {
    t.rows.push_back({static_cast<long long>(r.n_atoms), r.weight, r.success, r.infidelity,
                      r.infidelity_endpoint});
  }
  out.files["scan.csv"] = table_csv(t);
  results["statistic"] = to_string(avg.statistic);
  results["window"] = {{"n_min", ens.n_min}, {"n_max", ens.n_max}, {"mass", num(mass)}};
  results["resolved"] = resolved_json(avg.fixed);
  results["fixed_n_success"] = num(avg.fixed_success);
  results["fixed_n_infidelity"] = num(avg.fixed_infidelity);
  results["mean_success"] = num(avg.mean_success);
  results["mean_infidelity"] = num(avg.mean_infidelity);
  results["unconditional_mean_infidelity"] = num(avg.unconditional_mean_infidelity);
}

void run_lindblad_scan(const RunConfig& cfg, const RunOptions& o, ExperimentOutput& out,
                       Json& results) {
  const ProtocolConfig pc = protocol_config(cfg);
  const RateKind which = *parse_rate_kind(cfg.text("rate"));
  std::vector<double> grid;
  for (double v : cfg.reals("rate_grid_mhz")) grid.push_back(angular_from_mhz(v));
  ScanOptions so;
  so.workers = o.workers;
  const DecoherenceScan scan = scan_decoherence(pc, which, grid, so);
  Table t{{"rate_mhz", "rate_rad_per_us", "success", "infidelity"}, {}};
  for (const DecoherenceRow& r : scan.rows) {
    t.rows.push_back({mhz_from_angular(r.rate), r.rate, r.success, r.infidelity});
  }
  out.files["scan.csv"] = table_csv(t);
  results["rate"] = to_string(which);
  results["resolved"] = resolved_json(resolve_protocol(pc));
  results["fit"] = {{"slope_per_rad_per_us", num(scan.fit.slope)},
                    {"slope_per_mhz", num(scan.fit.slope * kTwoPi)},
                    {"intercept", num(scan.fit.intercept)},
                    {"r_squared", num(scan.fit.r_squared)}};
}

void run_ion_mc(const RunConfig& cfg, const RunOptions& o, ExperimentOutput& out, Json& results) {
  const IonEscapeConfig ic = ion_escape_config(cfg);
  const EscapeResult r = simulate_escape(ic, o.workers);
  results["escape_time_ns"] = r.escape_time ? num(*r.escape_time) : Json("no-escape");
  results["escape_time_min_ns"] = r.escaped ? num(r.escape_time_min) : Json(nullptr);
  results["escape_time_max_ns"] = r.escaped ? num(r.escape_time_max) : Json(nullptr);
  const auto oracle = kinematic_escape_time(ic);
  results["kinematic_escape_time_ns"] = oracle ? num(*oracle) : Json("no-escape");
  results["escaped_trajectories"] = r.escaped;
  results["spectators_total"] = r.spectators_total;
  results["significant"] = r.significant;
  results["close_collisions"] = r.close_collisions;
  results["phase_threshold_rad"] = num(ic.phase_threshold);
  results["fraction_significant"] = num(r.fraction_significant);
  results["external_field_phase_rad"] = num(r.external_field_phase);
  results["external_field_phase_below_threshold"] = r.external_field_phase < ic.phase_threshold;
  results["max_energy_relative_error"] = num(r.max_energy_error);
  Table t{{"threshold_rad", "fraction_significant"}, {}};
  Json curve = Json::array();
  for (const auto& [th, f] : r.threshold_curve()) {
    t.rows.push_back({th, f});
    curve.push_back({num(th), num(f)});
  }
  results["threshold_curve"] = curve;
  out.files["scan.csv"] = table_csv(t);
  if (cfg.flag("write_phases")) {
    Table p{{"trajectory", "atom", "phase_rad", "close_collision"}, {}};
    const auto per = static_cast<std::size_t>(ic.n_atoms - 1);
    for (std::size_t i = 0; i < r.per_atom_phases.size(); ++i) {
      p.rows.push_back({static_cast<long long>(i / per), static_cast<long long>(i % per),
                        r.per_atom_phases[i], static_cast<long long>(r.close_collision[i])});
    }
    out.files["phases.csv"] = table_csv(p);
  }
}

void run_jc_demo(const RunConfig& cfg, const RunOptions&, ExperimentOutput& out, Json& results) {
  const CollapseRevivalConfig cc = collapse_revival_config(cfg);
  const EnsembleSpec spec(static_cast<int>(cfg.integer("n_atoms")));
  const CollapseRevivalResult r = collapse_revival_demo(spec, cc);
  Table d{{"j", "probability"}, {}};
  for (std::size_t j = 0; j < r.excitation_distribution.size(); ++j) {
    d.rows.push_back({static_cast<long long>(j), r.excitation_distribution[j]});
  }
  out.files["distribution.csv"] = table_csv(d);
  if (cfg.flag("write_trajectory")) out.files["trajectory.csv"] = trajectory_csv(r.coupling_stage);
  const EnvelopeAnalysis& a = r.analysis;
  results["mean_excitation"] = num(r.mean_excitation);
  results["envelope"] = {{"revival_time_estimate_us", num(a.revival_time_estimate)},
                         {"window_us", num(a.window)},
                         {"initial_amplitude", num(a.initial_amplitude)},
                         {"collapsed_amplitude", num(a.collapsed_amplitude)},
                         {"revival_amplitude", num(a.revival_amplitude)},
                         {"revival_time_us", num(a.revival_time)},
                         {"collapsed", a.collapsed},
                         {"revived", a.revived}};
}

}  // namespace

ProtocolConfig protocol_config(const RunConfig& cfg) {
  ProtocolConfig pc;
  pc.spec = EnsembleSpec(static_cast<int>(cfg.integer("n_atoms")));
  pc.omega_c = angular_from_mhz(cfg.real("omega_c_mhz"));
  pc.delta_c = delta_c_of(cfg, pc.omega_c);
  if (cfg.has("omega_p_mhz")) pc.omega_p = angular_from_mhz(cfg.real("omega_p_mhz"));
  if (cfg.has("effective_rabi_target_mhz")) {
    pc.effective_rabi_target = angular_from_mhz(cfg.real("effective_rabi_target_mhz"));
  }
  if (cfg.has("delta_p_mhz")) pc.delta_p = angular_from_mhz(cfg.real("delta_p_mhz"));
  if (cfg.has("pulse_time_us")) pc.pulse_time = cfg.real("pulse_time_us");
  if (cfg.has("calibration")) pc.calibration = *parse_calibration(cfg.text("calibration"));
  if (cfg.has("samples")) pc.samples = static_cast<std::size_t>(cfg.integer("samples"));
  if (cfg.has("gamma_e_mhz")) {
    pc.rates.gamma_e = angular_from_mhz(cfg.real("gamma_e_mhz"));
    pc.rates.gamma_r = angular_from_mhz(cfg.real("gamma_r_mhz"));
    pc.rates.gamma_d = angular_from_mhz(cfg.real("gamma_d_mhz"));
    pc.rates.gamma_coll = angular_from_mhz(cfg.real("gamma_coll_mhz"));
  }
  return pc;
}

IonEscapeConfig ion_escape_config(const RunConfig& cfg) {
  IonEscapeConfig ic;
  ic.ramp_field_max = cfg.real("ramp_field_max");
  ic.ramp_time = cfg.real("ramp_time");
  ic.trap_diameter = cfg.real("trap_diameter");
  ic.trap_volume = cfg.real("trap_volume");
  ic.n_atoms = static_cast<int>(cfg.integer("n_atoms"));
  ic.ion_mass = cfg.real("ion_mass");
  ic.differential_polarizability = cfg.real("differential_polarizability");
  ic.phase_threshold = cfg.real("phase_threshold");
  ic.n_trajectories = static_cast<std::size_t>(cfg.integer("n_trajectories"));
  ic.rng_seed = static_cast<std::uint64_t>(cfg.integer("rng_seed"));
  ic.ion_start_center = cfg.text("ion_start") == "center";
  ic.softening_radius = cfg.real("softening_radius");
  ic.time_step = cfg.real("time_step");
  ic.phase_cutoff_distance = cfg.real("phase_cutoff_distance");
  ic.horizon = cfg.real("horizon");
  ic.validate();
  return ic;
}

CollapseRevivalConfig collapse_revival_config(const RunConfig& cfg) {
  CollapseRevivalConfig cc;
  cc.omega_p = angular_from_mhz(cfg.real("omega_p_mhz"));
  cc.delta_p = angular_from_mhz(cfg.real("delta_p_mhz"));
  cc.probe_time = cfg.real("probe_time_us");
  cc.omega_c = angular_from_mhz(cfg.real("omega_c_mhz"));
  cc.delta_c = delta_c_of(cfg, cc.omega_c);
  cc.coupling_time = cfg.real("coupling_time_us");
  cc.samples = static_cast<std::size_t>(cfg.integer("samples"));
  return cc;
}

ExperimentOutput run_experiment(const RunConfig& cfg, const RunOptions& options) {
  ExperimentOutput out;
  Json summary;
  summary["software"] = {{"name", "superatom"}, {"version", kVersion}};
  summary["generated_at"] = options.timestamp;
  summary["experiment"] = to_string(cfg.experiment);
  summary["config_echo"] = echo_config(cfg);
  Json results = Json::object();
  switch (cfg.experiment) {
    case Experiment::rabi: run_rabi(cfg, options, out, results); break;
    case Experiment::scan_dc: run_scan_dc(cfg, options, out, results); break;
    case Experiment::scan_oc: run_scan_oc(cfg, options, out, results); break;
    case Experiment::scan_n: run_scan_n(cfg, options, out, results); break;
    case Experiment::lindblad_scan: run_lindblad_scan(cfg, options, out, results); break;
    case Experiment::ion_mc: run_ion_mc(cfg, options, out, results); break;
    case Experiment::jc_demo: run_jc_demo(cfg, options, out, results); break;
  }
  summary["results"] = results;
  out.files["summary.json"] = summary.dump(2) + "\n";
  return out;
}

void emit_results(const ExperimentOutput& output, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  for (const auto& [name, content] : output.files) write_text_file(out_dir / name, content);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace superatom
