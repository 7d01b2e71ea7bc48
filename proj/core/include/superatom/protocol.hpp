#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "superatom/collective_basis.hpp"
#include "superatom/dynamics.hpp"
#include "superatom/hamiltonians.hpp"
#include "superatom/lindblad.hpp"

namespace superatom {

enum class Model { full, dicke, restricted6, effective2, lindblad };
std::string to_string(Model model);
std::optional<Model> parse_model(const std::string& name);

/// How Delta_p and Omega_p are tied to the requested effective Rabi frequency.
///  closed_form: the Delta_c = -Omega_c/2 formulas (Omega_eff, Delta_eff/2 shift).
///  numeric:     Delta_p at the minimum splitting of the G / 2+ eigenpair of the
///               Dicke Hamiltonian, Omega_p tuned until that splitting is Omega_eff.
///  automatic:   closed_form at Delta_c = -Omega_c/2, numeric otherwise.
enum class Calibration { automatic, closed_form, numeric };
std::string to_string(Calibration c);
std::optional<Calibration> parse_calibration(const std::string& name);

/// Three readings of the false-herald fraction of a pulse.
///  endpoint:       (p_ryd - p_ER) / p_ryd of the state at pulse end.
///  plateau:        the same ratio restricted to the resonant eigenpair, i.e. the
///                  final state with the fast off-resonant admixtures removed.
///  cycle_averaged: resonant pair kept coherent, every other eigenstate replaced
///                  by its time-averaged (incoherent) contribution.
enum class InfidelityStatistic { endpoint, plateau, cycle_averaged };
std::string to_string(InfidelityStatistic s);
std::optional<InfidelityStatistic> parse_statistic(const std::string& name);

struct ProtocolConfig {
  EnsembleSpec spec{3};
  double omega_c = 0;  ///< rad/us
  double delta_c = 0;  ///< rad/us
  /// Exactly one of omega_p / effective_rabi_target must be set.
  std::optional<double> omega_p;
  std::optional<double> effective_rabi_target;
  /// Explicit probe detuning; otherwise resolved from the calibration.
  std::optional<double> delta_p;
  DecoherenceRates rates;
  /// us; defaults to pi / Omega_eff.
  std::optional<double> pulse_time;
  Calibration calibration = Calibration::automatic;
  std::size_t samples = 201;
};

struct ResolvedProtocol {
  LaserParams laser;
  Calibration calibration = Calibration::closed_form;  ///< route actually taken
  double omega_eff = 0;                 ///< splitting used for the pulse, rad/us
  std::optional<double> delta_eff;      ///< closed-form regime only
  double pulse_time = 0;                ///< us
  Eigen::Vector2d target_composition = Eigen::Vector2d::Zero();
};

ResolvedProtocol resolve_protocol(const ProtocolConfig& cfg);

/// Splitting of the eigenpair of the Dicke Hamiltonian with the largest weight
/// on |G> and |2+>, and the two eigen-indices involved.
struct ResonantPair {
  double splitting = 0;
  Eigen::Index first = -1;
  Eigen::Index second = -1;
};
ResonantPair resonant_pair(const SpectralPropagator& prop, const RealVector& ground,
                           const RealVector& target);

struct ExactResonance {
  double delta_p = 0;
  double splitting = 0;
};
/// Probe detuning minimizing the G / 2+ splitting at fixed Omega_p.
ExactResonance find_exact_resonance(const EnsembleSpec& spec, double omega_p, double omega_c,
                                    double delta_c);

struct ResonanceCalibration {
  double omega_p = 0;
  double delta_p = 0;
  double omega_eff = 0;
  int iterations = 0;
};
/// Numeric route: Omega_p and Delta_p such that the resonant splitting equals
/// omega_eff_target to 1e-9 relative. Throws NumericalError on failure.
ResonanceCalibration calibrate_resonance(const EnsembleSpec& spec, double omega_c, double delta_c,
                                         double omega_eff_target);

/// Herald statistics of a pure state evolved under a time-independent H.
struct HeraldStatistics {
  double success_endpoint = 0;
  std::optional<double> endpoint;
  double success_plateau = 0;
  std::optional<double> plateau;
  double success_cycle_averaged = 0;
  std::optional<double> cycle_averaged;
};
/// `rydberg` and `er` are the Rydberg and |ER> projectors in the native basis;
/// `ground` and `target` locate the resonant pair.
HeraldStatistics herald_statistics(const SpectralPropagator& prop, const ComplexVector& psi0,
                                   double t, const RealMatrix& rydberg, const RealVector& er,
                                   const RealVector& ground, const RealVector& target);

struct ProtocolResult {
  Model model = Model::dicke;
  ResolvedProtocol resolved;
  double success_probability = 0;        ///< p_rydberg at pulse end
  std::optional<double> infidelity;      ///< false-herald fraction at pulse end
  std::optional<double> infidelity_plateau;
  std::optional<double> infidelity_cycle_averaged;
  double success_plateau = 0;
  double success_cycle_averaged = 0;
  Trajectory trajectory;
  BasisKind basis = BasisKind::dicke;
  std::variant<ComplexVector, ComplexMatrix> final_state;
  Observables final_observables;

  std::optional<double> statistic(InfidelityStatistic s) const;
  double success(InfidelityStatistic s) const;
};

/// Evolves |G> for the resolved pulse time under the chosen model. Coherent
/// models reject nonzero decoherence rates; the Lindblad model uses the product
/// basis (N <= 4).
ProtocolResult run_protocol(const ProtocolConfig& cfg, Model model,
                            const LindbladOptions& lindblad = {});

struct ScanOptions {
  unsigned workers = 0;  ///< 0: default_worker_count()
  InfidelityStatistic statistic = InfidelityStatistic::plateau;
  Model model = Model::dicke;
};

struct DeltaCRow {
  double ratio = 0;  ///< Delta_c / Omega_c
  double delta_c = 0;
  double omega_p = 0;
  double delta_p = 0;
  double omega_eff = 0;
  double success = 0;
  std::optional<double> infidelity;
  std::optional<double> infidelity_plateau;
  std::optional<double> infidelity_cycle_averaged;
  double success_plateau = 0;
  std::string status = "ok";
};

struct DeltaCScan {
  std::vector<DeltaCRow> rows;
  InfidelityStatistic statistic = InfidelityStatistic::plateau;
  std::optional<std::size_t> best_row;
  std::optional<double> best_ratio;  ///< parabolic refinement around best_row
};

/// Resolves every point at fixed effective Rabi target (numeric calibration
/// unless the config forces closed_form) and locates the minimum of the chosen
/// statistic. Points that fail to calibrate keep a status message and are
/// excluded from the minimum.
DeltaCScan scan_delta_c(const ProtocolConfig& cfg, const std::vector<double>& ratios,
                        const ScanOptions& options = {});

struct PoissonEnsemble {
  double mean_atoms = 0;
  int n_min = 1;
  int n_max = 1;

  /// Smallest window around the mean holding at least `mass` of the distribution.
  static PoissonEnsemble covering(double mean, double mass = 1.0 - 1e-6);
  /// All weight on N = mean.
  static PoissonEnsemble degenerate(int n);
  /// Renormalized weights for n_min..n_max (sum 1 to 1e-12).
  std::vector<double> weights() const;
};

struct PoissonRow {
  int n_atoms = 0;
  double weight = 0;
  double success = 0;
  std::optional<double> infidelity;  ///< chosen statistic
  std::optional<double> infidelity_endpoint;
};

struct PoissonAverage {
  PoissonEnsemble ensemble;
  InfidelityStatistic statistic = InfidelityStatistic::plateau;
  ResolvedProtocol fixed;  ///< parameters optimized for N = round(mean)
  double fixed_success = 0;
  std::optional<double> fixed_infidelity;
  double mean_success = 0;
  double mean_infidelity = 0;               ///< herald weighted
  double unconditional_mean_infidelity = 0; ///< plain p(N) weights
  std::vector<PoissonRow> rows;
};

/// Resolves the laser parameters once at N = round(mean) and reuses them for
/// every N in the window (Dicke model).
PoissonAverage poisson_average(const ProtocolConfig& cfg, const PoissonEnsemble& ensemble,
                               const ScanOptions& options = {});

/// Herald-weighted mean sum p w s f / sum p w s over arbitrary per-N values.
double herald_weighted_mean(const std::vector<double>& weights, const std::vector<double>& success,
                            const std::vector<double>& values);

struct OmegaCRow {
  int n_atoms = 0;
  double omega_c = 0;
  double omega_p = 0;
  double delta_p = 0;
  double success = 0;
  std::optional<double> infidelity;
  std::optional<double> infidelity_endpoint;
  double bound = 0;  ///< 10 Omega_eff / Omega_c
  std::string status = "ok";
};

struct PowerLawFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

struct OmegaCScan {
  InfidelityStatistic statistic = InfidelityStatistic::plateau;
  std::vector<OmegaCRow> rows;  ///< ordered by (N, grid index)
  std::vector<std::pair<int, PowerLawFit>> fits;  ///< log-log fit per N
};

/// Fixed effective Rabi target; Omega_p re-solved at every grid point.
OmegaCScan scan_omega_c(const ProtocolConfig& cfg, const std::vector<double>& omega_c_grid,
                        const std::vector<int>& n_list, const ScanOptions& options = {});

/// Ordinary least squares y = intercept + slope x.
PowerLawFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class RateKind { gamma_e, gamma_r, gamma_d, gamma_coll };
std::string to_string(RateKind k);
std::optional<RateKind> parse_rate_kind(const std::string& name);

struct DecoherenceRow {
  double rate = 0;  ///< rad/us
  double success = 0;
  std::optional<double> infidelity;
};

struct DecoherenceScan {
  RateKind which = RateKind::gamma_e;
  std::vector<DecoherenceRow> rows;
  PowerLawFit fit;  ///< infidelity = intercept + slope * rate
};

/// Lindblad runs with one rate varied and the others taken from cfg.rates.
DecoherenceScan scan_decoherence(const ProtocolConfig& cfg, RateKind which,
                                 const std::vector<double>& grid, const ScanOptions& options = {},
                                 const LindbladOptions& lindblad = {});

struct CollapseRevivalConfig {
  double omega_p = 0;        ///< probe stage, rad/us
  double delta_p = 0;
  double probe_time = 0;     ///< us
  double omega_c = 0;        ///< coupling stage, rad/us
  double delta_c = 0;
  double coupling_time = 0;  ///< us
  std::size_t samples = 2001;
};

struct EnvelopeAnalysis {
  double revival_time_estimate = 0;  ///< us
  double window = 0;                 ///< us
  double initial_amplitude = 0;
  double collapsed_amplitude = 0;
  double revival_amplitude = 0;
  double revival_time = 0;  ///< location of revival_amplitude
  bool collapsed = false;
  bool revived = false;
};

/// Oscillation envelope (max - min)/2 of `values` over a sliding window.
std::vector<double> oscillation_envelope(std::span<const double> times,
                                         std::span<const double> values, double window);

struct CollapseRevivalResult {
  std::vector<double> excitation_distribution;  ///< P(j) after the probe stage
  double mean_excitation = 0;
  Trajectory coupling_stage;
  std::vector<double> envelope;
  EnvelopeAnalysis analysis;
};

CollapseRevivalResult collapse_revival_demo(const EnsembleSpec& spec,
                                            const CollapseRevivalConfig& cfg);

}  // namespace superatom
