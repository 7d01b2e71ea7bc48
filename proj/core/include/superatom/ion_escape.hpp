#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace superatom {

namespace si {
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double epsilon0 = 8.8541878128e-12;          // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
}  // namespace si

/// Static differential polarizability of the 88Sr 1S0-3P0 clock transition,
/// C m^2 / V (external literature value, not part of the model).
inline constexpr double kSr88ClockDeltaAlpha = 4.07873e-39;

struct IonEscapeConfig {
  double ramp_field_max = 1e5;  ///< V/m
  double ramp_time = 300;       ///< ns
  double trap_diameter = 1;     ///< um, escape once |r_ion| >= diameter / 2
  double trap_volume = 1;       ///< um^3, spectators uniform in a sphere of this volume
  int n_atoms = 100;            ///< ion plus N - 1 spectators
  double ion_mass = 88;         ///< amu
  /// C m^2 / V. No default: the value is external data and must be supplied.
  double differential_polarizability = std::numeric_limits<double>::quiet_NaN();
  double phase_threshold = 0.01;  ///< rad
  std::size_t n_trajectories = 1000;
  std::uint64_t rng_seed = 1;
  bool ion_start_center = true;   ///< else uniform in the spectator sphere
  double softening_radius = 5e-3; ///< um
  double time_step = 0.1;         ///< ns, capped at 0.1
  /// Phase integration stops once the ion is this far from the trap centre.
  double phase_cutoff_distance = 20;  ///< um
  double horizon = 3000;              ///< ns

  void validate() const;
};

struct TrajectoryOutcome {
  std::optional<double> escape_time;  ///< ns; empty: no escape within the horizon
  double max_phase = 0;
  std::size_t significant = 0;
  std::size_t close_collisions = 0;
  double kinetic_energy = 0;          ///< J, at exit
  double field_work = 0;              ///< J, work of the ramp field up to exit
  double min_distance = 0;            ///< um, closest ion-spectator approach
};

struct EscapeResult {
  std::optional<double> escape_time;  ///< ns, mean over escaped trajectories
  double escape_time_min = 0;
  double escape_time_max = 0;
  std::size_t escaped = 0;
  std::vector<double> per_atom_phases;  ///< trajectory-major, N - 1 per trajectory
  std::vector<std::uint8_t> close_collision;  ///< same layout as per_atom_phases
  double fraction_significant = 0;
  std::size_t significant = 0;
  std::size_t close_collisions = 0;
  std::size_t spectators_total = 0;
  double external_field_phase = 0;
  double max_energy_error = 0;  ///< relative |KE - W| / W over escaped trajectories
  std::vector<TrajectoryOutcome> trajectories;

  /// Fraction of spectators above `threshold` (close collisions always count).
  double fraction_above(double threshold) const;
  /// (threshold, fraction) pairs on a log grid.
  std::vector<std::pair<double, double>> threshold_curve(double lo = 1e-4, double hi = 1.0,
                                                         int points = 13) const;
};

/// Monte Carlo over cfg.n_trajectories. Trajectory i draws from its own RNG
/// stream seeded by (rng_seed, i), so results do not depend on `workers`.
EscapeResult simulate_escape(const IonEscapeConfig& cfg, unsigned workers = 0);

/// One trajectory, exposed for tests.
TrajectoryOutcome simulate_trajectory(const IonEscapeConfig& cfg, std::size_t index,
                                      std::vector<double>* phases = nullptr,
                                      std::vector<std::uint8_t>* close = nullptr);

/// Exit time of an ion starting at rest in the centre under the linear ramp:
/// x(t) = q E_max t^3 / (6 m tau) for t <= tau, constant force afterwards. ns.
std::optional<double> kinematic_escape_time(const IonEscapeConfig& cfg);

/// (Delta alpha / 2 hbar) int_0^t E(s)^2 ds for the linear ramp, t in ns.
double ramp_field_phase(const IonEscapeConfig& cfg, double t_ns);
/// Same, evaluated at the kinematic exit time.
double ramp_field_phase(const IonEscapeConfig& cfg);

/// int_0^dt ds / (|w + u s|^2 + a2)^2, exact for straight-line motion.
double segment_inverse_square_integral(const double w[3], const double u[3], double a2, double dt);

}  // namespace superatom
