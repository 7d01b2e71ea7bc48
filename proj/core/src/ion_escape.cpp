#include "superatom/ion_escape.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "superatom/common.hpp"
#include "superatom/parallel.hpp"

namespace superatom {

namespace {

constexpr double kNs = 1e-9;
constexpr double kUm = 1e-6;

double sphere_radius(double volume) { return std::cbrt(3.0 * volume / (4.0 * std::numbers::pi)); }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::array<double, 3> uniform_in_ball(std::mt19937_64& rng, double radius) {
  for (;;) {
    std::array<double, 3> p{2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1};
    const double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if (r2 <= 1.0) {
      for (double& x : p) x *= radius;
      return p;
    }
  }
}

double norm3(const double* v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

void IonEscapeConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw DomainError(std::string("ion escape: ") + name + " must be > 0");
    }
  };
  if (!(ramp_field_max >= 0) || !std::isfinite(ramp_field_max)) {
    throw DomainError("ion escape: ramp_field_max must be >= 0");
  }
  positive(ramp_time, "ramp_time");
  positive(trap_diameter, "trap_diameter");
  positive(trap_volume, "trap_volume");
  positive(ion_mass, "ion_mass");
  positive(phase_threshold, "phase_threshold");
  positive(softening_radius, "softening_radius");
  positive(time_step, "time_step");
  positive(phase_cutoff_distance, "phase_cutoff_distance");
  positive(horizon, "horizon");
  if (!(differential_polarizability >= 0) || !std::isfinite(differential_polarizability)) {
    throw DomainError("ion escape: differential_polarizability must be supplied and >= 0");
  }
  if (n_atoms < 1) throw DomainError("ion escape: n_atoms must be >= 1");
  if (n_trajectories < 1) throw DomainError("ion escape: n_trajectories must be >= 1");
}

double segment_inverse_square_integral(const double w[3], const double u[3], double a2, double dt) {
  const double A = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  const double B = 2.0 * (w[0] * u[0] + w[1] * u[1] + w[2] * u[2]);
  const double C = w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + a2;
  auto q = [&](double s) { return (A * s + B) * s + C; };
  if (A * dt * dt < 1e-4 * C) {
    const double q0 = q(0), qm = q(0.5 * dt), q1 = q(dt);
    return dt / 6.0 * (1.0 / (q0 * q0) + 4.0 / (qm * qm) + 1.0 / (q1 * q1));
  }
  const double cx = w[1] * u[2] - w[2] * u[1];
  const double cy = w[2] * u[0] - w[0] * u[2];
  const double cz = w[0] * u[1] - w[1] * u[0];
  const double disc = 4.0 * (A * a2 + cx * cx + cy * cy + cz * cz);  // 4AC - B^2
  const double root = std::sqrt(disc);
  auto rational = [&](double s) { return (2.0 * A * s + B) / (disc * q(s)); };
  const double angle = std::atan((2.0 * A * dt + B) / root) - std::atan(B / root);
  return rational(dt) - rational(0) + 4.0 * A / (disc * root) * angle;
}

TrajectoryOutcome simulate_trajectory(const IonEscapeConfig& cfg, std::size_t index,
                                      std::vector<double>* phases,
                                      std::vector<std::uint8_t>* close) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed),
                    static_cast<std::uint32_t>(cfg.rng_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);

  const double cloud = sphere_radius(cfg.trap_volume) * kUm;
  const double exit_radius = 0.5 * cfg.trap_diameter * kUm;
  const double cutoff = cfg.phase_cutoff_distance * kUm;
  const double soft = cfg.softening_radius * kUm;
  const double a2 = soft * soft;
  const double dt = std::min(cfg.time_step, 0.1) * kNs;
  const double tau = cfg.ramp_time * kNs;
  const double horizon = cfg.horizon * kNs;
  const double mass = cfg.ion_mass * si::atomic_mass_unit;
  const double q = si::elementary_charge;

  const std::size_t n_spec = static_cast<std::size_t>(cfg.n_atoms - 1);
  std::vector<std::array<double, 3>> spectators(n_spec);
  for (auto& p : spectators) p = uniform_in_ball(rng, cloud);
  std::array<double, 3> x{0, 0, 0};
  if (!cfg.ion_start_center) x = uniform_in_ball(rng, cloud);

  std::vector<double> integral(n_spec, 0.0);
  std::vector<std::uint8_t> hit(n_spec, 0);
  std::array<double, 3> v{0, 0, 0};
  auto accel = [&](double t) { return q * cfg.ramp_field_max * std::min(t / tau, 1.0) / mass; };

  TrajectoryOutcome out;
  double min_dist = std::numeric_limits<double>::infinity();
  double work = 0.0;
  double t = 0.0;
  while (t < horizon) {
    const double a0 = accel(t);
    const double a1 = accel(t + dt);
    std::array<double, 3> xn = x;
    xn[2] += v[2] * dt + 0.5 * a0 * dt * dt;
    xn[0] += v[0] * dt;
    xn[1] += v[1] * dt;
    std::array<double, 3> vn = v;
    vn[2] += 0.5 * (a0 + a1) * dt;
    work += 0.5 * mass * (a0 * v[2] + a1 * vn[2]) * dt;

    const double u[3] = {(xn[0] - x[0]) / dt, (xn[1] - x[1]) / dt, (xn[2] - x[2]) / dt};
    const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    for (std::size_t k = 0; k < n_spec; ++k) {
      const double w[3] = {x[0] - spectators[k][0], x[1] - spectators[k][1],
                           x[2] - spectators[k][2]};
      integral[k] += segment_inverse_square_integral(w, u, a2, dt);
      double s = 0.0;
      if (uu > 0) s = std::clamp(-(w[0] * u[0] + w[1] * u[1] + w[2] * u[2]) / uu, 0.0, dt);
      const double d[3] = {w[0] + u[0] * s, w[1] + u[1] * s, w[2] + u[2] * s};
      const double dist = norm3(d);
      min_dist = std::min(min_dist, dist);
      if (dist < soft) hit[k] = 1;
    }

    const double r0 = norm3(x.data());
    const double r1 = norm3(xn.data());
    if (!out.escape_time && r1 >= exit_radius) {
      const double f = r1 > r0 ? std::clamp((exit_radius - r0) / (r1 - r0), 0.0, 1.0) : 1.0;
      out.escape_time = (t + f * dt) / kNs;
      out.kinetic_energy = 0.5 * mass * (vn[0] * vn[0] + vn[1] * vn[1] + vn[2] * vn[2]);
      out.field_work = work;
    }
    t += dt;
    x = xn;
    v = vn;
    if (out.escape_time && r1 >= cutoff) break;
  }

  const double k_coulomb = si::elementary_charge / (4.0 * std::numbers::pi * si::epsilon0);
  const double scale = cfg.differential_polarizability / (2.0 * si::hbar) * k_coulomb * k_coulomb;
  out.min_distance = n_spec > 0 ? min_dist / kUm : 0.0;
  for (std::size_t k = 0; k < n_spec; ++k) {
    const double phi = scale * integral[k];
    out.max_phase = std::max(out.max_phase, phi);
    if (hit[k]) ++out.close_collisions;
    if (hit[k] || phi > cfg.phase_threshold) ++out.significant;
    if (phases) phases->push_back(phi);
    if (close) close->push_back(hit[k]);
  }
  return out;
}

EscapeResult simulate_escape(const IonEscapeConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::size_t n = cfg.n_trajectories;
  std::vector<TrajectoryOutcome> outcomes(n);
  std::vector<std::vector<double>> phases(n);
  std::vector<std::vector<std::uint8_t>> close(n);
  parallel_for(n, workers, [&](std::size_t i) {
    outcomes[i] = simulate_trajectory(cfg, i, &phases[i], &close[i]);
  });

  EscapeResult r;
  double sum_t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectoryOutcome& o = outcomes[i];
    r.per_atom_phases.insert(r.per_atom_phases.end(), phases[i].begin(), phases[i].end());
    r.close_collision.insert(r.close_collision.end(), close[i].begin(), close[i].end());
    r.significant += o.significant;
    r.close_collisions += o.close_collisions;
    if (o.escape_time) {
      const double te = *o.escape_time;
      r.escape_time_min = r.escaped == 0 ? te : std::min(r.escape_time_min, te);
      r.escape_time_max = r.escaped == 0 ? te : std::max(r.escape_time_max, te);
      ++r.escaped;
      sum_t += te;
      if (o.field_work > 0) {
        r.max_energy_error = std::max(r.max_energy_error,
                                      std::abs(o.kinetic_energy - o.field_work) / o.field_work);
      }
    }
  }
  if (r.escaped > 0) r.escape_time = sum_t / static_cast<double>(r.escaped);
  r.spectators_total = r.per_atom_phases.size();
  r.fraction_significant = r.spectators_total > 0 ? static_cast<double>(r.significant) /
                                                        static_cast<double>(r.spectators_total)
                                                  : 0.0;
  r.external_field_phase = ramp_field_phase(cfg);
  r.trajectories = std::move(outcomes);
  return r;
}

double EscapeResult::fraction_above(double threshold) const {
  if (per_atom_phases.empty()) return 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < per_atom_phases.size(); ++i) {
    if (close_collision[i] || per_atom_phases[i] > threshold) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(per_atom_phases.size());
}

std::vector<std::pair<double, double>> EscapeResult::threshold_curve(double lo, double hi,
                                                                     int points) const {
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i < points; ++i) {
    const double th =
        points == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    curve.emplace_back(th, fraction_above(th));
  }
  return curve;
}

std::optional<double> kinematic_escape_time(const IonEscapeConfig& cfg) {
  const double tau = cfg.ramp_time * kNs;
  const double a_max = si::elementary_charge * cfg.ramp_field_max /
                       (cfg.ion_mass * si::atomic_mass_unit);
  const double target = 0.5 * cfg.trap_diameter * kUm;
  if (!(a_max > 0)) return std::nullopt;
  const double x_tau = a_max * tau * tau / 6.0;
  if (target <= x_tau) return std::cbrt(6.0 * tau * target / a_max) / kNs;
  // Constant force after the ramp: x_tau + v_tau s + a_max s^2 / 2 = target.
  const double v_tau = 0.5 * a_max * tau;
  const double s = (-v_tau + std::sqrt(v_tau * v_tau + 2.0 * a_max * (target - x_tau))) / a_max;
  return (tau + s) / kNs;
}

double ramp_field_phase(const IonEscapeConfig& cfg, double t_ns) {
  const double tau = cfg.ramp_time * kNs;
  const double t = t_ns * kNs;
  const double e2 = cfg.ramp_field_max * cfg.ramp_field_max;
  const double integral = t <= tau ? e2 * t * t * t / (3.0 * tau * tau)
                                   : e2 * tau / 3.0 + e2 * (t - tau);
  return cfg.differential_polarizability / (2.0 * si::hbar) * integral;
}

double ramp_field_phase(const IonEscapeConfig& cfg) {
  const auto t = kinematic_escape_time(cfg);
  return t ? ramp_field_phase(cfg, *t) : ramp_field_phase(cfg, cfg.horizon);
}

}  // namespace superatom
