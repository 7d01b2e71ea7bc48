#include "superatom/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "superatom/common.hpp"

namespace superatom {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::rabi: return "rabi";
    case Experiment::scan_dc: return "scan-dc";
    case Experiment::scan_oc: return "scan-oc";
    case Experiment::scan_n: return "scan-n";
    case Experiment::lindblad_scan: return "lindblad-scan";
    case Experiment::ion_mc: return "ion-mc";
    case Experiment::jc_demo: return "jc-demo";
  }
  return "?";
}

std::vector<Experiment> all_experiments() {
  return {Experiment::rabi,          Experiment::scan_dc, Experiment::scan_oc, Experiment::scan_n,
          Experiment::lindblad_scan, Experiment::ion_mc,  Experiment::jc_demo};
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (Experiment e : all_experiments()) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

std::string exact_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

enum class Kind { integer, real, boolean, choice, real_list, integer_list };
enum class Range { any, positive, non_negative };

struct KeySpec {
  std::string name;
  Kind kind = Kind::real;
  Range range = Range::any;
  std::optional<ConfigValue> fallback;  // default; empty means required or optional
  bool optional = false;                // may stay absent without a default
  std::vector<std::string> choices;
  long long min_integer = 0;
};

// Pairs of keys of which exactly one is given (or the default applies).
struct ExclusiveGroup {
  std::string first;
  std::string second;
  std::optional<std::pair<std::string, ConfigValue>> fallback;
};

struct Schema {
  std::vector<KeySpec> keys;
  std::vector<ExclusiveGroup> groups;
};

KeySpec real_key(std::string name, Range r, std::optional<double> def = std::nullopt) {
  KeySpec k{std::move(name), Kind::real, r, std::nullopt, false, {}, 0};
  if (def) k.fallback = *def;
  return k;
}

KeySpec optional_real(std::string name, Range r) {
  KeySpec k = real_key(std::move(name), r);
  k.optional = true;
  return k;
}

KeySpec int_key(std::string name, long long min, std::optional<long long> def = std::nullopt) {
  KeySpec k{std::move(name), Kind::integer, Range::any, std::nullopt, false, {}, min};
  if (def) k.fallback = *def;
  return k;
}

KeySpec choice_key(std::string name, std::vector<std::string> choices,
                   std::optional<std::string> def = std::nullopt) {
  KeySpec k{std::move(name), Kind::choice, Range::any, std::nullopt, false, std::move(choices), 0};
  if (def) k.fallback = *def;
  return k;
}

KeySpec bool_key(std::string name, bool def) {
  return {std::move(name), Kind::boolean, Range::any, ConfigValue(def), false, {}, 0};
}

KeySpec list_key(std::string name, Range r) {
  return {std::move(name), Kind::real_list, r, std::nullopt, false, {}, 0};
}

const std::vector<std::string> kModels{"full", "dicke", "restricted6", "effective2", "lindblad"};
const std::vector<std::string> kCoherentModels{"full", "dicke", "restricted6", "effective2"};
const std::vector<std::string> kCalibrations{"auto", "closed_form", "numeric"};
const std::vector<std::string> kStatistics{"endpoint", "plateau", "cycle_averaged"};
const std::vector<std::string> kRates{"gamma_e", "gamma_r", "gamma_d", "gamma_coll"};

std::vector<KeySpec> rate_keys() {
  return {real_key("gamma_e_mhz", Range::non_negative, 0.0),
          real_key("gamma_r_mhz", Range::non_negative, 0.0),
          real_key("gamma_d_mhz", Range::non_negative, 0.0),
          real_key("gamma_coll_mhz", Range::non_negative, 0.0)};
}

ExclusiveGroup probe_group() { return {"omega_p_mhz", "effective_rabi_target_mhz", std::nullopt}; }
ExclusiveGroup detuning_group(std::optional<std::pair<std::string, ConfigValue>> def = {}) {
  return {"delta_c_mhz", "delta_c_over_omega_c", std::move(def)};
}

Schema schema_for(Experiment e) {
  Schema s;
  auto add = [&](std::vector<KeySpec> ks) {
    for (auto& k : ks) s.keys.push_back(std::move(k));
  };
  switch (e) {
    case Experiment::rabi:
      add({int_key("n_atoms", 2), real_key("omega_c_mhz", Range::positive),
           optional_real("omega_p_mhz", Range::positive),
           optional_real("effective_rabi_target_mhz", Range::positive),
           optional_real("delta_c_mhz", Range::any), optional_real("delta_c_over_omega_c", Range::any),
           optional_real("delta_p_mhz", Range::any), optional_real("pulse_time_us", Range::positive),
           choice_key("model", kModels, "dicke"), choice_key("calibration", kCalibrations, "auto"),
           int_key("samples", 2, 401), bool_key("write_trajectory", true)});
      add(rate_keys());
      s.groups = {probe_group(), detuning_group()};
      break;
    case Experiment::scan_dc:
      add({int_key("n_atoms", 2), real_key("omega_c_mhz", Range::positive),
           real_key("effective_rabi_target_mhz", Range::positive),
           list_key("delta_c_ratio_grid", Range::any),
           choice_key("model", kCoherentModels, "dicke"),
           choice_key("calibration", kCalibrations, "auto"),
           choice_key("statistic", kStatistics, "plateau")});
      break;
    case Experiment::scan_oc:
      add({KeySpec{"n_atoms_list", Kind::integer_list, Range::any, std::nullopt, false, {}, 2},
           list_key("omega_c_mhz_grid", Range::positive),
           real_key("effective_rabi_target_mhz", Range::positive),
           real_key("delta_c_over_omega_c", Range::any, -0.5),
           choice_key("model", kCoherentModels, "dicke"),
           choice_key("calibration", kCalibrations, "auto"),
           choice_key("statistic", kStatistics, "plateau")});
      break;
    case Experiment::scan_n:
      add({real_key("mean_atoms", Range::positive), real_key("omega_c_mhz", Range::positive),
           optional_real("omega_p_mhz", Range::positive),
           optional_real("effective_rabi_target_mhz", Range::positive),
           optional_real("delta_c_mhz", Range::any), optional_real("delta_c_over_omega_c", Range::any),
           real_key("window_mass", Range::positive, 1.0 - 1e-6),
           choice_key("model", kCoherentModels, "dicke"),
           choice_key("calibration", kCalibrations, "auto"),
           choice_key("statistic", kStatistics, "plateau")});
      s.groups = {probe_group(), detuning_group()};
      break;
    case Experiment::lindblad_scan:
      add({int_key("n_atoms", 2), real_key("omega_c_mhz", Range::positive),
           optional_real("omega_p_mhz", Range::positive),
           optional_real("effective_rabi_target_mhz", Range::positive),
           optional_real("delta_c_mhz", Range::any), optional_real("delta_c_over_omega_c", Range::any),
           optional_real("delta_p_mhz", Range::any), optional_real("pulse_time_us", Range::positive),
           choice_key("calibration", kCalibrations, "auto"), choice_key("rate", kRates),
           list_key("rate_grid_mhz", Range::non_negative)});
      add(rate_keys());
      s.groups = {probe_group(), detuning_group()};
      break;
    case Experiment::ion_mc:
      add({real_key("ramp_field_max", Range::non_negative, 1e5),
           real_key("ramp_time", Range::positive, 300.0),
           real_key("trap_diameter", Range::positive, 1.0),
           real_key("trap_volume", Range::positive, 1.0), int_key("n_atoms", 1, 100),
           real_key("ion_mass", Range::positive, 88.0),
           real_key("differential_polarizability", Range::non_negative),
           real_key("phase_threshold", Range::positive, 0.01), int_key("n_trajectories", 1, 1000),
           int_key("rng_seed", 0, 1), choice_key("ion_start", {"center", "uniform"}, "center"),
           real_key("softening_radius", Range::positive, 5e-3),
           real_key("time_step", Range::positive, 0.1),
           real_key("phase_cutoff_distance", Range::positive, 20.0),
           real_key("horizon", Range::positive, 3000.0), bool_key("write_phases", false)});
      break;
    case Experiment::jc_demo:
      add({int_key("n_atoms", 1), real_key("omega_p_mhz", Range::non_negative),
           real_key("probe_time_us", Range::non_negative), real_key("omega_c_mhz", Range::positive),
           optional_real("delta_c_mhz", Range::any), optional_real("delta_c_over_omega_c", Range::any),
           real_key("delta_p_mhz", Range::any, 0.0), real_key("coupling_time_us", Range::positive),
           int_key("samples", 2, 3001), bool_key("write_trajectory", true)});
      s.groups = {detuning_group(std::pair<std::string, ConfigValue>{"delta_c_mhz", 0.0})};
      break;
  }
  return s;
}

std::string trim(std::string_view v) {
  const auto b = v.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = v.find_last_not_of(" \t\r");
  return std::string(v.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& key, const std::string& what) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  os << "key '" << key << "': " << what;
  throw ConfigError(os.str());
}

double read_real(const std::string& text, int line, const std::string& key) {
  double v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    fail(line, key, "expected a finite number, got '" + text + "'");
  }
  return v;
}

long long read_integer(const std::string& text, int line, const std::string& key) {
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    fail(line, key, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

void check_range(double v, Range r, int line, const std::string& key) {
  if (r == Range::positive && !(v > 0)) fail(line, key, "must be > 0");
  if (r == Range::non_negative && !(v >= 0)) fail(line, key, "must be >= 0");
}

ConfigValue read_value(const KeySpec& spec, const std::string& text, int line) {
  switch (spec.kind) {
    case Kind::integer: {
      const long long v = read_integer(text, line, spec.name);
      if (v < spec.min_integer) fail(line, spec.name, "must be >= " + std::to_string(spec.min_integer));
      return v;
    }
    case Kind::real: {
      const double v = read_real(text, line, spec.name);
      check_range(v, spec.range, line, spec.name);
      return v;
    }
    case Kind::boolean: {
      if (text == "true" || text == "yes" || text == "1") return true;
      if (text == "false" || text == "no" || text == "0") return false;
      fail(line, spec.name, "expected true or false, got '" + text + "'");
    }
    case Kind::choice: {
      if (std::find(spec.choices.begin(), spec.choices.end(), text) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
        fail(line, spec.name, "expected one of {" + all + "}, got '" + text + "'");
      }
      return text;
    }
    case Kind::real_list: {
      std::vector<double> out;
      if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) fail(line, spec.name, "range must be start:stop:step");
        const double a = read_real(parts[0], line, spec.name);
        const double b = read_real(parts[1], line, spec.name);
        const double step = read_real(parts[2], line, spec.name);
        if (step == 0 || (b - a) / step < 0) fail(line, spec.name, "step does not reach stop");
        const double count = std::floor((b - a) / step + 1e-9) + 1;
        if (count > 1e6) fail(line, spec.name, "range has too many points");
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
          out.push_back(a + static_cast<double>(i) * step);
        }
      } else {
        for (const auto& p : split(text, ',')) out.push_back(read_real(p, line, spec.name));
      }
      if (out.empty()) fail(line, spec.name, "list is empty");
      for (double v : out) check_range(v, spec.range, line, spec.name);
      return out;
    }
    case Kind::integer_list: {
      std::vector<long long> out;
      for (const auto& p : split(text, ',')) {
        const long long v = read_integer(p, line, spec.name);
        if (v < spec.min_integer) {
          fail(line, spec.name, "entries must be >= " + std::to_string(spec.min_integer));
        }
        out.push_back(v);
      }
      if (out.empty()) fail(line, spec.name, "list is empty");
      return out;
    }
  }
  fail(line, spec.name, "unsupported value");
}

}  // namespace

RunConfig parse_config(std::string_view text, std::optional<Experiment> experiment) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> raw;
  std::istringstream is{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("line " + std::to_string(number) + ": bad section");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (raw.contains(key)) fail(number, key, "duplicate key");
    if (value.empty()) fail(number, key, "empty value");
    raw[key] = {value, number};
  }

  RunConfig cfg;
  if (auto it = raw.find("experiment"); it != raw.end()) {
    const auto e = parse_experiment(it->second.value);
    if (!e) fail(it->second.line, "experiment", "unknown experiment '" + it->second.value + "'");
    if (experiment && *experiment != *e) {
      fail(it->second.line, "experiment",
           "file says '" + it->second.value + "' but '" + to_string(*experiment) + "' was requested");
    }
    experiment = e;
    raw.erase(it);
  }
  if (!experiment) {
    std::string all;
    for (Experiment e : all_experiments()) all += (all.empty() ? "" : ", ") + to_string(e);
    throw ConfigError("missing required key 'experiment' (one of " + all + ")");
  }
  cfg.experiment = *experiment;
  const Schema schema = schema_for(cfg.experiment);

  for (const auto& [key, entry] : raw) {
    const auto spec = std::find_if(schema.keys.begin(), schema.keys.end(),
                                   [&](const KeySpec& k) { return k.name == key; });
    if (spec == schema.keys.end()) {
      fail(entry.line, key, "unknown key for experiment " + to_string(cfg.experiment));
    }
    cfg.values[key] = read_value(*spec, entry.value, entry.line);
  }

  std::set<std::string> grouped;
  for (const ExclusiveGroup& g : schema.groups) {
    grouped.insert(g.first);
    grouped.insert(g.second);
    const bool a = cfg.values.contains(g.first);
    const bool b = cfg.values.contains(g.second);
    if (a && b) {
      fail(raw.at(g.second).line, g.second, "conflicts with '" + g.first + "' (give only one)");
    }
    if (!a && !b) {
      if (!g.fallback) continue;  // reported below
      cfg.values[g.fallback->first] = g.fallback->second;
    }
  }

  std::vector<std::string> missing;
  for (const ExclusiveGroup& g : schema.groups) {
    if (!cfg.values.contains(g.first) && !cfg.values.contains(g.second)) {
      missing.push_back(g.first + " | " + g.second);
    }
  }
  for (const KeySpec& k : schema.keys) {
    if (cfg.values.contains(k.name) || grouped.contains(k.name)) continue;
    if (k.fallback) {
      cfg.values[k.name] = *k.fallback;
    } else if (!k.optional) {
      missing.push_back(k.name);
    }
  }
  if (!missing.empty()) {
    std::string all;
    for (const auto& m : missing) all += (all.empty() ? "" : ", ") + m;
    throw ConfigError("missing required key(s) for experiment " + to_string(cfg.experiment) +
                      ": " + all);
  }

  if (cfg.experiment == Experiment::rabi && cfg.text("model") != "lindblad") {
    for (const char* k : {"gamma_e_mhz", "gamma_r_mhz", "gamma_d_mhz", "gamma_coll_mhz"}) {
      if (cfg.real(k) != 0.0) {
        fail(raw.contains(k) ? raw.at(k).line : 0, k, "decoherence rates need model = lindblad");
      }
    }
  }
  return cfg;
}

std::vector<std::string> config_keys(Experiment e) {
  std::vector<std::string> out;
  for (const KeySpec& k : schema_for(e).keys) out.push_back(k.name);
  return out;
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "experiment = " << to_string(cfg.experiment) << "\n";
  for (const std::string& key : config_keys(cfg.experiment)) {
    const auto it = cfg.values.find(key);
    if (it == cfg.values.end()) continue;
    os << key << " = ";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            os << exact_number(v);
          } else if constexpr (std::is_same_v<T, bool>) {
            os << (v ? "true" : "false");
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << exact_number(v[i]);
          } else if constexpr (std::is_same_v<T, std::vector<long long>>) {
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
          } else {
            os << v;
          }
        },
        it->second);
    os << "\n";
  }
  return os.str();
}

namespace {

template <typename T>
const T& get(const RunConfig& cfg, const std::string& key) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) throw ConfigError("key '" + key + "' is not set");
  const T* v = std::get_if<T>(&it->second);
  if (!v) throw ConfigError("key '" + key + "' has a different type");
  return *v;
}

}  // namespace

long long RunConfig::integer(const std::string& key) const { return get<long long>(*this, key); }
double RunConfig::real(const std::string& key) const { return get<double>(*this, key); }
bool RunConfig::flag(const std::string& key) const { return get<bool>(*this, key); }
const std::string& RunConfig::text(const std::string& key) const {
  return get<std::string>(*this, key);
}
const std::vector<double>& RunConfig::reals(const std::string& key) const {
  return get<std::vector<double>>(*this, key);
}
const std::vector<long long>& RunConfig::integers(const std::string& key) const {
  return get<std::vector<long long>>(*this, key);
}
std::optional<double> RunConfig::optional_real(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return real(key);
}

}  // namespace superatom
