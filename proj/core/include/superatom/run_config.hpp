#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace superatom {

enum class Experiment { rabi, scan_dc, scan_oc, scan_n, lindblad_scan, ion_mc, jc_demo };
std::string to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);
std::vector<Experiment> all_experiments();

using ConfigValue =
    std::variant<long long, double, bool, std::string, std::vector<double>, std::vector<long long>>;

/// Parsed run description. Values keep the file's units (MHz, us, ns for
/// ion-mc); every default is applied, so `values` is the fully resolved set.
struct RunConfig {
  Experiment experiment = Experiment::rabi;
  std::map<std::string, ConfigValue> values;

  bool has(const std::string& key) const { return values.contains(key); }
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const std::vector<double>& reals(const std::string& key) const;
  const std::vector<long long>& integers(const std::string& key) const;
  std::optional<double> optional_real(const std::string& key) const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines; `#` and `;` start comments, `[section]` headers
/// are accepted and ignored. Lists are comma separated or `start:stop:step`.
/// `experiment` may come from the file, the caller, or both (they must agree).
/// Throws ConfigError naming the key and line for unknown keys, bad values,
/// range violations, conflicts and missing required keys.
RunConfig parse_config(std::string_view text, std::optional<Experiment> experiment = std::nullopt);

/// Config text that parse_config maps back to an identical RunConfig.
std::string echo_config(const RunConfig& cfg);

/// Keys accepted for an experiment, in echo order.
std::vector<std::string> config_keys(Experiment e);

/// Shortest decimal text that reads back to exactly `v`.
std::string exact_number(double v);

}  // namespace superatom
