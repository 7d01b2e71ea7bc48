#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "superatom/ion_escape.hpp"
#include "superatom/protocol.hpp"
#include "superatom/run_config.hpp"

namespace superatom {

/// Converts the file units (MHz, us) into a ProtocolConfig (rad/us, us).
ProtocolConfig protocol_config(const RunConfig& cfg);
IonEscapeConfig ion_escape_config(const RunConfig& cfg);
CollapseRevivalConfig collapse_revival_config(const RunConfig& cfg);

struct RunOptions {
  unsigned workers = 0;
  std::string timestamp;  ///< written verbatim into summary.json
};

/// Files of one run keyed by name: summary.json always, plus trajectory.csv,
/// scan.csv, phases.csv or distribution.csv depending on the experiment.
struct ExperimentOutput {
  std::map<std::string, std::string> files;
};

ExperimentOutput run_experiment(const RunConfig& cfg, const RunOptions& options = {});

/// Writes every file into `out_dir` (created when missing).
void emit_results(const ExperimentOutput& output, const std::filesystem::path& out_dir);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace superatom
