#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "superatom/dynamics.hpp"

namespace superatom {

/// %.12g; NaN and empty optionals print as "nan".
std::string format_number(double v);
std::string format_number(const std::optional<double>& v);

/// Value rounded to 12 significant digits (what the files carry).
double round_significant(double v);

/// trajectory.csv: time_us,p_G,p_E,p_R,p_E2,p_ER,p_ryd,infidelity[,p_2plus].
/// The p_2plus column is written when the samples carry a target population.
std::string trajectory_csv(const Trajectory& traj);

using Cell = std::variant<double, std::optional<double>, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string table_csv(const Table& table);

/// Writes `content` to `path`, creating parent directories. Throws Error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace superatom
