#include "superatom/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace superatom {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("nan");
}

double round_significant(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

std::string trajectory_csv(const Trajectory& traj) {
  const bool target = !traj.samples.empty() && traj.samples.front().p_target.has_value();
  std::ostringstream os;
  os << "time_us,p_G,p_E,p_R,p_E2,p_ER,p_ryd,infidelity";
  if (target) os << ",p_2plus";
  os << "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Observables& o = traj.samples[i];
    os << format_number(traj.times[i]) << ',' << format_number(o.p_G) << ','
       << format_number(o.p_E) << ',' << format_number(o.p_R) << ',' << format_number(o.p_E2)
       << ',' << format_number(o.p_ER) << ',' << format_number(o.p_rydberg) << ','
       << format_number(o.infidelity);
    if (target) os << ',' << format_number(o.p_target);
    os << "\n";
  }
  return os.str();
}

std::string table_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
              const bool quote = v.find_first_of(",\"\n") != std::string::npos;
              if (!quote) {
                os << v;
              } else {
                os << '"';
                for (char c : v) os << (c == '"' ? "\"\"" : std::string(1, c));
                os << '"';
              }
            } else if constexpr (std::is_same_v<T, long long>) {
              os << v;
            } else {
              os << format_number(v);
            }
          },
          row[i]);
    }
    os << "\n";
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error("error while writing " + path.string());
}

}  // namespace superatom
