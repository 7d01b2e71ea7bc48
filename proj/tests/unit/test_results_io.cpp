#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "superatom/experiments.hpp"
#include "superatom/results_io.hpp"

using namespace superatom;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

const char* kRabi =
    "experiment = rabi\nn_atoms = 3\nomega_c_mhz = 20\neffective_rabi_target_mhz = 0.1\n"
    "delta_c_over_omega_c = -0.5\nsamples = 21\n";

}  // namespace

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1.5e-20), "1.5e-20");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(std::optional<double>{}), "nan");
  EXPECT_EQ(format_number(std::optional<double>{0.25}), "0.25");
  EXPECT_EQ(round_significant(1.0 / 3.0), 0.333333333333);
  EXPECT_TRUE(std::isnan(round_significant(std::nan(""))));
}

TEST(TableCsv, QuotingAndCells) {
  Table t{{"a", "b", "c", "d"}, {}};
  t.rows.push_back({1.5, std::optional<double>{}, 7LL, std::string("ok")});
  t.rows.push_back({0.1, std::optional<double>{2.0}, -3LL, std::string("x, \"y\"")});
  const auto lines = lines_of(table_csv(t));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "a,b,c,d");
  EXPECT_EQ(lines[1], "1.5,nan,7,ok");
  EXPECT_EQ(lines[2], "0.1,2,-3,\"x, \"\"y\"\"\"");
}

TEST(TrajectoryCsv, HeaderAndRows) {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  Observables a;
  a.p_G = 1.0;
  Observables b;
  b.p_G = 0.5;
  b.p_ER = 0.25;
  b.p_rydberg = 0.3;
  b.infidelity = 1.0 / 6.0;
  traj.samples = {a, b};
  traj.norm_or_trace = {1, 1};
  auto lines = lines_of(trajectory_csv(traj));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "time_us,p_G,p_E,p_R,p_E2,p_ER,p_ryd,infidelity");
  EXPECT_EQ(lines[1], "0,1,0,0,0,0,0,nan");
  EXPECT_EQ(lines[2], "0.5,0.5,0,0,0,0.25,0.3,0.166666666667");

  traj.samples[0].p_target = 0.0;
  traj.samples[1].p_target = 0.125;
  lines = lines_of(trajectory_csv(traj));
  EXPECT_EQ(lines[0], "time_us,p_G,p_E,p_R,p_E2,p_ER,p_ryd,infidelity,p_2plus");
  EXPECT_EQ(lines[2], "0.5,0.5,0,0,0,0.25,0.3,0.166666666667,0.125");
}

TEST(RunExperiment, DeterministicOutput) {
  const RunConfig cfg = parse_config(kRabi);
  RunOptions o;
  o.timestamp = "2000-01-01T00:00:00Z";
  const ExperimentOutput a = run_experiment(cfg, o);
  o.workers = 3;
  const ExperimentOutput b = run_experiment(cfg, o);
  EXPECT_EQ(a.files, b.files);
  ASSERT_TRUE(a.files.contains("summary.json"));
  ASSERT_TRUE(a.files.contains("trajectory.csv"));
  EXPECT_EQ(lines_of(a.files.at("trajectory.csv")).size(), 22u);
}

TEST(RunExperiment, SummaryContents) {
  const RunConfig cfg = parse_config(kRabi);
  RunOptions o;
  o.timestamp = "2000-01-01T00:00:00Z";
  const auto j = nlohmann::json::parse(run_experiment(cfg, o).files.at("summary.json"));
  EXPECT_EQ(j["generated_at"], "2000-01-01T00:00:00Z");
  EXPECT_EQ(j["experiment"], "rabi");
  EXPECT_EQ(parse_config(j["config_echo"].get<std::string>()), cfg);
  const auto& r = j["results"];
  EXPECT_EQ(r["resolved"]["calibration"], "closed_form");
  EXPECT_NEAR(r["resolved"]["omega_eff_mhz"].get<double>(), 0.1, 1e-11);
  EXPECT_NEAR(r["resolved"]["angular_rad_per_us"]["omega_eff"].get<double>(), kTwoPi * 0.1, 1e-10);
  EXPECT_NEAR(r["resolved"]["pulse_time_us"].get<double>(), 5.0, 1e-10);
  EXPECT_NEAR(r["success_probability"].get<double>(), 2.0 / 3.0, 0.05);
  EXPECT_TRUE(r["infidelity"].is_number());
}

TEST(RunExperiment, UndefinedInfidelityIsNull) {
  const RunConfig cfg = parse_config(std::string(kRabi) + "pulse_time_us = 1e-7\n");
  const auto out = run_experiment(cfg);
  const auto j = nlohmann::json::parse(out.files.at("summary.json"));
  EXPECT_TRUE(j["results"]["infidelity"].is_null());
  const auto lines = lines_of(out.files.at("trajectory.csv"));
  EXPECT_NE(lines[1].find(",nan"), std::string::npos);
}

TEST(RunExperiment, JcDemoFiles) {
  const RunConfig cfg = parse_config(
      "experiment = jc-demo\nn_atoms = 6\nomega_p_mhz = 1\nprobe_time_us = 0.25\n"
      "omega_c_mhz = 10\ncoupling_time_us = 0.5\nsamples = 51\nwrite_trajectory = false\n");
  const ExperimentOutput out = run_experiment(cfg);
  EXPECT_FALSE(out.files.contains("trajectory.csv"));
  const auto lines = lines_of(out.files.at("distribution.csv"));
  ASSERT_EQ(lines.size(), 8u);
  EXPECT_EQ(lines[0], "j,probability");
}

TEST(EmitResults, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "superatom_results_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  ExperimentOutput out;
  out.files["summary.json"] = "{}\n";
  out.files["scan.csv"] = "a\n1\n";
  emit_results(out, dir);
  std::ifstream in(dir / "scan.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "a\n1\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  std::filesystem::remove_all(dir.parent_path());
  EXPECT_THROW(write_text_file("/proc/definitely/not/here.txt", "x"), Error);
}

TEST(UtcTimestamp, Iso8601) {
  const std::string ts = utc_timestamp();
  ASSERT_EQ(ts.size(), 20u);
  EXPECT_EQ(ts[4], '-');
  EXPECT_EQ(ts[10], 'T');
  EXPECT_EQ(ts.back(), 'Z');
}
