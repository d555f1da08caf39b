// Copyright 2026 The seqmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqmeas/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"
#include "seqmeas/errors.h"

namespace seqmeas {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("seqmeas_pipeline_" + name)) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig c = default_config();
  c.photons_per_setting = 200'000;
  c.output_dir = out;
  return c;
}

TEST(ConfigTest, Defaults) {
  const PipelineConfig c = default_config();
  EXPECT_EQ(c.theta_grid_deg.size(), 10u);
  EXPECT_DOUBLE_EQ(c.theta_grid_deg.front(), 0.0);
  EXPECT_DOUBLE_EQ(c.theta_grid_deg.back(), 22.5);
  EXPECT_EQ(c.photons_per_setting, 1'000'000u);
  EXPECT_NEAR(c.state().norm(), 1.0, 1e-12);
  EXPECT_EQ(c.state_label(), "custom");
  EXPECT_NO_THROW(c.validate());
}

TEST(ConfigTest, ParseOverridesAndFormatRoundTrips) {
  std::istringstream in(
      "# comment\n"
      "visibility = 0.9\n"
      "\n"
      "theta_grid_deg = 5, 10,20\n"
      "seed = 7   # trailing\n"
      "input_state = R\n");
  const PipelineConfig c = parse_config(in);
  EXPECT_DOUBLE_EQ(c.profile.visibility, 0.9);
  EXPECT_EQ(c.theta_grid_deg, (std::vector<double>{5, 10, 20}));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.state_label(), "R");
  EXPECT_NEAR(c.profile.angle_scale, 0.977, 1e-15);

  std::istringstream again(format_config(c));
  const PipelineConfig d = parse_config(again, PipelineConfig{});
  EXPECT_EQ(format_config(d), format_config(c));
  EXPECT_DOUBLE_EQ(d.profile.visibility, c.profile.visibility);
  EXPECT_NEAR(d.profile.phi_effective, c.profile.phi_effective, 1e-12);
}

TEST(ConfigTest, ParseErrorsCarryLineNumber) {
  const std::vector<std::pair<std::string, int>> cases = {
      {"seed = 1\nbogus = 2\n", 2},
      {"\n\nvisibility\n", 3},
      {"photons_per_setting = -5\n", 1},
      {"theta_grid_deg = 1,x\n", 1},
  };
  for (const auto& [text, line] : cases) {
    std::istringstream in(text);
    try {
      parse_config(in);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(ConfigTest, ValidationRejectsOutOfRangeValues) {
  PipelineConfig c = default_config();
  c.theta_grid_deg = {30.0};
  EXPECT_THROW(c.validate(), ValidationError);
  c = default_config();
  c.input_state = "1,1,1";
  EXPECT_THROW(c.validate(), ValidationError);
  c = default_config();
  c.profile.visibility = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(SimulateTest, WritesBothFilesDeterministically) {
  TempDir dir("simulate");
  const PipelineConfig c = small_config(dir.path());
  cmd_simulate(c);
  const std::string cal = slurp(dir.path() / "calibration.csv");
  const std::string exp = slurp(dir.path() / "experiment.csv");
  EXPECT_EQ(count_lines(cal), 31);
  EXPECT_EQ(count_lines(exp), 11);
  cmd_simulate(c);
  EXPECT_EQ(slurp(dir.path() / "calibration.csv"), cal);
  EXPECT_EQ(slurp(dir.path() / "experiment.csv"), exp);
}

TEST(CalibrateCmdTest, IdealApparatus) {
  TempDir dir("calibrate_ideal");
  PipelineConfig c = small_config(dir.path());
  c.profile = ApparatusProfile::ideal();
  cmd_simulate(c);
  cmd_calibrate(dir.path() / "calibration.csv", dir.path());
  const auto j = nlohmann::json::parse(slurp(dir.path() / "calibration.json"));
  EXPECT_NEAR(j.at("visibility").get<double>(), 1.0, 0.01);
  EXPECT_NEAR(j.at("phi_effective_deg").get<double>(), 45.0, 1.0);
}

TEST(CalibrateCmdTest, MissingInputAndMissingFile) {
  TempDir dir("calibrate_missing");
  cmd_simulate(small_config(dir.path()));
  std::istringstream in(slurp(dir.path() / "calibration.csv"));
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find(",R,") == std::string::npos) kept += line + "\n";
  }
  std::ofstream(dir.path() / "no_r.csv") << kept;
  EXPECT_THROW(cmd_calibrate(dir.path() / "no_r.csv", dir.path()), UsageError);
  EXPECT_THROW(cmd_calibrate(dir.path() / "absent.csv", dir.path()), IoError);
}

TEST(ReconstructCmdTest, SkipsZeroStrengthWithWarning) {
  TempDir dir("reconstruct");
  cmd_simulate(small_config(dir.path()));
  cmd_calibrate(dir.path() / "calibration.csv", dir.path());
  std::ostringstream warnings;
  cmd_reconstruct(dir.path() / "experiment.csv", dir.path() / "calibration.json", dir.path(),
                  warnings, true);
  EXPECT_NE(warnings.str().find("warning: skipping theta_deg=0"), std::string::npos);
  EXPECT_EQ(count_lines(warnings.str()), 1);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "reconstruction.json"));
  EXPECT_EQ(j.at("results").size(), 9u);
  EXPECT_EQ(j.at("skipped").size(), 1u);
  EXPECT_TRUE(j.contains("consistency"));
  EXPECT_TRUE(j.contains("nearest_physical"));
  EXPECT_NEAR(j.at("aggregate").at("s_hv").get<double>(), 0.8, 0.02);
}

TEST(ReconstructCmdTest, BadCalibrationJson) {
  TempDir dir("reconstruct_bad");
  cmd_simulate(small_config(dir.path()));
  std::ofstream(dir.path() / "cal.json") << "{not json";
  std::ostringstream warnings;
  EXPECT_THROW(cmd_reconstruct(dir.path() / "experiment.csv", dir.path() / "cal.json",
                               dir.path(), warnings),
               ParseError);
}

TEST(ReproduceTest, WritesFiguresAndSummary) {
  TempDir dir("reproduce");
  PipelineConfig c = small_config(dir.path());
  c.input_state = "H";  // forced back to the planted state
  c.profile = ApparatusProfile::ideal();
  cmd_reproduce_paper(c);
  for (const char* f : {"fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv", "fig6a.csv", "fig6b.csv",
                        "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_EQ(count_lines(slurp(dir.path() / "fig2.csv")), 11);
  EXPECT_EQ(count_lines(slurp(dir.path() / "fig5.csv")), 11);
  EXPECT_EQ(count_lines(slurp(dir.path() / "fig6a.csv")), 10);
  const auto s = nlohmann::json::parse(slurp(dir.path() / "summary.json"));
  EXPECT_NEAR(s.at("planted_state").at("x").get<double>(), 0.8, 1e-12);
  EXPECT_NEAR(s.at("calibration").at("visibility").get<double>(), 0.824, 0.02);
  EXPECT_NEAR(s.at("aggregate").at("im_correlation").get<double>(), 0.5, 0.05);
}

}  // namespace
}  // namespace seqmeas
