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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "seqmeas/calibration.h"
#include "seqmeas/errors.h"
#include "seqmeas/reconstruction.h"

namespace seqmeas {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kMaxThetaDeg = 22.5;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ValidationError("invalid number '" + t + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError("invalid integer '" + t + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_named_label(const std::string& s) {
  return s == "H" || s == "V" || s == "P" || s == "M" || s == "R" || s == "L";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  return in;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<CountRecord> load_counts(const fs::path& path) {
  auto in = open_input(path);
  return read_counts_csv(in);
}

json skipped_json(const std::vector<SkippedSetting>& skipped) {
  json out = json::array();
  for (const auto& s : skipped) {
    out.push_back({{"theta_deg", rad_to_deg(s.theta)}, {"reason", s.reason}});
  }
  return out;
}

json aggregate_json(const ConsistencyReport& report) {
  return {{"s_pm", report.stokes[1].mean},
          {"s_hv", report.stokes[0].mean},
          {"im_correlation", report.stokes[2].mean},
          {"sigma_s_pm", report.stokes[1].sigma_mean},
          {"sigma_s_hv", report.stokes[0].sigma_mean},
          {"sigma_im_correlation", report.stokes[2].sigma_mean}};
}

json stokes_json(const PolarizationState& s) {
  return {{"x", s.x()}, {"y", s.y()}, {"z", s.z()}, {"norm", s.norm()}};
}

json series_json(const ReconstructionSeries& series, bool report_physical) {
  json j;
  j["results"] = series.results;
  j["skipped"] = skipped_json(series.skipped);
  if (series.results.size() >= 2) {
    const ConsistencyReport report = consistency_across_strengths(series.results);
    j["consistency"] = report;
    j["aggregate"] = aggregate_json(report);
    if (report_physical) {
      const auto mean = PolarizationState::unconstrained(
          report.stokes[0].mean, report.stokes[1].mean, report.stokes[2].mean);
      j["nearest_physical"] = stokes_json(nearest_physical_state(mean));
    }
  }
  return j;
}

// theta_deg,<value>,<sigma>,<fit>
std::string calibration_figure(const CalibrationResult& cal, const char* name,
                               double CalibrationEstimate::*value,
                               double CalibrationEstimate::*sigma, auto&& fit) {
  std::ostringstream out;
  out << "theta_deg," << name << ",sigma_" << name << ",fit\n";
  for (const CalibrationEstimate& p : cal.points) {
    out << format_theta_deg(p.theta) << ',' << fmt(p.*value) << ',' << fmt(p.*sigma) << ','
        << fmt(fit(p.theta)) << '\n';
  }
  return out.str();
}

std::string dirac_figure(const ReconstructionSeries& series, bool imaginary) {
  std::ostringstream out;
  out << "theta_deg";
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const std::string key(outcome_key(i));
    out << ',' << (imaginary ? "im_" : "re_") << key << ",sigma_" << key;
  }
  out << '\n';
  for (const ReconstructionResult& r : series.results) {
    out << format_theta_deg(r.theta);
    for (std::size_t i = 0; i < kNumOutcomes; ++i) {
      out << ',' << fmt(imaginary ? r.dirac[i].imag() : r.dirac[i].real()) << ','
          << fmt(imaginary ? r.sigma.im[i] : r.sigma.re[i]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

void PipelineConfig::validate() const {
  profile.validate();
  if (theta_grid_deg.empty()) throw ValidationError("theta grid is empty");
  for (double t : theta_grid_deg) {
    if (!(t >= 0.0 && t <= kMaxThetaDeg)) {
      throw ValidationError("theta grid value " + fmt(t) + " outside [0, 22.5] degrees");
    }
  }
  if (photons_per_setting < 1) throw ValidationError("photons_per_setting must be >= 1");
  (void)state();
}

PolarizationState PipelineConfig::state() const {
  const std::string s = trim(input_state);
  if (is_named_label(s)) return named_state(s);
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(to_double(item));
  if (parts.size() != 3) {
    throw ValidationError("input_state must be a label or a Stokes triple x,y,z");
  }
  return PolarizationState::from_stokes(parts[0], parts[1], parts[2]);
}

std::string PipelineConfig::state_label() const {
  const std::string s = trim(input_state);
  return is_named_label(s) ? s : "custom";
}

RunPlan PipelineConfig::plan() const {
  RunPlan plan;
  for (double t : theta_grid_deg) plan.theta_grid.push_back(std::min(deg_to_rad(t), kMaxTheta));
  plan.photons_per_setting = photons_per_setting;
  plan.seed = seed;
  plan.profile = profile;
  return plan;
}

PipelineConfig default_config() {
  PipelineConfig c;
  for (double t : default_theta_grid()) c.theta_grid_deg.push_back(rad_to_deg(t));
  c.input_state = "0.8," + fmt_exact(std::sqrt(0.11)) + ",0.5";
  return c;
}

std::vector<double> parse_theta_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(to_double(item));
  if (grid.empty()) throw ValidationError("theta grid is empty");
  return grid;
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "visibility") {
        base.profile.visibility = to_double(value);
      } else if (key == "phi_effective_deg") {
        base.profile.phi_effective = deg_to_rad(to_double(value));
      } else if (key == "angle_scale") {
        base.profile.angle_scale = to_double(value);
      } else if (key == "theta_grid_deg") {
        base.theta_grid_deg = parse_theta_grid(value);
      } else if (key == "photons_per_setting") {
        base.photons_per_setting = to_uint(value);
      } else if (key == "seed") {
        base.seed = to_uint(value);
      } else if (key == "input_state") {
        base.input_state = value;
      } else if (key == "output_dir") {
        base.output_dir = value;
      } else {
        throw ParseError(line_no, "unknown key '" + key + "'");
      }
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return base;
}

std::string format_config(const PipelineConfig& config) {
  std::ostringstream out;
  out << "visibility = " << fmt_exact(config.profile.visibility) << '\n';
  out << "phi_effective_deg = " << fmt(rad_to_deg(config.profile.phi_effective)) << '\n';
  out << "angle_scale = " << fmt_exact(config.profile.angle_scale) << '\n';
  out << "theta_grid_deg = ";
  for (std::size_t i = 0; i < config.theta_grid_deg.size(); ++i) {
    out << (i ? "," : "") << fmt(config.theta_grid_deg[i]);
  }
  out << '\n';
  out << "photons_per_setting = " << config.photons_per_setting << '\n';
  out << "seed = " << config.seed << '\n';
  out << "input_state = " << config.input_state << '\n';
  out << "output_dir = " << config.output_dir.string() << '\n';
  return out.str();
}

void cmd_simulate(const PipelineConfig& config) {
  config.validate();
  const RunPlan plan = config.plan();
  const auto calibration = simulate_calibration_suite(plan);
  const auto experiment = simulate_experiment(config.state(), plan, config.state_label());
  ensure_dir(config.output_dir);
  std::ostringstream cal_csv;
  write_counts_csv(cal_csv, calibration);
  write_text(config.output_dir / "calibration.csv", cal_csv.str());
  std::ostringstream exp_csv;
  write_counts_csv(exp_csv, experiment);
  write_text(config.output_dir / "experiment.csv", exp_csv.str());
}

void cmd_calibrate(const fs::path& counts_csv, const fs::path& out_dir) {
  const auto records = load_counts(counts_csv);
  const CalibrationResult result = calibrate(records);
  ensure_dir(out_dir);
  write_json(out_dir / "calibration.json", result);
}

void cmd_reconstruct(const fs::path& counts_csv, const fs::path& calibration_json,
                     const fs::path& out_dir, std::ostream& warnings, bool report_physical) {
  const auto records = load_counts(counts_csv);
  CalibrationResult calibration;
  {
    auto in = open_input(calibration_json);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(0, std::string("calibration JSON: ") + e.what());
    }
    calibration = j.get<CalibrationResult>();
  }
  const ReconstructionSeries series = reconstruct_series(records, calibration);
  for (const auto& s : series.skipped) {
    warnings << "warning: skipping theta_deg=" << format_theta_deg(s.theta)
             << ": ill-conditioned: " << s.reason << '\n';
  }
  ensure_dir(out_dir);
  write_json(out_dir / "reconstruction.json", series_json(series, report_physical));
}

void cmd_reproduce_paper(const PipelineConfig& base) {
  PipelineConfig config = base;
  const PipelineConfig ref = default_config();
  config.profile = ref.profile;
  config.input_state = ref.input_state;
  config.validate();

  const RunPlan plan = config.plan();
  const auto calibration_records = simulate_calibration_suite(plan);
  const auto experiment = simulate_experiment(config.state(), plan, config.state_label());
  const CalibrationResult cal = calibrate(calibration_records);
  const ReconstructionSeries series = reconstruct_series(experiment, cal);

  ensure_dir(config.output_dir);
  const CalibrationCurve& c = cal.curve;
  write_text(config.output_dir / "fig2.csv",
             calibration_figure(cal, "epsilon", &CalibrationEstimate::epsilon_hat,
                                &CalibrationEstimate::sigma_epsilon,
                                [&](double t) { return c.v_epsilon * std::sin(4.0 * t); }));
  write_text(config.output_dir / "fig3.csv",
             calibration_figure(cal, "tau", &CalibrationEstimate::tau_hat,
                                &CalibrationEstimate::sigma_tau,
                                [&](double t) { return std::cos(4.0 * c.angle_scale * t); }));
  write_text(config.output_dir / "fig4.csv",
             calibration_figure(cal, "nu", &CalibrationEstimate::nu_hat,
                                &CalibrationEstimate::sigma_nu,
                                [&](double t) { return -c.v_nu * std::sin(4.0 * t); }));

  std::ostringstream fig5;
  fig5 << "theta_deg,P_PH,P_PV,P_MH,P_MV\n";
  for (const CountRecord& r : experiment) {
    const JointFrequency f = JointFrequency::from_record(r);
    fig5 << format_theta_deg(r.theta);
    for (double p : f.p_exp) fig5 << ',' << fmt(p);
    fig5 << '\n';
  }
  write_text(config.output_dir / "fig5.csv", fig5.str());
  write_text(config.output_dir / "fig6a.csv", dirac_figure(series, false));
  write_text(config.output_dir / "fig6b.csv", dirac_figure(series, true));

  json summary;
  summary["calibration"] = {{"v_epsilon", c.v_epsilon},
                            {"sigma_v_epsilon", c.sigma_v_epsilon},
                            {"v_nu", c.v_nu},
                            {"sigma_v_nu", c.sigma_v_nu},
                            {"visibility", c.visibility},
                            {"phi_effective_deg", rad_to_deg(c.phi_effective)},
                            {"k", c.angle_scale},
                            {"sigma_k", c.sigma_angle_scale},
                            {"tau_zero", c.tau_zero},
                            {"sigma_tau_zero", c.sigma_tau_zero}};
  const PolarizationState planted = config.state();
  summary["planted_state"] = stokes_json(planted);
  summary["run"] = {{"seed", config.seed},
                    {"photons_per_setting", config.photons_per_setting},
                    {"theta_grid_deg", config.theta_grid_deg}};
  summary["skipped"] = skipped_json(series.skipped);
  if (series.results.size() >= 2) {
    const ConsistencyReport report = consistency_across_strengths(series.results);
    summary["aggregate"] = aggregate_json(report);
    summary["consistency"] = {{"max_reduced_chi_square", report.max_reduced_chi_square()},
                              {"flagged", report.flagged}};
  }
  write_json(config.output_dir / "summary.json", summary);
}

}  // namespace seqmeas
