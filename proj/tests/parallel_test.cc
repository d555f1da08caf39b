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

#include <omp.h>

#include <cmath>

#include "gtest/gtest.h"
#include "seqmeas/calibration.h"
#include "seqmeas/reconstruction.h"
#include "seqmeas/simulator.h"

namespace seqmeas {
namespace {

// The parallel kernels must reproduce their serial references bit for bit
// for any thread count.
class ParallelTest : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

  static RunPlan plan() {
    RunPlan p;
    p.theta_grid = default_theta_grid();
    p.photons_per_setting = 100'000;
    p.seed = 4242;
    p.profile = ApparatusProfile::reference();
    return p;
  }

 private:
  int saved_ = 1;
};

TEST_P(ParallelTest, CalibrationSuite) {
  EXPECT_EQ(simulate_calibration_suite(plan()), serial::simulate_calibration_suite(plan()));
}

TEST_P(ParallelTest, Experiment) {
  const PolarizationState s = PolarizationState::from_stokes(0.8, std::sqrt(0.11), 0.5);
  EXPECT_EQ(simulate_experiment(s, plan(), "custom"),
            serial::simulate_experiment(s, plan(), "custom"));
}

TEST_P(ParallelTest, Bootstrap) {
  const ErrorParameters e{0.3, 0.6, -0.5};
  const JointFrequency f = JointFrequency::from_probability(
      forward_probabilities(dirac_from_state(named_state("P")), e), 50'000, 0.2);
  const ErrorSigmas se{0.003, 0.004, 0.003};
  const auto a = bootstrap_uncertainty(f, e, se, 2000, 17);
  const auto b = serial::bootstrap_uncertainty(f, e, se, 2000, 17);
  EXPECT_EQ(a.re, b.re);
  EXPECT_EQ(a.im, b.im);
  EXPECT_EQ(a.stokes, b.stokes);
}

TEST_P(ParallelTest, ReconstructSeries) {
  const CalibrationResult cal = calibrate(simulate_calibration_suite(plan()));
  const auto records = simulate_experiment(named_state("R"), plan(), "R");
  const ReconstructionSeries a = reconstruct_series(records, cal);
  const ReconstructionSeries b = serial::reconstruct_series(records, cal);
  ASSERT_EQ(a.results.size(), b.results.size());
  ASSERT_EQ(a.skipped.size(), b.skipped.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].theta, b.results[i].theta);
    EXPECT_EQ(a.results[i].dirac.values(), b.results[i].dirac.values());
    EXPECT_EQ(a.results[i].sigma.stokes, b.results[i].sigma.stokes);
  }
}

INSTANTIATE_TEST_SUITE_P(Threads, ParallelTest, ::testing::Values(1, 2, 4));

}  // namespace
}  // namespace seqmeas
