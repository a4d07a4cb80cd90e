// Copyright 2026 The jrc_track Authors
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

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "jrc/config_file.hpp"

using jrc::ConfigError;
using jrc::parse_config;

namespace
{

std::string error_of(const std::string & text)
{
  try {
    parse_config(text);
  } catch (const ConfigError & e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseConfig, EmptyGivesDefaults)
{
  const auto cfg = parse_config("");
  const jrc::ScenarioConfig def;
  EXPECT_EQ(cfg.positions, def.positions);
  EXPECT_EQ(cfg.array.n_tx, 64);
  EXPECT_EQ(cfg.array.n_rx, 64);
  EXPECT_EQ(cfg.steps, 20);
  EXPECT_EQ(cfg.trials, 1000);
  EXPECT_DOUBLE_EQ(cfg.slot_s, 0.02);
  EXPECT_DOUBLE_EQ(cfg.array.carrier_hz, 30e9);
  EXPECT_EQ(cfg.xi, jrc::cplx(10.0, 10.0));
}

TEST(ParseConfig, OverridesAndComments)
{
  const auto cfg = parse_config(
    "# antennas\n"
    "n_tx = 128   # both sides\n"
    "\n"
    "  trials=5\n"
    "positions = 50,20; 40,20\n"
    "sigma_theta_deg = 0.1\n"
    "feedback_drop_radar = true\n"
    "seed = 42\n");
  EXPECT_EQ(cfg.array.n_tx, 128);
  EXPECT_EQ(cfg.array.n_rx, 128);
  EXPECT_EQ(cfg.trials, 5);
  ASSERT_EQ(cfg.vehicles(), 2);
  EXPECT_DOUBLE_EQ(cfg.positions[1][0], 40.0);
  EXPECT_NEAR(cfg.process.sigma_theta, jrc::deg_to_rad(0.1), 1e-18);
  EXPECT_TRUE(cfg.feedback_drop_radar);
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(ParseConfig, ExplicitReceiveCount)
{
  const auto cfg = parse_config("n_rx = 8\nn_tx = 32\n");
  EXPECT_EQ(cfg.array.n_tx, 32);
  EXPECT_EQ(cfg.array.n_rx, 8);
}

TEST(ParseConfig, VehicleCountTruncates)
{
  EXPECT_EQ(parse_config("vehicles = 2").vehicles(), 2);
  EXPECT_NE(error_of("vehicles = 9").find("vehicles"), std::string::npos);
}

TEST(ParseConfig, ErrorsNameTheKey)
{
  EXPECT_EQ(error_of("trials = -1").rfind("trials", 0), 0u);
  EXPECT_EQ(error_of("trials = abc").rfind("trials", 0), 0u);
  EXPECT_EQ(error_of("sigma_tau = -3").rfind("sigma_tau", 0), 0u);
  EXPECT_EQ(error_of("speed_min = 30").rfind("speed_min", 0), 0u);
  EXPECT_EQ(error_of("feedback_inflation = 0.5").rfind("feedback_inflation", 0), 0u);
  EXPECT_EQ(error_of("bogus = 1").rfind("bogus: unknown key", 0), 0u);
  EXPECT_EQ(error_of("n_tx 64"), "line 1: expected 'key = value'");
  EXPECT_EQ(error_of("positions = 1;2").rfind("positions", 0), 0u);
  EXPECT_EQ(error_of("steps =").rfind("steps", 0), 0u);
}

TEST(LoadConfig, ReadsFileAndReportsMissing)
{
  const auto path = std::filesystem::temp_directory_path() / "jrc_test_config.cfg";
  {
    std::ofstream out(path);
    out << "steps = 7\n";
  }
  EXPECT_EQ(jrc::load_config(path.string()).steps, 7);
  std::filesystem::remove(path);
  EXPECT_THROW(jrc::load_config(path.string()), ConfigError);
}
