/*
 * Copyright (c) 2026 The scatter-sbi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "oracles.hpp"
#include "ssbi/config.hpp"
#include "ssbi/error.hpp"

namespace ssbi {
namespace {

std::string message_of(std::string_view text) {
  try {
    RunConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(RunConfig, EmptyTextGivesDeskDefaults) {
  const RunConfig c = RunConfig::parse("");
  EXPECT_EQ(c.geometry.n_pixels_z, 256u);
  EXPECT_EQ(c.geometry.n_pixels_y, 128u);
  EXPECT_EQ(c.signal.signal_length(c.geometry.n_pixels_z), 90u);
  EXPECT_EQ(c.prior.dimension(), 18u);
  EXPECT_EQ(c.flow.epochs, 100u);
  EXPECT_EQ(c.cvae.epochs, 30u);
  EXPECT_EQ(c.split.test_count, 1000u);
  EXPECT_FALSE(c.noise);
}

TEST(RunConfig, ParsesSections) {
  const RunConfig c = RunConfig::parse(R"(
# comment line
[sample]
layers = 2
range.layer0.thickness = 2, 4
fixed = layer1.roughness=0.3

[training]
flow_epochs = 7      # trailing comment
learning_rate = 0.0005
widths = 4, 8, 16

[abc]
acceptance_rate = 0.01
bandwidths = 0.1, 0.2

[io]
seed = 42
)");
  EXPECT_EQ(c.prior.layers.size(), 2u);
  EXPECT_EQ(c.prior.dimension(), 11u);
  EXPECT_EQ(c.prior.layers[0].ranges[2].lo, 2.0);
  EXPECT_EQ(c.prior.layers[0].ranges[2].hi, 4.0);
  EXPECT_EQ(c.prior.fixed.at("layer1.roughness"), 0.3);
  EXPECT_EQ(c.flow.epochs, 7u);
  EXPECT_EQ(c.flow.optimizer.lr, 0.0005);
  EXPECT_EQ(c.cvae.optimizer.lr, 0.0005);
  EXPECT_EQ(c.model.widths, (std::vector<int>{4, 8, 16}));
  EXPECT_EQ(c.abc.acceptance_rate, 0.01);
  EXPECT_EQ(c.abc.bandwidths.size(), 2u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.generation(5, 2).n, 5u);
  EXPECT_EQ(c.generation(5, 2).seed, 42u);
}

TEST(RunConfig, BeamlinePreset) {
  const RunConfig c = RunConfig::parse("[geometry]\npreset = beamline\n[signal]\npreset = beamline\n");
  EXPECT_EQ(c.signal.signal_length(c.geometry.n_pixels_z), 359u);
}

TEST(RunConfig, ErrorsNameTheLine) {
  EXPECT_NE(message_of("[training]\n\nbogus = 1\n").find("line 3"), std::string::npos);
  EXPECT_NE(message_of("[training]\nbogus = 1\n").find("unknown key"), std::string::npos);
  EXPECT_NE(message_of("[nowhere]\nx = 1\n").find("unknown section"), std::string::npos);
  EXPECT_NE(message_of("[training]\nflow_epochs = seven\n").find("line 2"), std::string::npos);
  EXPECT_NE(message_of("x = 1\n").find("outside a section"), std::string::npos);
  EXPECT_NE(message_of("[training\n").find("line 1"), std::string::npos);
  EXPECT_NE(message_of("[training]\nflow_epochs\n").find("key = value"), std::string::npos);
  EXPECT_NE(message_of("[sample]\nrange.layer0.thickness = 4, 2\n").find("lo < hi"), std::string::npos);
  EXPECT_NE(message_of("[sample]\nrange.layer9.thickness = 1, 2\n").find("unknown parameter"), std::string::npos);
  EXPECT_NE(message_of("[signal]\nbackground = /no/such/file.csv\n").find("file not found"), std::string::npos);
  EXPECT_FALSE(message_of("[training]\ndecay_factor = 1.5\n").empty());
  EXPECT_FALSE(message_of("[abc]\nacceptance_rate = 0\n").empty());
}

TEST(RunConfig, LoadResolvesRelativePaths) {
  testing::ScratchDir dir("config");
  {
    std::ofstream bg(dir.path() / "bg.csv");
    bg << "0 1.0\n1 1.0\n";
    std::ofstream cfg(dir.path() / "run.cfg");
    cfg << "[signal]\nbackground = bg.csv\n";
  }
  const RunConfig c = RunConfig::load(dir.path() / "run.cfg");
  ASSERT_TRUE(c.background.has_value());
  EXPECT_EQ(*c.background, dir.path() / "bg.csv");
  EXPECT_THROW(RunConfig::load(dir.path() / "missing.cfg"), ConfigError);
}

}  // namespace
}  // namespace ssbi
