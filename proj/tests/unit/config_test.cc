// Copyright 2026 The partscreen Authors. All Rights Reserved.
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


#include <gtest/gtest.h>

#include <sstream>

#include "app/config.hpp"
#include "common/error.hpp"

namespace partscreen::app {
namespace {

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.cfg");
}

ErrorCode code_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

TEST(ConfigTest, DefaultsMatchSpecifiedHyperparameters) {
  const RunConfig c;
  EXPECT_EQ(c.train.tau, 0.95);
  EXPECT_EQ(c.train.r, 0.2);
  EXPECT_EQ(c.train.p, 0.2);
  EXPECT_EQ(c.train.weights.lambda1, 0.6);
  EXPECT_EQ(c.train.weights.lambda2, 0.05);
  EXPECT_EQ(c.train.weights.lambda3, 1.0);
  EXPECT_EQ(c.train.batch_size, 16u);
  EXPECT_EQ(c.train.lr, 1e-5);
  EXPECT_EQ(c.train.weight_decay, 5e-4);
  EXPECT_EQ(c.train.lr_decay, 0.1);
  EXPECT_EQ(c.train.lr_step, 10u);
  EXPECT_EQ(c.train.epochs, 20u);
  EXPECT_EQ(c.train.warmup_epochs, 0u);
  EXPECT_NO_THROW(validate(c));
}

TEST(ConfigTest, SectionsAndDottedKeysBothParse) {
  const auto a = parse("[train]\nlr = 0.003  # desk rate\nepochs=5\n[data]\ntasks = 4\n");
  const auto b = parse("train.lr = 3e-3\ntrain.epochs = 5\ndata.tasks = 4\n");
  EXPECT_EQ(a.train.lr, 0.003);
  EXPECT_EQ(a.train.epochs, 5u);
  EXPECT_EQ(echo(a), echo(b));
}

TEST(ConfigTest, RejectsUnknownDuplicateAndMalformedInput) {
  EXPECT_EQ(code_of("train.learning_rate = 1\n"), ErrorCode::kConfig);
  EXPECT_EQ(code_of("[train]\nlr = 1\nlr = 2\n"), ErrorCode::kConfig);
  EXPECT_EQ(code_of("[optim]\nlr = 1\n"), ErrorCode::kConfig);
  EXPECT_EQ(code_of("[train]\ntrain.lr = 1\n"), ErrorCode::kConfig);
  EXPECT_EQ(code_of("train.lr\n"), ErrorCode::kConfig);
  EXPECT_EQ(code_of("train.epochs = many\n"), ErrorCode::kConfig);
  EXPECT_EQ(code_of("train.flip = maybe\n"), ErrorCode::kConfig);
}

TEST(ConfigTest, ErrorsNameFileAndLine) {
  try {
    parse("# header\n\ntrain.bogus = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("test.cfg:3"), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, EchoRoundTripsEveryField) {
  auto c = parse(
      "data.label_map = 0,1;1,2;2,3;3,0\ndata.noise_sigma = 0.1\n"
      "model.widths = 4,8\ntrain.mmd_bandwidth = 1.25\ntrain.lr = 0.1\n"
      "run.seeds = 1,2,3\nrun.out = somewhere\n");
  const auto again = parse(echo(c));
  EXPECT_EQ(echo(again), echo(c));
  EXPECT_EQ(again.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(again.model.widths, (std::vector<std::size_t>{4, 8}));
  ASSERT_TRUE(again.train.mmd_bandwidth.has_value());
  EXPECT_EQ(*again.train.mmd_bandwidth, 1.25);
  EXPECT_FALSE(parse("train.mmd_bandwidth = median\n").train.mmd_bandwidth.has_value());
}

TEST(ConfigTest, EveryKeyAppearsInEcho) {
  const std::string e = echo(RunConfig{});
  for (const auto& key : config_keys()) {
    const auto dot = key.find('.');
    EXPECT_NE(e.find("[" + key.substr(0, dot) + "]"), std::string::npos);
    EXPECT_NE(e.find("\n" + key.substr(dot + 1) + " = "), std::string::npos) << key;
  }
}

TEST(ConfigTest, BranchPresets) {
  RunConfig c;
  for (const char* name : {"teacher", "ts1", "ts2", "full"}) {
    apply_branches(c, parse_branches(name));
    EXPECT_EQ(branches_name(branches_of(c.train)), name);
  }
  apply_branches(c, Branches::kTeacher);
  EXPECT_FALSE(c.train.enable_s1 || c.train.enable_s2 || c.train.enable_adversarial);
  apply_branches(c, Branches::kTs2);
  EXPECT_TRUE(c.train.enable_s2 && c.train.enable_adversarial && !c.train.enable_s1);
  EXPECT_THROW(parse_branches("student"), Error);
}

TEST(ConfigTest, ValidateRejectsUnbalancedBatchAndTinyFeatureMaps) {
  auto c = parse("train.batch_size = 10\n");
  EXPECT_THROW(validate(c), Error);
  c = parse("data.image_size = 16\n");
  EXPECT_THROW(validate(c), Error);
  c = parse("data.label_map = 0,1;1,2;0,2;1\n");
  EXPECT_THROW(validate(c), Error);
}

TEST(ConfigTest, HashIgnoresOutputSeedsAndEpochCount) {
  const auto a = parse("run.out = a\nrun.seeds = 1\ntrain.epochs = 3\n");
  const auto b = parse("run.out = b\nrun.seeds = 2,3\ntrain.epochs = 9\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(parse("train.lr = 1e-4\n")));
}

}  // namespace
}  // namespace partscreen::app
