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


// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "partscreen/partscreen.h"

namespace {

namespace fs = std::filesystem;

std::string take(char* s) {
  std::string out = s ? s : "";
  ps_string_free(s);
  return out;
}

TEST(CApiTest, ConfigLifecycleAndErrors) {
  ps_config* c = nullptr;
  ASSERT_EQ(ps_config_default(&c), PS_OK);
  EXPECT_EQ(ps_config_set(c, "train.lr", "0.01"), PS_OK);
  EXPECT_STREQ(ps_last_error(), "");
  EXPECT_EQ(ps_config_set(c, "train.nope", "1"), PS_ERR_CONFIG);
  EXPECT_NE(std::strstr(ps_last_error(), "train.nope"), nullptr);
  EXPECT_EQ(ps_config_set_branches(c, "ts1"), PS_OK);
  EXPECT_EQ(ps_config_set_branches(c, "bogus"), PS_ERR_CONFIG);
  char* echo = nullptr;
  ASSERT_EQ(ps_config_echo(c, &echo), PS_OK);
  const std::string text = take(echo);
  EXPECT_NE(text.find("lr = 0.01"), std::string::npos);
  EXPECT_NE(text.find("enable_s2 = false"), std::string::npos);
  ps_config* again = nullptr;
  ASSERT_EQ(ps_config_parse(text.c_str(), &again), PS_OK);
  char* echo2 = nullptr;
  ASSERT_EQ(ps_config_echo(again, &echo2), PS_OK);
  EXPECT_EQ(take(echo2), text);
  EXPECT_EQ(ps_config_validate(again), PS_OK);
  ps_config_free(again);
  ps_config_free(c);
  ps_config_free(nullptr);
}

TEST(CApiTest, NullArgumentsAreRejected) {
  EXPECT_EQ(ps_config_default(nullptr), PS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ps_config_set(nullptr, "a", "b"), PS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ps_verify(0, nullptr), PS_ERR_INVALID_ARGUMENT);
  ps_config* c = nullptr;
  EXPECT_EQ(ps_config_load("/nonexistent.cfg", &c), PS_ERR_CONFIG);
  EXPECT_EQ(c, nullptr);
  EXPECT_STRNE(ps_status_name(PS_ERR_NUMERIC), "");
}

TEST(CApiTest, VerifyReportsJson) {
  char* report = nullptr;
  EXPECT_EQ(ps_verify(3, &report), PS_OK);
  const std::string json = take(report);
  EXPECT_NE(json.find("\"passed\": true"), std::string::npos);
}

TEST(CApiTest, TrainEvalAndPredict) {
  const auto root = fs::temp_directory_path() / "partscreen_capi";
  fs::remove_all(root);
  ps_config* c = nullptr;
  ASSERT_EQ(ps_config_parse("[data]\nimage_size = 16\nn_train = 8\nn_test = 4\nn_unseen = 4\n"
                            "[model]\nwidths = 3,4\ntext_dim = 4\natt_dim = 5\n"
                            "[train]\nbatch_size = 8\nepochs = 1\nlr = 1e-3\n",
                            &c),
            PS_OK);
  ASSERT_EQ(ps_config_set(c, "run.out", (root / "run").c_str()), PS_OK);
  char* report = nullptr;
  ASSERT_EQ(ps_gendata(c, (root / "data").c_str(), &report), PS_OK);
  EXPECT_NE(take(report).find("\"digest\""), std::string::npos);

  std::vector<std::string> lines;
  auto sink = [](const char* line, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(line);
  };
  ASSERT_EQ(ps_train(c, 0, sink, &lines, &report), PS_OK) << ps_last_error();
  EXPECT_NE(take(report).find("\"median\""), std::string::npos);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].rfind("seed=0 epoch=1 ", 0), 0u);

  const std::string ckpt = (root / "run" / "seed_0" / "checkpoint.bin").string();
  ASSERT_EQ(ps_eval(ckpt.c_str(), (root / "data").c_str(), &report), PS_OK);
  EXPECT_NE(take(report).find("\"unseen\""), std::string::npos);
  EXPECT_EQ(ps_eval(ckpt.c_str(), "/nonexistent", &report), PS_ERR_IO);

  ps_model* m = nullptr;
  ASSERT_EQ(ps_model_load(ckpt.c_str(), &m), PS_OK);
  size_t channels = 0, tasks = 0;
  ASSERT_EQ(ps_model_shape(m, &channels, &tasks), PS_OK);
  EXPECT_EQ(channels, 1u);
  EXPECT_EQ(tasks, 4u);
  std::vector<double> images(2 * 16 * 16, 0.1), probs(2 * tasks, -1.0);
  ASSERT_EQ(ps_model_predict(m, images.data(), 2, 16, 16, probs.data()), PS_OK);
  for (double p : probs) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_EQ(probs[0], probs[tasks]);
  ps_model_free(m);
  ps_config_free(c);
  fs::remove_all(root);
}

}  // namespace
