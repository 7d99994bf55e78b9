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


#ifndef PARTSCREEN_APP_COMMANDS_HPP_
#define PARTSCREEN_APP_COMMANDS_HPP_

#include <functional>
#include <memory>
#include <string>

#include "json.hpp"

#include "app/config.hpp"
#include "data/dataset.hpp"
#include "decouple/decouple.hpp"
#include "train/trainer.hpp"

// Operational commands. Each one is deterministic given its configuration;
// reports carry no timestamps or timings so repeated runs compare equal.
namespace partscreen::app {

using Json = nlohmann::json;
using LogSink = std::function<void(const std::string&)>;

// Generated from data.* or loaded from data.dir.
data::GeneratedData obtain_data(const RunConfig& config);
decouple::DiseaseEmbeddings obtain_embeddings(const RunConfig& config);

Json to_json(const train::EvalReport& report);

// Writes the dump plus config.cfg into out_dir; returns {dir, digest, ...}.
Json cmd_gendata(const RunConfig& config, const std::string& out_dir);

struct TrainOptions {
  bool resume = false;  // continue from <out>/seed_<s>/checkpoint.bin when present
  LogSink log;          // receives every training-log line as well
};

// Trains one model per seed into <out>/seed_<s>/ (checkpoint.bin, train.log,
// report.json), writes <out>/config.cfg and <out>/report.json (per-seed
// final metrics and their medians) and returns the latter.
Json cmd_train(const RunConfig& config, const TrainOptions& options = {});

// Rebuilds a trainer from a checkpoint alone.
std::unique_ptr<train::Trainer> load_trainer(const std::string& checkpoint);

// Teacher-only inference of a checkpoint on every test and unseen split of a
// dump.
Json cmd_eval(const std::string& checkpoint, const std::string& data_dir);

// One training-log line: key=value pairs.
std::string log_line(const train::EpochRecord& record);

// Median of a non-empty list (mean of the middle pair for even sizes).
double median(std::vector<double> v);

void write_text(const std::string& path, const std::string& text);

}  // namespace partscreen::app

#endif  // PARTSCREEN_APP_COMMANDS_HPP_
