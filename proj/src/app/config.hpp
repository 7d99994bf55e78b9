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


#ifndef PARTSCREEN_APP_CONFIG_HPP_
#define PARTSCREEN_APP_CONFIG_HPP_

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "train/model.hpp"
#include "train/trainer.hpp"

// Run configuration: one file of `key = value` lines grouped under
// [data], [model], [train] and [run] sections. Outside a section a key must
// be written in dotted form (`train.lr = 1e-3`). Later sources override
// earlier ones: built-in defaults, then the file, then command-line flags.
namespace partscreen::app {

enum class Branches { kTeacher, kTs1, kTs2, kFull };

struct RunConfig {
  data::GenSpec data;
  std::string data_dir;  // load this dump instead of generating
  train::ModelConfig model;
  train::TrainConfig train;
  std::string embeddings;  // "T d" text file; empty: deterministic rows
  std::uint64_t embedding_seed = 7;
  std::vector<std::uint64_t> seeds{0};
  std::string out = "partscreen-out";
};

// Defaults, then every assignment of the stream in order. Unknown keys,
// duplicate keys and malformed values raise kConfig naming the line.
RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

// Applies one dotted assignment on top of an existing configuration.
void set_value(RunConfig& config, const std::string& key, const std::string& value);

// Every accepted dotted key, in echo order.
std::vector<std::string> config_keys();

Branches parse_branches(const std::string& name);
std::string branches_name(Branches b);
void apply_branches(RunConfig& config, Branches b);
Branches branches_of(const train::TrainConfig& config);

// Cross-field checks (model tasks follow data tasks, label map, etc.).
void validate(const RunConfig& config);

// Effective configuration in the file format; parsing it yields the same
// configuration.
std::string echo(const RunConfig& config);

// FNV-1a of the echo without the keys that may change between a run and its
// resumption (run.out, run.seeds, train.epochs).
std::string config_hash(const RunConfig& config);

// Model configuration implied by the data and model sections.
train::ModelConfig model_config(const RunConfig& config);

}  // namespace partscreen::app

#endif  // PARTSCREEN_APP_CONFIG_HPP_
