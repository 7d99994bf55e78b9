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


// Command-line front end over the partscreen C API.
//
// Setting precedence, lowest to highest: built-in defaults, --config file,
// --set key=value overrides in order, then the dedicated flags (--seed,
// --out, --branches).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "partscreen/partscreen.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kVerification = 2, kNumeric = 3 };

int exit_code(ps_status s) {
  switch (s) {
    case PS_OK: return kOk;
    case PS_ERR_VERIFICATION: return kVerification;
    case PS_ERR_NUMERIC: return kNumeric;
    default: return kUsage;
  }
}

struct Failure {
  ps_status status;
};

void check(ps_status s) {
  if (s != PS_OK) throw Failure{s};
}

using ConfigPtr = std::unique_ptr<ps_config, decltype(&ps_config_free)>;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::string out;
};

ConfigPtr build_config(const Common& c) {
  ps_config* raw = nullptr;
  check(c.config.empty() ? ps_config_default(&raw) : ps_config_load(c.config.c_str(), &raw));
  ConfigPtr cfg(raw, &ps_config_free);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(key);
    trim(value);
    check(ps_config_set(cfg.get(), key.c_str(), value.c_str()));
  }
  return cfg;
}

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (auto v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
  return s;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ps_string_free(s);
  return out;
}

void add_common(CLI::App* cmd, Common& c, bool seeds_list) {
  cmd->add_option("--config", c.config, "Config file (key = value, [section] headers)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override one config key: --set train.lr=1e-4");
  if (seeds_list)
    cmd->add_option("--seed", c.seeds, "Training seed; repeat for a seed list (run.seeds)");
  else
    cmd->add_option("--seed", c.seeds, "Seed")->expected(1);
}

void print_report(const std::string& json, const std::string& path) {
  std::cout << json << "\n";
  if (path.empty()) return;
  std::ofstream f(path);
  f << json << "\n";
  if (!f) throw CLI::ValidationError("--report", "cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially supervised multi-task screening with spectral augmentation"};
  app.set_version_flag("--version", std::string(ps_version()));
  app.require_subcommand(1);

  Common gen, train, ev, ver;
  std::string branches;
  bool resume = false, quiet = false;
  std::string checkpoint, data_dir, report_path;

  auto* g = app.add_subcommand("gendata", "Generate the synthetic multi-domain benchmark");
  add_common(g, gen, false);
  g->add_option("--out", gen.out, "Output dataset directory")->required();

  auto* t = app.add_subcommand("train", "Train one model per seed");
  add_common(t, train, true);
  t->add_option("--out", train.out, "Output directory (run.out)");
  t->add_option("--branches", branches, "Branch preset")
      ->check(CLI::IsMember({"teacher", "ts1", "ts2", "full"}));
  t->add_flag("--resume", resume, "Continue from existing checkpoints in the output directory");
  t->add_flag("--quiet", quiet, "Do not echo the training log to stderr");

  auto* e = app.add_subcommand("eval", "Teacher-branch evaluation of a checkpoint");
  e->add_option("--checkpoint", checkpoint, "checkpoint.bin written by train")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--data", data_dir, "Dataset directory written by gendata")
      ->required()
      ->check(CLI::ExistingDirectory);
  e->add_option("--out", report_path, "Also write the JSON report to this file");

  auto* v = app.add_subcommand("verify", "Run the built-in property suites");
  v->add_option("--seed", ver.seeds, "Seed for the randomized checks")->expected(1);
  v->add_option("--out", report_path, "Also write the JSON report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    char* report = nullptr;
    if (g->parsed()) {
      auto cfg = build_config(gen);
      if (!gen.seeds.empty())
        check(ps_config_set(cfg.get(), "data.seed", std::to_string(gen.seeds[0]).c_str()));
      check(ps_gendata(cfg.get(), gen.out.c_str(), &report));
      print_report(take(report), "");
    } else if (t->parsed()) {
      auto cfg = build_config(train);
      if (!train.seeds.empty())
        check(ps_config_set(cfg.get(), "run.seeds", seed_list(train.seeds).c_str()));
      if (!train.out.empty()) check(ps_config_set(cfg.get(), "run.out", train.out.c_str()));
      if (!branches.empty()) check(ps_config_set_branches(cfg.get(), branches.c_str()));
      const ps_log_fn log = quiet ? nullptr : +[](const char* line, void*) {
        std::cerr << line << "\n";
      };
      check(ps_train(cfg.get(), resume ? 1 : 0, log, nullptr, &report));
      print_report(take(report), "");
    } else if (e->parsed()) {
      check(ps_eval(checkpoint.c_str(), data_dir.c_str(), &report));
      print_report(take(report), report_path);
    } else if (v->parsed()) {
      const std::uint64_t seed = ver.seeds.empty() ? 0 : ver.seeds[0];
      const ps_status s = ps_verify(seed, &report);
      print_report(take(report), report_path);
      check(s);
    }
  } catch (const Failure& f) {
    std::cerr << "partscreen: " << ps_status_name(f.status);
    if (*ps_last_error()) std::cerr << ": " << ps_last_error();
    std::cerr << "\n";
    return exit_code(f.status);
  } catch (const CLI::Error& err) {
    std::cerr << "partscreen: " << err.what() << "\n";
    return kUsage;
  }
  return kOk;
}
