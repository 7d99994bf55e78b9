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


#include "app/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace partscreen::app {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  fail(ErrorCode::kConfig, key + ": expected " + expected + ", got \"" + value + "\"");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
    bad_value(key, v, "a finite number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != end)
    bad_value(key, v, "a non-negative integer");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  if (v.empty()) return out;
  for (const auto& part : split(v, ',')) out.push_back(to_size(key, part));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

std::string fmt_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define PS_DOUBLE(name, member)                                                     \
  Field {                                                                           \
    name, [](RunConfig& c, const std::string& v) { c.member = to_double(name, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                            \
  }
#define PS_SIZE(name, member)                                                     \
  Field {                                                                         \
    name, [](RunConfig& c, const std::string& v) { c.member = to_size(name, v); }, \
        [](const RunConfig& c) { return fmt(std::uint64_t(c.member)); }           \
  }
#define PS_BOOL(name, member)                                                     \
  Field {                                                                         \
    name, [](RunConfig& c, const std::string& v) { c.member = to_bool(name, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                          \
  }
#define PS_STRING(name, member)                                         \
  Field {                                                               \
    name, [](RunConfig& c, const std::string& v) { c.member = v; },     \
        [](const RunConfig& c) { return c.member; }                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PS_SIZE("data.domains", data.domains),
      PS_SIZE("data.tasks", data.tasks),
      PS_SIZE("data.n_train", data.n_train),
      PS_SIZE("data.n_test", data.n_test),
      PS_SIZE("data.n_unseen", data.n_unseen),
      PS_SIZE("data.image_size", data.image_size),
      Field{"data.label_map",
            [](RunConfig& c, const std::string& v) {
              c.data.label_map.clear();
              if (v.empty()) return;
              for (const auto& group : split(v, ';'))
                c.data.label_map.push_back(to_sizes("data.label_map", group));
            },
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t k = 0; k < c.data.label_map.size(); ++k)
                s += (k ? ";" : "") + fmt_sizes(c.data.label_map[k]);
              return s;
            }},
      PS_DOUBLE("data.positive_rate", data.positive_rate),
      PS_DOUBLE("data.noise_sigma", data.noise_sigma),
      PS_DOUBLE("data.motif_contrast", data.motif_contrast),
      PS_DOUBLE("data.unseen_offset", data.unseen_offset),
      Field{"data.seed",
            [](RunConfig& c, const std::string& v) { c.data.seed = to_u64("data.seed", v); },
            [](const RunConfig& c) { return fmt(c.data.seed); }},
      PS_STRING("data.dir", data_dir),
      Field{"model.widths",
            [](RunConfig& c, const std::string& v) { c.model.widths = to_sizes("model.widths", v); },
            [](const RunConfig& c) { return fmt_sizes(c.model.widths); }},
      PS_SIZE("model.text_dim", model.text_dim),
      PS_SIZE("model.att_dim", model.att_dim),
      PS_STRING("model.embeddings", embeddings),
      Field{"model.embedding_seed",
            [](RunConfig& c, const std::string& v) {
              c.embedding_seed = to_u64("model.embedding_seed", v);
            },
            [](const RunConfig& c) { return fmt(c.embedding_seed); }},
      PS_DOUBLE("train.tau", train.tau),
      PS_DOUBLE("train.r", train.r),
      PS_DOUBLE("train.p", train.p),
      PS_DOUBLE("train.lambda1", train.weights.lambda1),
      PS_DOUBLE("train.lambda2", train.weights.lambda2),
      PS_DOUBLE("train.lambda3", train.weights.lambda3),
      PS_SIZE("train.batch_size", train.batch_size),
      PS_DOUBLE("train.lr", train.lr),
      PS_DOUBLE("train.weight_decay", train.weight_decay),
      PS_DOUBLE("train.lr_decay", train.lr_decay),
      PS_SIZE("train.lr_step", train.lr_step),
      PS_SIZE("train.epochs", train.epochs),
      PS_SIZE("train.warmup_epochs", train.warmup_epochs),
      PS_DOUBLE("train.lr_adv", train.lr_adv),
      PS_DOUBLE("train.noise_init", train.noise_init),
      PS_DOUBLE("train.clip_norm", train.clip_norm),
      PS_BOOL("train.enable_s1", train.enable_s1),
      PS_BOOL("train.enable_s2", train.enable_s2),
      PS_BOOL("train.enable_adversarial", train.enable_adversarial),
      PS_BOOL("train.flip", train.flip),
      PS_BOOL("train.independent_student_flip", train.independent_student_flip),
      Field{"train.mmd_bandwidth",
            [](RunConfig& c, const std::string& v) {
              if (v == "median")
                c.train.mmd_bandwidth.reset();
              else
                c.train.mmd_bandwidth = to_double("train.mmd_bandwidth", v);
            },
            [](const RunConfig& c) {
              return c.train.mmd_bandwidth ? fmt(*c.train.mmd_bandwidth) : std::string("median");
            }},
      PS_SIZE("train.eval_every", train.eval_every),
      Field{"run.seeds",
            [](RunConfig& c, const std::string& v) {
              c.seeds.clear();
              for (const auto& s : split(v, ',')) c.seeds.push_back(to_u64("run.seeds", s));
            },
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.seeds.size(); ++i)
                s += (i ? "," : "") + std::to_string(c.seeds[i]);
              return s;
            }},
      PS_STRING("run.out", out),
  };
  return table;
}

#undef PS_DOUBLE
#undef PS_SIZE
#undef PS_BOOL
#undef PS_STRING

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

std::string section_of(const std::string& key) { return key.substr(0, key.find('.')); }

}  // namespace

void set_value(RunConfig& config, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  require(f != nullptr, ErrorCode::kConfig, "unknown configuration key \"" + key + "\"");
  f->set(config, trim(value));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

RunConfig parse_config(std::istream& is, const std::string& source) {
  RunConfig config;
  std::string section, line;
  std::set<std::string> seen;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']' && line.size() > 2, ErrorCode::kConfig,
              where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      require(section == "data" || section == "model" || section == "train" || section == "run",
              ErrorCode::kConfig, where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kConfig, where + "expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) {
      require(key.find('.') == std::string::npos, ErrorCode::kConfig,
              where + "dotted key \"" + key + "\" inside section [" + section + "]");
      key = section + "." + key;
    }
    require(!seen.count(key), ErrorCode::kConfig, where + "duplicate key \"" + key + "\"");
    seen.insert(key);
    try {
      set_value(config, key, line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, where + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::kConfig, "cannot read config file " + path);
  return parse_config(is, path);
}

Branches parse_branches(const std::string& name) {
  if (name == "teacher") return Branches::kTeacher;
  if (name == "ts1") return Branches::kTs1;
  if (name == "ts2") return Branches::kTs2;
  if (name == "full") return Branches::kFull;
  fail(ErrorCode::kConfig, "branches must be teacher, ts1, ts2 or full, got \"" + name + "\"");
}

std::string branches_name(Branches b) {
  switch (b) {
    case Branches::kTeacher: return "teacher";
    case Branches::kTs1: return "ts1";
    case Branches::kTs2: return "ts2";
    case Branches::kFull: return "full";
  }
  return "full";
}

void apply_branches(RunConfig& config, Branches b) {
  auto& t = config.train;
  t.enable_s1 = b == Branches::kTs1 || b == Branches::kFull;
  t.enable_s2 = b == Branches::kTs2 || b == Branches::kFull;
  t.enable_adversarial = t.enable_s2;
}

Branches branches_of(const train::TrainConfig& t) {
  if (t.enable_s1 && t.enable_s2) return Branches::kFull;
  if (t.enable_s1) return Branches::kTs1;
  if (t.enable_s2) return Branches::kTs2;
  return Branches::kTeacher;
}

train::ModelConfig model_config(const RunConfig& config) {
  train::ModelConfig m = config.model;
  m.tasks = config.data.tasks;
  return m;
}

void validate(const RunConfig& config) {
  try {
    config.data.validate();
    config.train.validate();
    model_config(config).validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, std::string("invalid configuration: ") + e.what());
  }
  require(!config.seeds.empty(), ErrorCode::kConfig, "run.seeds must list at least one seed");
  require(config.train.batch_size % config.data.domains == 0, ErrorCode::kConfig,
          "train.batch_size must be a multiple of data.domains for balanced batches");
  require(model_config(config).output_extent(config.data.image_size) >= 4, ErrorCode::kConfig,
          "the final feature map must be at least 4x4; use larger images or fewer blocks");
}

std::string echo(const RunConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    const std::string s = section_of(f.key);
    if (s != section) {
      os << (section.empty() ? "" : "\n") << "[" << s << "]\n";
      section = s;
    }
    os << f.key.substr(s.size() + 1) << " = " << f.get(config) << "\n";
  }
  return os.str();
}

std::string config_hash(const RunConfig& config) {
  Fnv1a h;
  for (const auto& f : fields()) {
    if (f.key == "run.out" || f.key == "run.seeds" || f.key == "train.epochs") continue;
    h.update(f.key);
    h.update("=");
    h.update(f.get(config));
    h.update("\n");
  }
  return h.hex();
}

}  // namespace partscreen::app
