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


#include "app/commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "common/error.hpp"

namespace partscreen::app {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::kIo, "cannot create directory " + dir);
}

// mF / mQWK of each dataset in a report, in first-appearance order.
std::vector<std::pair<std::string, metrics::Summary>> per_dataset(
    const train::EvalReport& report) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<metrics::TaskScore>> by;
  for (const auto& s : report.scores) {
    if (!by.count(s.dataset)) order.push_back(s.dataset);
    by[s.dataset].push_back(s);
  }
  std::vector<std::pair<std::string, metrics::Summary>> out;
  for (const auto& name : order) out.emplace_back(name, metrics::aggregate(by[name]));
  return out;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) ensure_dir(p.parent_path().string());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::kIo, "cannot write " + path);
    os << text;
    require(static_cast<bool>(os), ErrorCode::kIo, "short write to " + path);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorCode::kIo, "cannot move " + tmp + " into place");
}

double median(std::vector<double> v) {
  require(!v.empty(), ErrorCode::kInvalidArgument, "median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

data::GeneratedData obtain_data(const RunConfig& config) {
  if (config.data_dir.empty()) return data::generate(config.data);
  auto d = data::load(config.data_dir);
  const auto mc = model_config(config);
  for (const auto* set : {&d.train, &d.test})
    for (const auto& s : *set)
      require(s.tasks() == mc.tasks && s.channels == mc.in_channels, ErrorCode::kShape,
              "dataset " + s.name + " in " + config.data_dir +
                  " does not match data.tasks / model input channels");
  require(d.unseen.tasks() == mc.tasks, ErrorCode::kShape,
          "unseen split does not match data.tasks");
  return d;
}

decouple::DiseaseEmbeddings obtain_embeddings(const RunConfig& config) {
  const auto mc = model_config(config);
  if (config.embeddings.empty())
    return decouple::DiseaseEmbeddings::deterministic(mc.tasks, mc.text_dim,
                                                      config.embedding_seed);
  auto e = decouple::DiseaseEmbeddings::load(config.embeddings);
  require(e.tasks() == mc.tasks && e.dim() == mc.text_dim, ErrorCode::kConfig,
          "embedding file " + config.embeddings + " is [" + std::to_string(e.tasks()) + ", " +
              std::to_string(e.dim()) + "] but the model expects [" +
              std::to_string(mc.tasks) + ", " + std::to_string(mc.text_dim) + "]");
  return e;
}

Json to_json(const train::EvalReport& report) {
  Json j;
  j["mF"] = report.summary.mF;
  j["mQWK"] = report.summary.mQWK;
  Json datasets = Json::array();
  for (const auto& [name, s] : per_dataset(report))
    datasets.push_back({{"name", name}, {"mF", s.mF}, {"mQWK", s.mQWK}});
  j["datasets"] = datasets;
  Json scores = Json::array();
  for (const auto& s : report.scores)
    scores.push_back({{"dataset", s.dataset}, {"task", s.task}, {"f", s.f}, {"qwk", s.qwk}});
  j["scores"] = scores;
  return j;
}

std::string log_line(const train::EpochRecord& r) {
  std::ostringstream os;
  os << "epoch=" << r.epoch << " lr=" << num(r.lr) << " L_total=" << num(r.loss_total)
     << " L_adv=" << num(r.loss_adv) << " skipped=" << r.skipped;
  if (r.evaluated) {
    for (const auto* rep : {&r.in_domain, &r.unseen})
      for (const auto& [name, s] : per_dataset(*rep))
        os << " " << name << ".mF=" << num(s.mF) << " " << name << ".mQWK=" << num(s.mQWK);
    os << " in_domain.mF=" << num(r.in_domain.summary.mF)
       << " in_domain.mQWK=" << num(r.in_domain.summary.mQWK)
       << " unseen.mF=" << num(r.unseen.summary.mF)
       << " unseen.mQWK=" << num(r.unseen.summary.mQWK);
  }
  return os.str();
}

Json cmd_gendata(const RunConfig& config, const std::string& out_dir) {
  validate(config);
  const auto d = data::generate(config.data);
  ensure_dir(out_dir);
  data::dump(d, out_dir);
  const std::string digest = data::directory_digest(out_dir);
  RunConfig echoed = config;
  echoed.data_dir = out_dir;
  write_text((fs::path(out_dir) / "config.cfg").string(), echo(echoed));
  Json splits = Json::array();
  auto add = [&](const data::Dataset& s, const char* kind) {
    splits.push_back({{"name", s.name}, {"kind", kind}, {"domain", s.domain},
                      {"size", s.size()}, {"labelled_tasks", s.labelled_tasks}});
  };
  for (const auto& s : d.train) add(s, "train");
  for (const auto& s : d.test) add(s, "test");
  add(d.unseen, "unseen");
  return {{"dir", out_dir}, {"digest", digest}, {"splits", splits}};
}

Json cmd_train(const RunConfig& config, const TrainOptions& options) {
  validate(config);
  const auto data = obtain_data(config);
  const auto embeddings = obtain_embeddings(config);
  const auto mc = model_config(config);
  const std::string hash = config_hash(config);
  ensure_dir(config.out);
  write_text((fs::path(config.out) / "config.cfg").string(), echo(config));

  const train::EvalSets eval{data.test, data.unseen};
  Json runs = Json::array();
  std::vector<double> in_mqwk, in_mf, ood_mqwk, ood_mf;
  for (const auto seed : config.seeds) {
    const fs::path dir = fs::path(config.out) / ("seed_" + std::to_string(seed));
    ensure_dir(dir.string());
    const std::string ckpt = (dir / "checkpoint.bin").string();
    const std::string log_path = (dir / "train.log").string();

    train::TrainConfig tc = config.train;
    tc.seed = seed;
    train::Trainer trainer(tc, mc, embeddings);
    const bool resumed = options.resume && fs::exists(ckpt);
    if (resumed) trainer.load(ckpt, hash);
    std::ofstream log(log_path, resumed ? std::ios::app : std::ios::trunc);
    require(static_cast<bool>(log), ErrorCode::kIo, "cannot write " + log_path);

    train::FitObserver observer;
    observer.on_epoch = [&](const train::EpochRecord& r) {
      const std::string line = "seed=" + std::to_string(seed) + " " + log_line(r);
      log << line << "\n" << std::flush;
      if (options.log) options.log(line);
      trainer.save(ckpt, hash);
    };
    const auto records = trainer.fit(data.train, eval, observer);
    if (records.empty()) trainer.save(ckpt, hash);

    train::EvalReport in_domain, unseen;
    if (!records.empty() && records.back().evaluated) {
      in_domain = records.back().in_domain;
      unseen = records.back().unseen;
    } else {
      in_domain = trainer.evaluate(data.test);
      unseen = trainer.evaluate({data.unseen});
    }
    Json run = {{"seed", seed},
                {"epochs", trainer.epoch()},
                {"resumed", resumed},
                {"checkpoint", (fs::path(dir.filename()) / "checkpoint.bin").string()},
                {"in_domain", to_json(in_domain)},
                {"unseen", to_json(unseen)}};
    write_text((dir / "report.json").string(), run.dump(2) + "\n");
    runs.push_back(run);
    in_mqwk.push_back(in_domain.summary.mQWK);
    in_mf.push_back(in_domain.summary.mF);
    ood_mqwk.push_back(unseen.summary.mQWK);
    ood_mf.push_back(unseen.summary.mF);
  }

  Json report = {{"config_hash", hash},
                 {"branches", branches_name(branches_of(config.train))},
                 {"runs", runs},
                 {"median",
                  {{"in_domain", {{"mF", median(in_mf)}, {"mQWK", median(in_mqwk)}}},
                   {"unseen", {{"mF", median(ood_mf)}, {"mQWK", median(ood_mqwk)}}}}}};
  write_text((fs::path(config.out) / "report.json").string(), report.dump(2) + "\n");
  return report;
}

std::unique_ptr<train::Trainer> load_trainer(const std::string& checkpoint) {
  const auto info = train::Trainer::inspect(checkpoint);
  train::TrainConfig tc;
  tc.noise_init = info.noise ? tc.noise_init : 0.0;
  tc.seed = info.seed;
  auto trainer = std::make_unique<train::Trainer>(tc, info.model, info.embeddings);
  trainer->load(checkpoint);
  return trainer;
}

Json cmd_eval(const std::string& checkpoint, const std::string& data_dir) {
  const auto info = train::Trainer::inspect(checkpoint);
  const auto trainer = load_trainer(checkpoint);
  const auto d = data::load(data_dir);
  for (const auto& s : d.test)
    require(s.tasks() == info.model.tasks && s.channels == info.model.in_channels,
            ErrorCode::kShape,
            "dataset " + s.name + " does not match the checkpoint's model (tasks " +
                std::to_string(info.model.tasks) + ", channels " +
                std::to_string(info.model.in_channels) + ")");
  require(d.unseen.tasks() == info.model.tasks && d.unseen.channels == info.model.in_channels,
          ErrorCode::kShape, "unseen split does not match the checkpoint's model");
  return {{"checkpoint", checkpoint},
          {"config_hash", info.config_hash},
          {"seed", info.seed},
          {"epoch", info.epoch},
          {"in_domain", to_json(trainer->evaluate(d.test))},
          {"unseen", to_json(trainer->evaluate({d.unseen}))}};
}

}  // namespace partscreen::app
