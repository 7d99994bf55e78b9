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

// Acceptance gate: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/verify.hpp"
#include "common/error.hpp"
#include "common/random.hpp"
#include "data/dataset.hpp"
#include "labeling/labels.hpp"
#include "metrics/metrics.hpp"
#include "oracles.hpp"
#include "tensor/spectral.hpp"
#include "train/trainer.hpp"

namespace ps = partscreen;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Every check of the given suites passes; reports the first failure.
Outcome suites_pass(const std::vector<ps::app::Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed)
      return {false, c.suite + "/" + c.name + " measured " + fmt("%.3g", c.measured) +
                         " tol " + fmt("%.3g", c.tolerance)};
  return {true, std::to_string(checks.size()) + " checks"};
}

Outcome fft_roundtrip() {
  const auto t0 = Clock::now();
  ps::Rng rng(101);
  double rt = 0.0, parseval = 0.0, direct = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng.below(8), h = 1 + rng.below(32), w = 1 + rng.below(32);
    auto x = ps::Tensor::from_data({c, h, w}, oracle::random_vector(rng, c * h * w));
    const auto z = ps::spectral::fft2_centered_complex(x);
    const auto back = ps::spectral::ifft2_centered_complex(z);
    double ex = 0.0, ez = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
      rt = std::max(rt, std::abs(back.at(i) - x.at(i)));
      ex += x.at(i) * x.at(i);
      scale = std::max(scale, std::abs(x.at(i)));
    }
    for (std::size_t i = 0; i < z.numel(); ++i) ez += z.at(i) * z.at(i);
    ez /= static_cast<double>(h * w);
    parseval = std::max(parseval, std::abs(ez - ex) / std::max(ex, 1e-300));
    if (trial % 10 == 0) {
      const std::vector<double> plane(x.data().begin(), x.data().begin() + h * w);
      const auto ref = oracle::centered_dft(plane, h, w);
      for (std::size_t i = 0; i < h * w; ++i)
        direct = std::max(direct, std::abs(ref[i] - oracle::cd(z.at(2 * i), z.at(2 * i + 1))) /
                                      (scale * static_cast<double>(h * w)));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = rt < 1e-5 && parseval < 1e-4 && direct < 1e-9 && secs < 10.0;
  return {ok, "roundtrip " + fmt("%.2e", rt) + ", Parseval rel " + fmt("%.2e", parseval) +
                  ", vs direct DFT " + fmt("%.2e", direct) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome gradients() {
  const auto t0 = Clock::now();
  auto out = suites_pass(ps::app::gradient_suite({}));
  const double secs = seconds_since(t0);
  out.passed = out.passed && secs < 60.0;
  out.detail += ", " + fmt("%.2f", secs) + " s";
  return out;
}

Outcome augmentation() { return suites_pass(ps::app::augmentation_suite({})); }

Outcome pseudo_labels() {
  const double tau = 0.95;
  const double lo = 1.0 - tau;
  const std::vector<double> probs = {0.0,
                                     std::nextafter(lo, 0.0),
                                     lo,
                                     std::nextafter(lo, 1.0),
                                     0.5,
                                     std::nextafter(tau, 0.0),
                                     tau,
                                     std::nextafter(tau, 1.0),
                                     1.0};
  std::vector<double> p, delta;
  for (double v : probs)
    for (double d : {0.0, 1.0}) {
      p.push_back(v);
      delta.push_back(d);
    }
  const auto got = ps::labeling::generate_pseudo_labels(p, delta, tau);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::int8_t want = ps::labeling::kUnknown;
    if (delta[i] == 0.0 && p[i] > tau) want = ps::labeling::kPositive;
    if (delta[i] == 0.0 && p[i] < lo) want = ps::labeling::kNegative;
    wrong += got[i] != want;
  }
  auto suite = suites_pass(ps::app::pseudo_label_suite({}));
  return {wrong == 0 && suite.passed, std::to_string(p.size()) + " table rows, " +
                                          std::to_string(wrong) + " wrong; " + suite.detail};
}

Outcome masking() { return suites_pass(ps::app::masking_suite({})); }

// Small partially labelled problem shared by the trainer checks.
const ps::data::GeneratedData& small_data() {
  static const ps::data::GeneratedData d = [] {
    ps::data::GenSpec s;
    s.image_size = 16;
    s.n_train = 10;
    s.n_test = 6;
    s.n_unseen = 6;
    s.seed = 3;
    return ps::data::generate(s);
  }();
  return d;
}

ps::train::Trainer small_trainer() {
  ps::train::TrainConfig c;
  c.batch_size = 8;
  c.epochs = 2;
  c.lr = 1e-3;
  c.lr_adv = 1e-2;
  c.noise_init = 0.5;
  c.tau = 0.6;
  c.mmd_bandwidth = 1.0;
  c.seed = 11;
  ps::train::ModelConfig m;
  m.widths = {3, 4};
  m.tasks = 4;
  m.text_dim = 4;
  m.att_dim = 5;
  return ps::train::Trainer(c, m, ps::decouple::DiseaseEmbeddings::deterministic(4, 4, 5));
}

std::vector<std::vector<double>> snapshot(const std::vector<ps::Tensor>& params) {
  std::vector<std::vector<double>> out;
  for (const auto& p : params) out.emplace_back(p.data().begin(), p.data().end());
  return out;
}

bool bit_equal(const std::vector<std::vector<double>>& a,
               const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size() ||
        std::memcmp(a[i].data(), b[i].data(), a[i].size() * sizeof(double)) != 0)
      return false;
  return true;
}

Outcome alternating() {
  auto t = small_trainer();
  std::vector<std::size_t> sizes;
  for (const auto& d : small_data().train) sizes.push_back(d.size());
  ps::train::BalancedSampler sampler(sizes, t.config().batch_size, t.config().seed);
  sampler.start_epoch(0);
  const auto batch = ps::train::make_batch(small_data().train, sampler.batch(0));

  bool noise_kept = true, theta_kept = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto noise = snapshot(t.noise().parameters());
    t.main_step(batch, t.draw_inputs(batch, s));
    noise_kept = noise_kept && bit_equal(noise, snapshot(t.noise().parameters()));
  }
  for (std::uint64_t s = 5; s < 8; ++s) {
    const auto theta = snapshot(t.network().parameters());
    t.adversarial_step(batch, t.draw_inputs(batch, s));
    theta_kept = theta_kept && bit_equal(theta, snapshot(t.network().parameters()));
  }
  const auto in = t.draw_inputs(batch, 99);
  double prev = t.adversarial_objective(batch, in).item();
  const double first = prev;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    const auto theta = snapshot(t.network().parameters());
    t.adversarial_step(batch, in);
    theta_kept = theta_kept && bit_equal(theta, snapshot(t.network().parameters()));
    const double cur = t.adversarial_objective(batch, in).item();
    worst = std::max(worst, cur - prev);
    prev = cur;
  }
  const bool ok = noise_kept && theta_kept && worst <= 1e-8 && prev < first;
  return {ok, std::string("noise ") + (noise_kept ? "bit-identical" : "CHANGED") + ", theta " +
                  (theta_kept ? "bit-identical" : "CHANGED") + ", L_adv " + fmt("%.6f", first) +
                  " -> " + fmt("%.6f", prev) + ", max rise " + fmt("%.2e", worst)};
}

Outcome metric_oracles() {
  ps::Rng rng(7);
  double err = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int levels = 2 + static_cast<int>(rng.below(4));
    const std::size_t n = 1 + rng.below(60);
    std::vector<int> pred(n), label(n), bp(n), bl(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(levels));
      label[i] = static_cast<int>(rng.below(levels));
      bp[i] = static_cast<int>(rng.below(2));
      bl[i] = static_cast<int>(rng.below(2));
    }
    err = std::max(err, std::abs(ps::metrics::qwk(pred, label, levels) -
                                 oracle::qwk(pred, label, levels)));
    err = std::max(err, std::abs(ps::metrics::macro_f(bp, bl) - oracle::macro_f1(bp, bl)));
    err = std::max(err, std::abs(ps::metrics::macro_f(bp, bl, ps::metrics::FMode::kPositiveOnly) -
                                 oracle::macro_f1(bp, bl, true)));
  }
  const auto s = ps::metrics::aggregate({{"a", 0, 75.7, 0.0}, {"b", 0, 89.5, 0.0}});
  const double avg = std::round(s.mF * 10.0) / 10.0;
  return {err <= 1e-12 && avg == 82.6,
          "max err " + fmt("%.2e", err) + " over 1000 instances, average " + fmt("%.1f", avg)};
}

ps::app::Json train_quiet(ps::app::RunConfig config) { return ps::app::cmd_train(config); }

Outcome directional(const std::string& config_path, const fs::path& work) {
  const auto t0 = Clock::now();
  auto base = ps::app::load_config(config_path);
  auto teacher = base;
  ps::app::apply_branches(teacher, ps::app::Branches::kTeacher);
  teacher.out = (work / "teacher").string();
  auto full = base;
  ps::app::apply_branches(full, ps::app::Branches::kFull);
  full.out = (work / "full").string();
  const auto rt = train_quiet(teacher);
  const auto rf = train_quiet(full);
  const double secs = seconds_since(t0);

  auto per_seed = [](const ps::app::Json& r, const char* split) {
    std::string s;
    for (const auto& run : r["runs"])
      s += (s.empty() ? "" : " ") + fmt("%.1f", run[split]["mQWK"].get<double>());
    return s;
  };
  const double ood_t = rt["median"]["unseen"]["mQWK"], ood_f = rf["median"]["unseen"]["mQWK"];
  const double in_t = rt["median"]["in_domain"]["mQWK"], in_f = rf["median"]["in_domain"]["mQWK"];
  const bool ok = ood_f - ood_t >= 2.0 && in_t - in_f <= 1.0 && secs < 600.0;
  return {ok, "median OOD mQWK full " + fmt("%.1f", ood_f) + " vs teacher " + fmt("%.1f", ood_t) +
                  " (gap " + fmt("%+.1f", ood_f - ood_t) + ", need >= +2.0); in-domain " +
                  fmt("%.1f", in_f) + " vs " + fmt("%.1f", in_t) + " (drop " +
                  fmt("%.1f", in_t - in_f) + ", allow <= 1.0); " + fmt("%.0f", secs) +
                  " s; per-seed OOD full [" + per_seed(rf, "unseen") + "] teacher [" +
                  per_seed(rt, "unseen") + "]"};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome repeatability(const std::string& config_path, const fs::path& work) {
  auto config = ps::app::load_config(config_path);
  config.out = (work / "repeat_a").string();
  const auto a = train_quiet(config);
  config.out = (work / "repeat_b").string();
  const auto b = train_quiet(config);
  std::size_t files = 0, differ = 0;
  for (const auto& entry : fs::recursive_directory_iterator(work / "repeat_a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), work / "repeat_a");
    const auto other = work / "repeat_b" / rel;
    ++files;
    std::string lhs = slurp(entry.path()), rhs = fs::exists(other) ? slurp(other) : "";
    // The echoed configuration names its own output directory.
    if (rel == "config.cfg") {
      lhs.erase(lhs.find("repeat_a"), 8);
      rhs.erase(rhs.find("repeat_b"), 8);
    }
    differ += lhs != rhs;
  }
  return {a == b && files > 0 && differ == 0,
          std::to_string(files) + " artifacts compared, " + std::to_string(differ) + " differ"};
}

Outcome batch_composition() {
  auto sets = small_data().train;
  // Unequal sizes force cycling of the shorter datasets.
  sets[1].labels = sets[1].labels.slice(0, 6);
  sets[1].images.resize(6 * sets[1].image_numel());
  auto t = small_trainer();
  std::size_t batches = 0, bad = 0;
  ps::train::FitObserver ob;
  ob.on_batch = [&](std::size_t, std::size_t, const ps::train::Batch& b) {
    std::vector<std::size_t> per(sets.size(), 0);
    for (auto k : b.source) ++per[k];
    ++batches;
    bad += std::any_of(per.begin(), per.end(), [&](auto c) { return c != per[0]; });
  };
  t.fit(sets, {}, ob);
  std::vector<std::size_t> sizes;
  for (const auto& d : sets) sizes.push_back(d.size());
  const ps::train::BalancedSampler sampler(sizes, t.config().batch_size, 0);
  const std::size_t want = t.config().epochs * sampler.iterations();
  return {bad == 0 && batches == want && want > 0,
          std::to_string(batches) + " batches checked, " + std::to_string(bad) + " unbalanced"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partscreen acceptance gate"};
  std::string directional_cfg, small_cfg, work = "acceptance-work";
  std::set<int> only;
  app.add_option("--directional", directional_cfg, "config of the directional experiment")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--small", small_cfg, "config of the repeatability run")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run these criteria only")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"FFT roundtrip and Parseval", fft_roundtrip},
      {"gradient checks", gradients},
      {"augmentation identities", augmentation},
      {"pseudo-label truth table", pseudo_labels},
      {"masking invariants", masking},
      {"alternating optimisation contracts", alternating},
      {"metric oracles", metric_oracles},
      {"directional generalisation experiment", [&] { return directional(directional_cfg, work); }},
      {"identical runs, identical artifacts", [&] { return repeatability(small_cfg, work); }},
      {"equal batch composition", batch_composition},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.passed;
    std::printf("criterion %2d %s  %s: %s\n", id, o.passed ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
