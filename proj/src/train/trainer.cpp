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


#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/random.hpp"
#include "tensor/ops.hpp"
#include "tensor/serialize.hpp"

namespace partscreen::train {

using labeling::PartialLabels;

namespace {

constexpr std::size_t kEvalChunk = 64;
constexpr char kMagic[] = "partscreen-checkpoint-1";

// Stream tags for draw_inputs.
enum : std::uint64_t { kFlipTag = 1, kStudentFlipTag, kMaskTag, kNoiseTag, kAdvTag };

std::vector<std::vector<double>> normal_draws(const std::vector<std::size_t>& counts, Rng& rng) {
  std::vector<std::vector<double>> out;
  for (auto n : counts) {
    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();
    out.push_back(std::move(z));
  }
  return out;
}

Tensor scalar_zero() { return Tensor::scalar(0.0); }

}  // namespace

void TrainConfig::validate() const {
  require(tau > 0.5 && tau < 1.0, ErrorCode::kConfig, "tau must lie in (0.5, 1)");
  require(r > 0.0 && r <= 1.0, ErrorCode::kConfig, "r must lie in (0, 1]");
  require(p >= 0.0 && p <= 1.0, ErrorCode::kConfig, "p must lie in [0, 1]");
  weights.validate();
  require(batch_size >= 1 && epochs >= 1 && lr_step >= 1, ErrorCode::kConfig,
          "batch_size, epochs and lr_step must be positive");
  for (double v : {lr, lr_adv, weight_decay, noise_init, clip_norm})
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kConfig,
            "learning rates, weight decay, noise_init and clip_norm must be finite and >= 0");
  require(lr_decay > 0.0 && lr_decay <= 1.0, ErrorCode::kConfig, "lr_decay must lie in (0, 1]");
  if (mmd_bandwidth)
    require(*mmd_bandwidth > 0.0, ErrorCode::kConfig, "mmd bandwidth must be positive");
}

bool Trainer::s1_active() const {
  return config_.enable_s1 && epoch_ >= config_.warmup_epochs;
}

bool Trainer::s2_active() const {
  return config_.enable_s2 && epoch_ >= config_.warmup_epochs;
}

bool Trainer::adversarial_active() const {
  return s2_active() && config_.enable_adversarial && noise_enabled();
}

double TrainConfig::lr_at(std::size_t epoch) const {
  return lr * std::pow(lr_decay, static_cast<double>(epoch / lr_step));
}

// ---------------------------------------------------------------- sampling

BalancedSampler::BalancedSampler(std::vector<std::size_t> sizes, std::size_t batch_size,
                                 std::uint64_t seed)
    : sizes_(std::move(sizes)), seed_(seed) {
  require(!sizes_.empty(), ErrorCode::kInvalidArgument, "no training datasets");
  for (auto n : sizes_) require(n > 0, ErrorCode::kInvalidArgument, "empty training dataset");
  require(batch_size % sizes_.size() == 0, ErrorCode::kConfig,
          "batch size " + std::to_string(batch_size) + " is not divisible by the " +
              std::to_string(sizes_.size()) + " training datasets");
  per_ = batch_size / sizes_.size();
  const std::size_t longest = *std::max_element(sizes_.begin(), sizes_.end());
  iterations_ = (longest + per_ - 1) / per_;
}

void BalancedSampler::start_epoch(std::size_t epoch) {
  perms_.assign(sizes_.size(), {});
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    Rng rng(derive_seed(seed_, {epoch, 0xBA7C, k}));
    auto& perm = perms_[k];
    perm.resize(sizes_[k]);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  }
}

std::vector<std::pair<std::size_t, std::size_t>> BalancedSampler::batch(std::size_t it) const {
  require(!perms_.empty(), ErrorCode::kInvalidArgument, "start_epoch was not called");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < sizes_.size(); ++k)
    for (std::size_t j = 0; j < per_; ++j)
      out.emplace_back(k, perms_[k][(it * per_ + j) % sizes_[k]]);
  return out;
}

Batch make_batch(const std::vector<data::Dataset>& sets,
                 const std::vector<std::pair<std::size_t, std::size_t>>& picks) {
  require(!picks.empty(), ErrorCode::kInvalidArgument, "empty batch");
  const auto& first = sets.at(picks.front().first);
  const std::size_t numel = first.image_numel(), tasks = first.tasks();
  std::vector<double> images;
  std::vector<std::int8_t> labels;
  Batch b;
  for (auto [k, i] : picks) {
    const auto& d = sets.at(k);
    require(d.image_numel() == numel && d.tasks() == tasks, ErrorCode::kShape,
            "training datasets differ in image or task shape");
    auto img = d.image(i);
    images.insert(images.end(), img.begin(), img.end());
    auto row = d.labels.row(i);
    labels.insert(labels.end(), row.begin(), row.end());
    b.source.push_back(k);
  }
  b.images = Tensor::from_data({picks.size(), first.channels, first.height, first.width},
                               std::move(images));
  b.labels = PartialLabels(picks.size(), tasks, std::move(labels));
  return b;
}

Tensor hflip(const Tensor& images, const std::vector<char>& flags) {
  require(images.rank() == 4 && flags.size() == images.dim(0), ErrorCode::kShape,
          "hflip expects [B, C, H, W] and one flag per image");
  const std::size_t nb = images.dim(0), rows = images.dim(1) * images.dim(2);
  const std::size_t w = images.dim(3);
  std::vector<double> out(images.data().begin(), images.data().end());
  for (std::size_t b = 0; b < nb; ++b) {
    if (!flags[b]) continue;
    for (std::size_t r = 0; r < rows; ++r) {
      double* row = &out[(b * rows + r) * w];
      std::reverse(row, row + w);
    }
  }
  return Tensor::from_data(images.shape(), std::move(out));
}

// ----------------------------------------------------------------- trainer

Trainer::Trainer(TrainConfig config, ModelConfig model, decouple::DiseaseEmbeddings embeddings)
    : config_(std::move(config)) {
  config_.validate();
  net_ = Network(model, std::move(embeddings), derive_seed(config_.seed, {0x3E7}));
  if (config_.noise_init > 0.0) {
    noise_ = augment::NoiseScales(model.widths, config_.noise_init);
    for (auto& t : noise_.parameters()) {
      Tensor leaf = t;
      round_to_float(leaf.mutable_data());
    }
  }
  opt_main_ = AdamW(net_.parameters(), {.lr = config_.lr_at(0), .weight_decay = config_.weight_decay});
  opt_adv_ = AdamW(noise_.parameters(), {.lr = config_.lr_adv, .weight_decay = 0.0});
}

void Trainer::set_theta_trainable(bool on) {
  for (auto& p : net_.parameters()) {
    Tensor t = p;
    t.set_requires_grad(on);
  }
}

void Trainer::set_noise_trainable(bool on) {
  for (auto& p : noise_.parameters()) {
    Tensor t = p;
    t.set_requires_grad(on);
  }
}

StepInputs Trainer::draw_inputs(const Batch& batch, std::uint64_t step_seed) const {
  const std::size_t nb = batch.images.dim(0);
  StepInputs in;
  std::vector<char> flags(nb, 0);
  if (config_.flip) {
    Rng rng(derive_seed(step_seed, {kFlipTag}));
    for (auto& f : flags) f = rng.bernoulli(0.5);
  }
  in.teacher_images = hflip(batch.images, flags);
  if (config_.independent_student_flip) {
    Rng rng(derive_seed(step_seed, {kStudentFlipTag}));
    for (auto& f : flags) f = config_.flip && rng.bernoulli(0.5);
    in.student_images = hflip(batch.images, flags);
  } else {
    in.student_images = in.teacher_images;
  }

  const auto& mc = net_.config();
  std::size_t extent_h = batch.images.dim(2), extent_w = batch.images.dim(3);
  extent_h = mc.output_extent(extent_h);
  extent_w = mc.output_extent(extent_w);
  if (s1_active()) {
    Rng rng(derive_seed(step_seed, {kMaskTag}));
    in.drop = augment::draw_drop_mask({nb, mc.widths.back(), extent_h, extent_w}, config_.r,
                                      config_.p, rng);
  }
  std::vector<std::size_t> counts;
  for (auto c : mc.widths) counts.push_back(nb * c);
  if (s2_active() && noise_enabled()) {
    Rng rng(derive_seed(step_seed, {kNoiseTag}));
    in.z_mu = normal_draws(counts, rng);
    in.z_sigma = normal_draws(counts, rng);
  }
  if (adversarial_active()) {
    Rng rng(derive_seed(step_seed, {kAdvTag}));
    in.adv_z_mu = normal_draws(counts, rng);
    in.adv_z_sigma = normal_draws(counts, rng);
  }
  return in;
}

Network::Head Trainer::student2(const Tensor& images,
                                const std::vector<std::vector<double>>& z_mu,
                                const std::vector<std::vector<double>>& z_sigma,
                                const Tensor* first_block) const {
  const std::size_t nb = images.dim(0);
  Tensor x = images;
  for (std::size_t l = 0; l < net_.blocks(); ++l) {
    x = l == 0 && first_block ? *first_block : net_.block(l, x);
    const std::size_t c = x.dim(1);
    if (noise_enabled()) {
      require(z_mu.size() > l && z_sigma.size() > l && z_mu[l].size() == nb * c &&
                  z_sigma[l].size() == nb * c,
              ErrorCode::kShape, "noise draws do not match the batch");
      x = augment::lf_uncert_windowed(x, noise_.sigma_mu(l), noise_.sigma_sigma(l), config_.r, z_mu[l],
                             z_sigma[l]);
    } else {
      const std::vector<double> z(nb * c, 0.0);
      x = augment::lf_uncert_windowed(x, Tensor::zeros({c}), Tensor::zeros({c}), config_.r, z, z);
    }
  }
  return net_.head(x);
}

BranchOutputs Trainer::forward(const Batch& batch, const StepInputs& in,
                               const TeacherTargets* targets) const {
  BranchOutputs out;
  // The first block sees clean images on every branch that shares them.
  const Tensor first = net_.block(0, in.teacher_images);
  Tensor fmap = first;
  for (std::size_t l = 1; l < net_.blocks(); ++l) fmap = net_.block(l, fmap);
  const bool shared = in.student_images.node_ptr() == in.teacher_images.node_ptr();
  out.teacher = net_.head(fmap);
  for (double v : out.teacher.probs.data())
    require(std::isfinite(v), ErrorCode::kNumeric,
            "non-finite teacher output at epoch " + std::to_string(epoch_ + 1));
  out.teacher_ce = losses::partial_bce(out.teacher.probs, batch.labels);
  out.pseudo = targets ? targets->pseudo
                       : labeling::generate_pseudo_labels(out.teacher.probs.data(), batch.labels,
                                                          config_.tau);

  out.s1_ce = scalar_zero();
  if (s1_active()) {
    const Tensor smap = shared ? fmap : net_.encode(in.student_images);
    out.s1 = net_.head(augment::lf_dropout(smap, in.drop));
    out.s1_ce = losses::partial_bce(out.s1.probs, out.pseudo, losses::MaskSource::kPseudo);
  }

  out.s2_total = scalar_zero();
  if (s2_active()) {
    out.s2 = student2(in.student_images, in.z_mu, in.z_sigma, shared ? &first : nullptr);
    out.s2_cls = losses::s2_classification_loss(out.s2.probs, batch.labels, out.pseudo,
                                                config_.weights);
    const auto kernel = config_.mmd_bandwidth
                            ? losses::KernelConfig::fixed(*config_.mmd_bandwidth)
                            : losses::KernelConfig::median_heuristic();
    out.mmd = losses::mmd_loss(targets ? targets->features : out.teacher.features.detach(),
                               out.s2.features, kernel);
    out.kl = losses::kl_known(targets ? targets->probs : out.teacher.probs.detach(),
                              out.s2.probs, batch.labels);
    out.s2_total = losses::s2_total(out.s2_cls, out.mmd, out.kl, config_.weights);
  }
  out.total = losses::total_loss(out.teacher_ce, out.s1_ce, out.s2_total);
  return out;
}

Tensor Trainer::adversarial_objective(const Batch& batch, const StepInputs& in) const {
  const auto s2 = student2(in.student_images, in.adv_z_mu, in.adv_z_sigma);
  return losses::adversarial_loss(batch.labels, s2.probs);
}

StepResult Trainer::apply(AdamW& opt, Tensor loss, double clip) {
  StepResult r;
  r.loss = loss.item();
  require(std::isfinite(r.loss), ErrorCode::kNumeric,
          "non-finite loss at epoch " + std::to_string(epoch_ + 1) + "; step aborted");
  opt.zero_grad();
  loss.backward();
  if (!opt.grads_finite()) {
    opt.zero_grad();
    r.skipped = true;
    return r;
  }
  if (clip > 0.0) {
    const double norm = opt.grad_norm();
    if (norm > clip) opt.scale_grads(clip / norm);
  }
  opt.step();
  return r;
}

StepResult Trainer::main_step(const Batch& batch, const StepInputs& in) {
  set_noise_trainable(false);
  set_theta_trainable(true);
  auto out = forward(batch, in);
  auto r = apply(opt_main_, out.total, config_.clip_norm);
  set_noise_trainable(true);
  return r;
}

StepResult Trainer::adversarial_step(const Batch& batch, const StepInputs& in) {
  if (!adversarial_active()) return {};
  set_theta_trainable(false);
  set_noise_trainable(true);
  StepResult r;
  try {
    r = apply(opt_adv_, adversarial_objective(batch, in), config_.clip_norm);
  } catch (...) {
    set_theta_trainable(true);
    throw;
  }
  set_theta_trainable(true);
  return r;
}

Tensor Trainer::infer(const Tensor& images) const {
  require(images.rank() == 4 && images.dim(1) == net_.config().in_channels, ErrorCode::kShape,
          "infer expects [N, " + std::to_string(net_.config().in_channels) + ", H, W] images");
  NoGradGuard guard;
  const std::size_t n = images.dim(0), per = images.numel() / std::max<std::size_t>(n, 1);
  const std::size_t tasks = net_.config().tasks;
  std::vector<double> probs;
  probs.reserve(n * tasks);
  for (std::size_t b = 0; b < n; b += kEvalChunk) {
    const std::size_t m = std::min(kEvalChunk, n - b);
    std::vector<double> chunk(images.data().begin() + b * per,
                              images.data().begin() + (b + m) * per);
    Shape shape = images.shape();
    shape[0] = m;
    const auto head = net_.head(net_.encode(Tensor::from_data(shape, std::move(chunk))));
    probs.insert(probs.end(), head.probs.data().begin(), head.probs.data().end());
  }
  return Tensor::from_data({n, tasks}, std::move(probs));
}

EvalReport Trainer::evaluate(const std::vector<data::Dataset>& sets, metrics::FMode mode) const {
  EvalReport report;
  for (const auto& d : sets) {
    require(d.tasks() == net_.config().tasks, ErrorCode::kShape,
            "dataset " + d.name + " has " + std::to_string(d.tasks()) +
                " tasks but the model predicts " + std::to_string(net_.config().tasks));
    const auto probs = infer(Tensor::from_data({d.size(), d.channels, d.height, d.width},
                                               d.images));
    for (std::size_t t = 0; t < d.tasks(); ++t) {
      std::vector<int> preds, labels;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto y = d.labels.at(i, t);
        if (y == labeling::kUnknown) continue;
        preds.push_back(probs.at(i * d.tasks() + t) >= 0.5 ? 1 : 0);
        labels.push_back(y);
      }
      if (labels.empty()) continue;
      report.scores.push_back({d.name, t, 100.0 * metrics::macro_f(preds, labels, mode),
                               100.0 * metrics::qwk(preds, labels, 2)});
    }
  }
  if (!report.scores.empty()) report.summary = metrics::aggregate(report.scores);
  return report;
}

std::vector<EpochRecord> Trainer::fit(const std::vector<data::Dataset>& train,
                                      const EvalSets& eval, const FitObserver& observer) {
  require(!train.empty(), ErrorCode::kInvalidArgument, "no training datasets");
  std::vector<std::size_t> sizes;
  for (const auto& d : train) {
    require(d.size() > 0, ErrorCode::kInvalidArgument, "training dataset " + d.name + " is empty");
    require(d.tasks() == net_.config().tasks && d.channels == net_.config().in_channels,
            ErrorCode::kShape, "training dataset " + d.name + " does not match the model");
    sizes.push_back(d.size());
  }
  BalancedSampler sampler(sizes, config_.batch_size, config_.seed);
  std::vector<EpochRecord> records;
  for (std::size_t e = epoch_; e < config_.epochs; ++e) {
    opt_main_.set_lr(config_.lr_at(e));
    sampler.start_epoch(e);
    EpochRecord rec;
    rec.lr = opt_main_.lr();
    std::size_t adv_steps = 0;
    for (std::size_t it = 0; it < sampler.iterations(); ++it) {
      const Batch batch = make_batch(train, sampler.batch(it));
      std::vector<std::size_t> per(train.size(), 0);
      for (auto k : batch.source) ++per[k];
      for (auto c : per)
        require(c == sampler.per_dataset(), ErrorCode::kVerification,
                "unequal dataset composition in batch " + std::to_string(it));
      if (observer.on_batch) observer.on_batch(e, it, batch);

      const StepInputs in = draw_inputs(batch, derive_seed(config_.seed, {e, it}));
      const auto main = main_step(batch, in);
      rec.loss_total += main.loss;
      rec.skipped += main.skipped;
      if (adversarial_active()) {
        const auto adv = adversarial_step(batch, in);
        rec.loss_adv += adv.loss;
        rec.skipped += adv.skipped;
        ++adv_steps;
      }
    }
    rec.loss_total /= static_cast<double>(sampler.iterations());
    if (adv_steps) rec.loss_adv /= static_cast<double>(adv_steps);
    epoch_ = e + 1;
    rec.epoch = epoch_;
    round_state();
    const bool last = epoch_ == config_.epochs;
    if (last || (config_.eval_every && epoch_ % config_.eval_every == 0)) {
      rec.evaluated = true;
      if (!eval.in_domain.empty()) rec.in_domain = evaluate(eval.in_domain);
      if (eval.unseen) rec.unseen = evaluate({*eval.unseen});
    }
    if (observer.on_epoch) observer.on_epoch(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

void Trainer::round_state() {
  for (AdamW* opt : {&opt_main_, &opt_adv_}) {
    for (auto& p : opt->params()) round_to_float(p.mutable_data());
    for (auto& m : opt->first_moments()) round_to_float(m);
    for (auto& v : opt->second_moments()) round_to_float(v);
  }
}

// -------------------------------------------------------------- checkpoint

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::size_t to_size(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos == s.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kIo, "checkpoint: bad value for " + key + ": '" + s + "'");
}

struct RawCheckpoint {
  std::map<std::string, std::string> manifest;
  std::map<std::string, Tensor> tensors;

  const std::string& get(const std::string& key) const {
    auto it = manifest.find(key);
    if (it == manifest.end()) fail(ErrorCode::kIo, "checkpoint: missing key " + key);
    return it->second;
  }
  const Tensor& tensor(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) fail(ErrorCode::kIo, "checkpoint: missing tensor " + name);
    return it->second;
  }
};

RawCheckpoint read_raw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot open checkpoint " + path);
  RawCheckpoint raw;
  std::string line;
  bool separator = false;
  while (std::getline(is, line)) {
    if (line == "---") {
      separator = true;
      break;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kIo, "checkpoint: malformed line '" + line + "'");
    raw.manifest[line.substr(0, eq)] = line.substr(eq + 1);
  }
  require(separator, ErrorCode::kIo, "checkpoint: missing tensor section");
  require(raw.get("magic") == kMagic, ErrorCode::kIo, path + " is not a checkpoint");
  for (const auto& name : split(raw.get("tensors"), ',')) {
    try {
      raw.tensors[name] = read_tensor(is);
    } catch (const Error& e) {
      fail(ErrorCode::kIo, "checkpoint: cannot read tensor " + name + ": " + e.what());
    }
  }
  return raw;
}

ModelConfig model_of(const RawCheckpoint& raw) {
  ModelConfig m;
  m.in_channels = to_size(raw.get("model.in_channels"), "model.in_channels");
  m.widths.clear();
  for (const auto& w : split(raw.get("model.widths"), ','))
    m.widths.push_back(to_size(w, "model.widths"));
  m.tasks = to_size(raw.get("model.tasks"), "model.tasks");
  m.text_dim = to_size(raw.get("model.text_dim"), "model.text_dim");
  m.att_dim = to_size(raw.get("model.att_dim"), "model.att_dim");
  m.validate();
  return m;
}

void copy_into(Tensor dst, const Tensor& src, const std::string& name) {
  require(dst.shape() == src.shape(), ErrorCode::kShape,
          "checkpoint tensor " + name + " is " + shape_str(src.shape()) + " but the model has " +
              shape_str(dst.shape()));
  std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
}

void copy_into(std::vector<double>& dst, const Tensor& src, const std::string& name) {
  require(dst.size() == src.numel(), ErrorCode::kShape,
          "checkpoint tensor " + name + " has the wrong size");
  std::copy(src.data().begin(), src.data().end(), dst.begin());
}

}  // namespace

Trainer::CheckpointInfo Trainer::inspect(const std::string& path) {
  const auto raw = read_raw(path);
  CheckpointInfo info;
  info.config_hash = raw.get("config_hash");
  info.epoch = to_size(raw.get("epoch"), "epoch");
  info.seed = to_size(raw.get("seed"), "seed");
  info.model = model_of(raw);
  info.noise = raw.get("noise") == "1";
  info.embeddings = decouple::DiseaseEmbeddings(raw.tensor("embeddings"));
  return info;
}

void Trainer::save(const std::string& path, const std::string& config_hash) const {
  std::vector<std::pair<std::string, Tensor>> tensors = net_.named_parameters();
  tensors.emplace_back("embeddings", net_.embeddings().matrix());
  for (std::size_t l = 0; l < noise_.blocks(); ++l) {
    tensors.emplace_back("noise." + std::to_string(l) + ".mu", noise_.raw_mu(l));
    tensors.emplace_back("noise." + std::to_string(l) + ".sigma", noise_.raw_sigma(l));
  }
  auto moments = [&](const char* tag, const AdamW& opt) {
    const auto& o = opt;
    for (std::size_t i = 0; i < o.params().size(); ++i) {
      const auto& shape = o.params()[i].shape();
      tensors.emplace_back(std::string("opt.") + tag + ".m." + std::to_string(i),
                           Tensor::from_data(shape, o.first_moments()[i]));
      tensors.emplace_back(std::string("opt.") + tag + ".v." + std::to_string(i),
                           Tensor::from_data(shape, o.second_moments()[i]));
    }
  };
  moments("main", opt_main_);
  moments("adv", opt_adv_);

  const auto& mc = net_.config();
  std::ostringstream os;
  os << "magic=" << kMagic << "\n"
     << "config_hash=" << config_hash << "\n"
     << "epoch=" << epoch_ << "\n"
     << "seed=" << config_.seed << "\n"
     << "model.in_channels=" << mc.in_channels << "\n"
     << "model.widths=" << join_sizes(mc.widths) << "\n"
     << "model.tasks=" << mc.tasks << "\n"
     << "model.text_dim=" << mc.text_dim << "\n"
     << "model.att_dim=" << mc.att_dim << "\n"
     << "noise=" << (noise_enabled() ? 1 : 0) << "\n"
     << "opt.main.steps=" << opt_main_.steps() << "\n"
     << "opt.adv.steps=" << opt_adv_.steps() << "\n"
     << "tensors=";
  for (std::size_t i = 0; i < tensors.size(); ++i) os << (i ? "," : "") << tensors[i].first;
  os << "\n---\n";
  for (const auto& [name, t] : tensors) write_tensor(os, t);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(f.good(), ErrorCode::kIo, "cannot write checkpoint " + path);
    const std::string bytes = os.str();
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(f.good(), ErrorCode::kIo, "short write to " + tmp);
  }
  require(std::rename(tmp.c_str(), path.c_str()) == 0, ErrorCode::kIo,
          "cannot move checkpoint into place at " + path);
}

void Trainer::load(const std::string& path, const std::string& expected_hash) {
  const auto raw = read_raw(path);
  if (!expected_hash.empty())
    require(raw.get("config_hash") == expected_hash, ErrorCode::kConfig,
            "checkpoint " + path + " was written with a different configuration");
  const auto model = model_of(raw);
  const auto& mc = net_.config();
  require(model.in_channels == mc.in_channels && model.widths == mc.widths &&
              model.tasks == mc.tasks && model.text_dim == mc.text_dim &&
              model.att_dim == mc.att_dim,
          ErrorCode::kShape, "checkpoint model shape does not match the configured model");
  require((raw.get("noise") == "1") == noise_enabled(), ErrorCode::kConfig,
          "checkpoint and configuration disagree on whether noise is enabled");
  const auto& emb = raw.tensor("embeddings");
  require(emb.shape() == net_.embeddings().matrix().shape() &&
              std::equal(emb.data().begin(), emb.data().end(),
                         net_.embeddings().matrix().data().begin()),
          ErrorCode::kConfig, "checkpoint embeddings differ from the configured ones");

  for (auto& [name, p] : net_.named_parameters()) copy_into(p, raw.tensor(name), name);
  for (std::size_t l = 0; l < noise_.blocks(); ++l) {
    const std::string base = "noise." + std::to_string(l);
    copy_into(noise_.raw_mu(l), raw.tensor(base + ".mu"), base + ".mu");
    copy_into(noise_.raw_sigma(l), raw.tensor(base + ".sigma"), base + ".sigma");
  }
  auto moments = [&](const char* tag, AdamW& opt) {
    for (std::size_t i = 0; i < opt.params().size(); ++i) {
      const std::string m = std::string("opt.") + tag + ".m." + std::to_string(i);
      const std::string v = std::string("opt.") + tag + ".v." + std::to_string(i);
      copy_into(opt.first_moments()[i], raw.tensor(m), m);
      copy_into(opt.second_moments()[i], raw.tensor(v), v);
    }
    const std::string key = std::string("opt.") + tag + ".steps";
    opt.set_steps(to_size(raw.get(key), key));
  };
  moments("main", opt_main_);
  moments("adv", opt_adv_);
  epoch_ = to_size(raw.get("epoch"), "epoch");
  opt_main_.set_lr(config_.lr_at(std::min(epoch_, config_.epochs)));
}

}  // namespace partscreen::train
