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


#ifndef PARTSCREEN_TRAIN_TRAINER_HPP_
#define PARTSCREEN_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "augment/spectral_augment.hpp"
#include "data/dataset.hpp"
#include "labeling/labels.hpp"
#include "losses/losses.hpp"
#include "metrics/metrics.hpp"
#include "train/model.hpp"
#include "train/optimizer.hpp"

namespace partscreen::train {

struct TrainConfig {
  double tau = 0.95;
  double r = 0.2;
  double p = 0.2;
  losses::LossWeights weights;
  std::size_t batch_size = 16;
  double lr = 1e-5;
  double weight_decay = 5e-4;
  double lr_decay = 0.1;
  std::size_t lr_step = 10;  // epochs between decays
  std::size_t epochs = 20;
  double lr_adv = 1e-3;
  double noise_init = 0.1;  // initial Sigma; 0 switches the noise off
  double clip_norm = 5.0;   // 0 disables clipping
  bool enable_s1 = true;
  bool enable_s2 = true;
  bool enable_adversarial = true;
  // Leading epochs that train the teacher branch alone.
  std::size_t warmup_epochs = 0;
  bool flip = true;
  bool independent_student_flip = false;
  std::optional<double> mmd_bandwidth;  // unset: median heuristic
  std::size_t eval_every = 1;           // 0: evaluate after the last epoch only
  std::uint64_t seed = 0;

  void validate() const;
  double lr_at(std::size_t epoch) const;
};

struct Batch {
  Tensor images;  // [B, C, H, W]
  labeling::PartialLabels labels;
  std::vector<std::size_t> source;  // training dataset of each row
};

// All randomness consumed by one iteration.
struct StepInputs {
  Tensor teacher_images;
  Tensor student_images;
  augment::DropMask drop;
  std::vector<std::vector<double>> z_mu, z_sigma;          // main step, per block
  std::vector<std::vector<double>> adv_z_mu, adv_z_sigma;  // adversarial step
};

struct BranchOutputs {
  Network::Head teacher, s1, s2;
  labeling::PseudoLabels pseudo;
  Tensor teacher_ce, s1_ce, s2_cls, mmd, kl, s2_total, total;
};

// Stop-gradient targets of the student losses. forward() derives them from
// the teacher output unless given explicitly.
struct TeacherTargets {
  Tensor features;  // [B, T, C]
  Tensor probs;     // [B, T]
  labeling::PseudoLabels pseudo;
};

struct StepResult {
  double loss = 0.0;
  bool skipped = false;
};

// Draws from derive_seed(seed, {epoch, k}) a permutation of every dataset
// and fills each batch with batch_size / K consecutive entries of each,
// cycling datasets shorter than the longest one.
class BalancedSampler {
 public:
  BalancedSampler(std::vector<std::size_t> sizes, std::size_t batch_size,
                  std::uint64_t seed);
  std::size_t iterations() const { return iterations_; }
  std::size_t per_dataset() const { return per_; }
  void start_epoch(std::size_t epoch);
  // (dataset, index) pairs, dataset-major.
  std::vector<std::pair<std::size_t, std::size_t>> batch(std::size_t it) const;

 private:
  std::vector<std::size_t> sizes_;
  std::size_t per_ = 0, iterations_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<std::size_t>> perms_;
};

Batch make_batch(const std::vector<data::Dataset>& sets,
                 const std::vector<std::pair<std::size_t, std::size_t>>& picks);

// Per-dataset, per-task scores plus their summary.
struct EvalReport {
  std::vector<metrics::TaskScore> scores;
  metrics::Summary summary;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss_total = 0.0, loss_adv = 0.0, lr = 0.0;
  std::size_t skipped = 0;
  bool evaluated = false;
  EvalReport in_domain, unseen;
};

struct FitObserver {
  std::function<void(std::size_t epoch, std::size_t it, const Batch&)> on_batch;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct EvalSets {
  std::vector<data::Dataset> in_domain;
  std::optional<data::Dataset> unseen;
};

class Trainer {
 public:
  Trainer(TrainConfig config, ModelConfig model, decouple::DiseaseEmbeddings embeddings);

  const TrainConfig& config() const { return config_; }
  const Network& network() const { return net_; }
  const augment::NoiseScales& noise() const { return noise_; }
  bool noise_enabled() const { return noise_.blocks() > 0; }
  AdamW& main_optimizer() { return opt_main_; }
  AdamW& adv_optimizer() { return opt_adv_; }
  std::size_t epoch() const { return epoch_; }
  // Branch switches for the current epoch (warm-up epochs run the teacher only).
  bool s1_active() const;
  bool s2_active() const;
  bool adversarial_active() const;

  // Every draw comes from its own stream derived from step_seed, so
  // switching a branch off leaves the other draws unchanged.
  StepInputs draw_inputs(const Batch& batch, std::uint64_t step_seed) const;
  BranchOutputs forward(const Batch& batch, const StepInputs& in,
                        const TeacherTargets* targets = nullptr) const;
  // Student-2 branch: LF-Uncert after every block.
  Network::Head student2(const Tensor& images, const std::vector<std::vector<double>>& z_mu,
                         const std::vector<std::vector<double>>& z_sigma,
                         const Tensor* first_block = nullptr) const;
  Tensor adversarial_objective(const Batch& batch, const StepInputs& in) const;

  StepResult main_step(const Batch& batch, const StepInputs& in);
  StepResult adversarial_step(const Batch& batch, const StepInputs& in);

  // Teacher path only; [N, T] probabilities.
  Tensor infer(const Tensor& images) const;
  EvalReport evaluate(const std::vector<data::Dataset>& sets,
                      metrics::FMode mode = metrics::FMode::kMacro) const;

  // Runs the remaining epochs (from epoch() to config().epochs).
  std::vector<EpochRecord> fit(const std::vector<data::Dataset>& train, const EvalSets& eval,
                               const FitObserver& observer = {});

  // Snapshot everything to float precision; done at every epoch boundary.
  void round_state();

  struct CheckpointInfo {
    std::string config_hash;
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    ModelConfig model;
    bool noise = false;
    decouple::DiseaseEmbeddings embeddings;
  };
  static CheckpointInfo inspect(const std::string& path);

  void save(const std::string& path, const std::string& config_hash) const;
  // Restores a checkpoint written by save(); the model shape must match.
  void load(const std::string& path, const std::string& expected_hash = "");

 private:
  void set_theta_trainable(bool on);
  void set_noise_trainable(bool on);
  StepResult apply(AdamW& opt, Tensor loss, double clip);

  TrainConfig config_;
  Network net_;
  augment::NoiseScales noise_;
  AdamW opt_main_, opt_adv_;
  std::size_t epoch_ = 0;
};

// Flips [B, C, H, W] images horizontally where flags[b] is set.
Tensor hflip(const Tensor& images, const std::vector<char>& flags);

}  // namespace partscreen::train

#endif  // PARTSCREEN_TRAIN_TRAINER_HPP_
