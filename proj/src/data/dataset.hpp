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


#ifndef PARTSCREEN_DATA_DATASET_HPP_
#define PARTSCREEN_DATA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/random.hpp"
#include "labeling/labels.hpp"

// Synthetic multi-domain screening data. Each image is a domain style made
// of low spatial frequencies (offset, slow wave, smooth noise field) plus one
// high-frequency Gabor motif per present task plus white noise.
namespace partscreen::data {

struct Dataset {
  std::string name;
  std::size_t domain = 0;
  std::size_t channels = 1, height = 0, width = 0;
  std::vector<double> images;  // [N, C, H, W]
  labeling::LabelMatrix labels;
  std::vector<std::size_t> labelled_tasks;

  std::size_t size() const { return labels.rows(); }
  std::size_t tasks() const { return labels.tasks(); }
  std::size_t image_numel() const { return channels * height * width; }
  std::span<const double> image(std::size_t i) const {
    return std::span<const double>(images).subspan(i * image_numel(), image_numel());
  }
  void validate() const;
};

struct DomainStyle {
  double offset = 0.0;
  double wave_amplitude = 0.0;
  int wave_kx = 0, wave_ky = 0;  // cycles per image, |k| <= 2
  double field_gain = 0.0;       // smooth noise field, |k| <= 3
};

struct GenSpec {
  std::size_t domains = 4;  // training domains; one more is held out
  std::size_t tasks = 4;
  std::size_t n_train = 200, n_test = 100, n_unseen = 200;
  std::size_t image_size = 64;
  // label_map[k] lists the tasks annotated in training domain k. Empty means
  // the default: domain k annotates tasks k and k + 1 (mod T).
  std::vector<std::vector<std::size_t>> label_map;
  double positive_rate = 0.5;
  double noise_sigma = 0.05;
  double motif_contrast = 3.0;
  double unseen_offset = 1.5;
  std::uint64_t seed = 0;

  std::vector<std::vector<std::size_t>> resolved_label_map() const;
  void validate() const;
};

struct GeneratedData {
  std::vector<Dataset> train;  // one per training domain, partially labelled
  std::vector<Dataset> test;   // in-domain, same annotation subset as train
  Dataset unseen;              // held-out domain, fully labelled
};

// Fraction of the Nyquist frequency separating style from motif content.
constexpr double kStyleCutoff = 0.15;
constexpr std::size_t kMaxTasks = 8;

DomainStyle training_style(std::size_t domain, std::size_t domains);
DomainStyle unseen_style(const GenSpec& spec);

// Individual image components (size x size, row-major).
std::vector<double> style_component(const DomainStyle& style, std::size_t size,
                                    Rng& rng);
std::vector<double> motif_component(std::size_t task, std::size_t size,
                                    Rng& rng, double contrast);

// Renders one image from its own seed. Components draw from separate
// streams, so skipping a motif (skip_task) leaves all other components
// unchanged; this gives negative "twins" of positive images.
struct SampleRecipe {
  std::vector<std::int8_t> present;  // per task, 1 or 0
  std::vector<double> image;
};
SampleRecipe render_sample(const GenSpec& spec, const DomainStyle& style,
                           std::uint64_t sample_seed,
                           long skip_task = -1);

GeneratedData generate(const GenSpec& spec);

// Directory dump: one sub-directory per split holding images.bin (tensor
// format, [N, 1, H, W]) and labels.txt (domain id then T labels per row),
// plus manifest.txt listing the splits.
void dump(const GeneratedData& data, const std::string& dir);
GeneratedData load(const std::string& dir);

// FNV-1a over every file of a dump, in name order.
std::string directory_digest(const std::string& dir);

}  // namespace partscreen::data

#endif  // PARTSCREEN_DATA_DATASET_HPP_
