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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "data/dataset.hpp"
#include "tensor/serialize.hpp"

namespace partscreen::data {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEnvelope = 4.0;  // Gabor envelope std, pixels
constexpr int kFieldBand = 3;

enum Stream : std::uint64_t { kLabels = 1, kStyle = 2, kMotif = 3, kNoise = 4 };

struct Wave {
  int kx, ky;
};
constexpr Wave kWaves[] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}};

double motif_frequency(std::size_t task) {
  return 0.14 + 0.08 * static_cast<double>(task / 2);
}

}  // namespace

void Dataset::validate() const {
  require(height > 0 && width > 0 && channels > 0, ErrorCode::kShape,
          "dataset " + name + ": empty image extent");
  require(images.size() == size() * image_numel(), ErrorCode::kShape,
          "dataset " + name + ": image buffer does not match label rows");
  require(size() > 0, ErrorCode::kInvalidArgument, "dataset " + name + " is empty");
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t t = 0; t < tasks(); ++t) {
      const bool listed =
          std::find(labelled_tasks.begin(), labelled_tasks.end(), t) != labelled_tasks.end();
      if (!listed)
        require(labels.at(i, t) == labeling::kUnknown, ErrorCode::kInvalidArgument,
                "dataset " + name + ": label present for unannotated task " +
                    std::to_string(t));
    }
}

std::vector<std::vector<std::size_t>> GenSpec::resolved_label_map() const {
  if (!label_map.empty()) return label_map;
  std::vector<std::vector<std::size_t>> m(domains);
  for (std::size_t k = 0; k < domains; ++k) {
    m[k].push_back(k % tasks);
    if (tasks > 1) m[k].push_back((k + 1) % tasks);
    std::sort(m[k].begin(), m[k].end());
    m[k].erase(std::unique(m[k].begin(), m[k].end()), m[k].end());
  }
  return m;
}

void GenSpec::validate() const {
  require(domains >= 1, ErrorCode::kConfig, "need at least one training domain");
  require(tasks >= 1 && tasks <= kMaxTasks, ErrorCode::kConfig,
          "task count must lie in [1, " + std::to_string(kMaxTasks) + "]");
  require(n_train >= 1 && n_test >= 1 && n_unseen >= 1, ErrorCode::kConfig,
          "every split needs at least one sample");
  require(image_size >= 16, ErrorCode::kConfig, "image_size must be >= 16");
  require(positive_rate > 0.0 && positive_rate < 1.0, ErrorCode::kConfig,
          "positive_rate must lie in (0, 1)");
  require(noise_sigma >= 0.0 && motif_contrast > 0.0, ErrorCode::kConfig,
          "noise_sigma must be >= 0 and motif_contrast > 0");
  const auto map = resolved_label_map();
  require(map.size() == domains, ErrorCode::kConfig,
          "label map has " + std::to_string(map.size()) + " rows for " +
              std::to_string(domains) + " domains");
  std::vector<bool> covered(tasks, false);
  for (const auto& row : map)
    for (auto t : row) {
      require(t < tasks, ErrorCode::kConfig, "label map names task " + std::to_string(t) +
                                                 " but only " + std::to_string(tasks) +
                                                 " exist");
      covered[t] = true;
    }
  for (std::size_t t = 0; t < tasks; ++t)
    require(covered[t], ErrorCode::kConfig,
            "task " + std::to_string(t) + " is not annotated in any training domain");
}

DomainStyle training_style(std::size_t domain, std::size_t domains) {
  DomainStyle s;
  s.offset = domains == 1 ? 0.0
                          : -0.6 + 1.2 * static_cast<double>(domain) /
                                       static_cast<double>(domains - 1);
  s.wave_amplitude = 0.3;
  const Wave w = kWaves[domain % std::size(kWaves)];
  s.wave_kx = w.kx;
  s.wave_ky = w.ky;
  s.field_gain = 0.15;
  return s;
}

DomainStyle unseen_style(const GenSpec& spec) {
  DomainStyle s;
  s.offset = spec.unseen_offset;
  s.wave_amplitude = 0.5;
  s.wave_kx = 2;
  s.wave_ky = 2;
  s.field_gain = 0.3;
  return s;
}

std::vector<double> style_component(const DomainStyle& style, std::size_t size,
                                    Rng& rng) {
  std::vector<double> out(size * size, style.offset);
  const double n = static_cast<double>(size);
  const double wave_phase = rng.uniform(0.0, kTwoPi);
  // Half-plane of integer frequencies with |k| <= band, DC excluded.
  struct Coef {
    int kx, ky;
    double a, b;
  };
  std::vector<Coef> coefs;
  for (int ky = 0; ky <= kFieldBand; ++ky)
    for (int kx = -kFieldBand; kx <= kFieldBand; ++kx) {
      if (ky == 0 && kx <= 0) continue;
      coefs.push_back({kx, ky, rng.normal(), rng.normal()});
    }
  const double norm = style.field_gain / std::sqrt(static_cast<double>(coefs.size()));
  // cos/sin(2 pi k t / n) for |k| <= kTableBand, combined with the angle
  // addition formulas.
  constexpr int kTableBand = std::max(kFieldBand, 2);
  const std::size_t nk = 2 * kTableBand + 1;
  require(std::abs(style.wave_kx) <= kTableBand && std::abs(style.wave_ky) <= kTableBand,
          ErrorCode::kInvalidArgument, "style wave frequency out of range");
  std::vector<double> ct(nk * size), st(nk * size);
  for (int k = -kTableBand; k <= kTableBand; ++k)
    for (std::size_t t = 0; t < size; ++t) {
      const double ang = kTwoPi * double(k) * double(t) / n;
      ct[(k + kTableBand) * size + t] = std::cos(ang);
      st[(k + kTableBand) * size + t] = std::sin(ang);
    }
  auto cos_at = [&](int k, std::size_t t) { return ct[(k + kTableBand) * size + t]; };
  auto sin_at = [&](int k, std::size_t t) { return st[(k + kTableBand) * size + t]; };
  const double cp = std::cos(wave_phase), sp = std::sin(wave_phase);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      // cos(a + b + phase) with a, b the x and y parts of the wave.
      const double ca = cos_at(style.wave_kx, x) * cos_at(style.wave_ky, y) -
                        sin_at(style.wave_kx, x) * sin_at(style.wave_ky, y);
      const double sa = sin_at(style.wave_kx, x) * cos_at(style.wave_ky, y) +
                        cos_at(style.wave_kx, x) * sin_at(style.wave_ky, y);
      const double v = style.wave_amplitude * (ca * cp - sa * sp);
      double f = 0.0;
      for (const auto& c : coefs) {
        const double cx = cos_at(c.kx, x), sx = sin_at(c.kx, x);
        const double cy = cos_at(c.ky, y), sy = sin_at(c.ky, y);
        f += c.a * (cx * cy - sx * sy) + c.b * (sx * cy + cx * sy);
      }
      out[y * size + x] += v + norm * f;
    }
  return out;
}

std::vector<double> motif_component(std::size_t task, std::size_t size, Rng& rng,
                                    double contrast) {
  require(task < kMaxTasks, ErrorCode::kInvalidArgument, "task index out of range");
  const double margin = 2.5 * kEnvelope;
  const double hi = static_cast<double>(size) - 1.0 - margin;
  const double cx = rng.uniform(margin, hi), cy = rng.uniform(margin, hi);
  const double phase = rng.uniform(0.0, kTwoPi);
  const double f = motif_frequency(task);
  const bool vertical_waves = task % 2 == 0;  // varies along x
  std::vector<double> out(size * size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = double(x) - cx, dy = double(y) - cy;
      const double env = std::exp(-(dx * dx + dy * dy) / (2.0 * kEnvelope * kEnvelope));
      const double u = vertical_waves ? dx : dy;
      out[y * size + x] = contrast * env * std::cos(kTwoPi * f * u + phase);
    }
  return out;
}

SampleRecipe render_sample(const GenSpec& spec, const DomainStyle& style,
                           std::uint64_t sample_seed, long skip_task) {
  const std::size_t s = spec.image_size;
  SampleRecipe r;
  Rng label_rng(derive_seed(sample_seed, {kLabels}));
  r.present.resize(spec.tasks);
  for (auto& p : r.present) p = label_rng.bernoulli(spec.positive_rate) ? 1 : 0;

  Rng style_rng(derive_seed(sample_seed, {kStyle}));
  r.image = style_component(style, s, style_rng);
  for (std::size_t t = 0; t < spec.tasks; ++t) {
    if (!r.present[t]) continue;
    if (static_cast<long>(t) == skip_task) {
      r.present[t] = 0;
      continue;
    }
    Rng motif_rng(derive_seed(sample_seed, {kMotif, t}));
    const auto m = motif_component(t, s, motif_rng, spec.motif_contrast);
    for (std::size_t k = 0; k < m.size(); ++k) r.image[k] += m[k];
  }
  Rng noise_rng(derive_seed(sample_seed, {kNoise}));
  for (auto& v : r.image) v += spec.noise_sigma * noise_rng.normal();
  round_to_float(r.image);
  return r;
}

namespace {

Dataset make_split(const GenSpec& spec, const std::string& name, std::size_t domain,
                   const DomainStyle& style, std::size_t n, std::uint64_t split_tag,
                   const std::vector<std::size_t>& annotated) {
  Dataset d;
  d.name = name;
  d.domain = domain;
  d.height = d.width = spec.image_size;
  d.labelled_tasks = annotated;
  d.images.reserve(n * d.image_numel());
  std::vector<std::int8_t> labels(n * spec.tasks, labeling::kUnknown);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = render_sample(spec, style, derive_seed(spec.seed, {split_tag, domain, i}));
    d.images.insert(d.images.end(), r.image.begin(), r.image.end());
    for (auto t : annotated) labels[i * spec.tasks + t] = r.present[t];
  }
  d.labels = labeling::LabelMatrix(n, spec.tasks, std::move(labels));
  return d;
}

}  // namespace

GeneratedData generate(const GenSpec& spec) {
  spec.validate();
  const auto map = spec.resolved_label_map();
  GeneratedData out;
  for (std::size_t k = 0; k < spec.domains; ++k) {
    const auto style = training_style(k, spec.domains);
    out.train.push_back(make_split(spec, "train_" + std::to_string(k), k, style,
                                   spec.n_train, 1, map[k]));
    out.test.push_back(make_split(spec, "test_" + std::to_string(k), k, style,
                                  spec.n_test, 2, map[k]));
  }
  std::vector<std::size_t> all(spec.tasks);
  for (std::size_t t = 0; t < spec.tasks; ++t) all[t] = t;
  out.unseen = make_split(spec, "unseen", spec.domains, unseen_style(spec), spec.n_unseen,
                          3, all);
  return out;
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void write_split(const Dataset& d, const fs::path& root) {
  const fs::path dir = root / d.name;
  fs::create_directories(dir);
  save_tensor_file((dir / "images.bin").string(),
                   Tensor::from_data({d.size(), d.channels, d.height, d.width}, d.images));
  std::ofstream lf(dir / "labels.txt");
  require(static_cast<bool>(lf), ErrorCode::kIo, "cannot write " + (dir / "labels.txt").string());
  for (std::size_t i = 0; i < d.size(); ++i) {
    lf << d.domain;
    for (auto v : d.labels.row(i)) lf << ' ' << int(v);
    lf << '\n';
  }
  require(static_cast<bool>(lf), ErrorCode::kIo, "write failed for " + d.name);
}

Dataset read_split(const fs::path& root, const std::string& name, std::size_t domain,
                   const std::vector<std::size_t>& annotated) {
  Dataset d;
  d.name = name;
  d.domain = domain;
  d.labelled_tasks = annotated;
  const Tensor img = load_tensor_file((root / name / "images.bin").string());
  require(img.rank() == 4, ErrorCode::kShape, name + ": images must be [N, C, H, W]");
  d.channels = img.dim(1);
  d.height = img.dim(2);
  d.width = img.dim(3);
  d.images.assign(img.data().begin(), img.data().end());
  std::ifstream lf(root / name / "labels.txt");
  require(static_cast<bool>(lf), ErrorCode::kIo, "cannot read labels of " + name);
  std::vector<std::int8_t> values;
  std::size_t rows = 0, tasks = 0;
  std::string line;
  while (std::getline(lf, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t dom = 0;
    require(static_cast<bool>(ls >> dom) && dom == domain, ErrorCode::kIo,
            name + ": label row with wrong domain id");
    std::size_t count = 0;
    int v = 0;
    while (ls >> v) {
      require(v == 1 || v == 0 || v == -1, ErrorCode::kIo, name + ": bad label value");
      values.push_back(static_cast<std::int8_t>(v));
      ++count;
    }
    if (rows == 0) tasks = count;
    require(count == tasks && count > 0, ErrorCode::kIo, name + ": ragged label rows");
    ++rows;
  }
  require(rows == img.dim(0), ErrorCode::kIo,
          name + ": " + std::to_string(rows) + " label rows for " +
              std::to_string(img.dim(0)) + " images");
  d.labels = labeling::LabelMatrix(rows, tasks, std::move(values));
  d.validate();
  return d;
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

void dump(const GeneratedData& data, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  require(!ec && fs::is_directory(root), ErrorCode::kIo, "cannot create directory " + dir);
  std::ofstream mf(root / "manifest.txt");
  require(static_cast<bool>(mf), ErrorCode::kIo, "cannot write manifest in " + dir);
  auto entry = [&](const char* kind, const Dataset& d) {
    write_split(d, root);
    mf << kind << ' ' << d.name << ' ' << d.domain << ' ' << join(d.labelled_tasks) << '\n';
  };
  for (const auto& d : data.train) entry("train", d);
  for (const auto& d : data.test) entry("test", d);
  entry("unseen", data.unseen);
  require(static_cast<bool>(mf), ErrorCode::kIo, "manifest write failed");
}

GeneratedData load(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream mf(root / "manifest.txt");
  require(static_cast<bool>(mf), ErrorCode::kIo, "no manifest.txt in " + dir);
  GeneratedData out;
  bool have_unseen = false;
  std::string kind, name, tasks;
  std::size_t domain = 0;
  while (mf >> kind >> name >> domain >> tasks) {
    Dataset d = read_split(root, name, domain, parse_list(tasks));
    if (kind == "train")
      out.train.push_back(std::move(d));
    else if (kind == "test")
      out.test.push_back(std::move(d));
    else if (kind == "unseen") {
      out.unseen = std::move(d);
      have_unseen = true;
    } else {
      fail(ErrorCode::kIo, "unknown split kind '" + kind + "' in manifest");
    }
  }
  require(!out.train.empty() && have_unseen, ErrorCode::kIo,
          "dump in " + dir + " lacks training or unseen splits");
  return out;
}

std::string directory_digest(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Fnv1a h;
  for (const auto& f : files) {
    h.update(fs::relative(f, dir).generic_string());
    std::ifstream in(f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    h.update(ss.str());
  }
  return h.hex();
}

}  // namespace partscreen::data
