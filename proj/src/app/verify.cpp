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


#include "app/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "augment/spectral_augment.hpp"
#include "common/error.hpp"
#include "common/random.hpp"
#include "decouple/decouple.hpp"
#include "labeling/labels.hpp"
#include "losses/losses.hpp"
#include "metrics/metrics.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"
#include "tensor/spectral.hpp"
#include "train/trainer.hpp"

namespace partscreen::app {

namespace {

using labeling::PartialLabels;

constexpr double kGradTol = 1e-4;

Check bound(const std::string& suite, const std::string& name, double measured, double tol) {
  return {suite, name, measured, tol, std::isfinite(measured) && measured <= tol};
}

// Counts violations; passes only at zero.
Check exact(const std::string& suite, const std::string& name, double violations) {
  return {suite, name, violations, 0.0, violations == 0.0};
}

std::vector<double> uniform_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

Tensor uniform_tensor(Rng& rng, const Shape& shape, double lo, double hi) {
  return Tensor::from_data(shape, uniform_vec(rng, numel_of(shape), lo, hi));
}

PartialLabels random_labels(Rng& rng, std::size_t rows, std::size_t tasks, double unknown) {
  std::vector<std::int8_t> v(rows * tasks);
  for (auto& y : v)
    y = rng.bernoulli(unknown) ? labeling::kUnknown
                               : (rng.bernoulli(0.5) ? labeling::kPositive : labeling::kNegative);
  return PartialLabels(rows, tasks, std::move(v));
}

Tensor bce(const VerifyOptions& o, const Tensor& probs, const labeling::LabelMatrix& labels,
           losses::MaskSource source = losses::MaskSource::kKnown) {
  auto l = losses::partial_bce(probs, labels, source);
  return o.flip_partial_bce_sign ? ops::scale(l, -1.0) : l;
}

// Direct-summation centered DFT of one plane, independent of the library.
std::vector<std::complex<double>> naive_centered_dft(std::span<const double> x, std::size_t h,
                                                     std::size_t w) {
  std::vector<std::complex<double>> out(h * w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double u = static_cast<double>(long(i) - long(h / 2));
      const double v = static_cast<double>(long(j) - long(w / 2));
      std::complex<double> s = 0.0;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x0 = 0; x0 < w; ++x0) {
          const double ang = -2.0 * std::numbers::pi * (u * double(y) / double(h) +
                                                        v * double(x0) / double(w));
          s += x[y * w + x0] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      out[i * w + j] = s;
    }
  return out;
}

Check grad_check(const std::string& name, const ScalarFn& f, std::vector<Tensor> inputs) {
  const auto r = check_gradients(f, std::move(inputs));
  return bound("gradients", name, r.max_rel_error, kGradTol);
}

}  // namespace

std::vector<Check> fft_suite(const VerifyOptions& o) {
  Rng rng(derive_seed(o.seed, {0xFF7}));
  double roundtrip = 0.0, parseval = 0.0, naive = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 1 + rng.below(32);
    const std::size_t w = 1 + rng.below(32);
    const std::size_t c = 1 + rng.below(8);
    const Tensor x = uniform_tensor(rng, {c, h, w}, -2.0, 2.0);
    const auto spec = spectral::fft2_centered(x);
    const auto back = spectral::ifft2_centered(spec);
    for (std::size_t i = 0; i < x.numel(); ++i)
      roundtrip = std::max(roundtrip, std::abs(back.data()[i] - x.data()[i]));
    double e_space = 0.0, e_freq = 0.0;
    for (double v : x.data()) e_space += v * v;
    for (double a : spec.amplitude.data()) e_freq += a * a;
    e_freq /= static_cast<double>(h * w);
    parseval = std::max(parseval, std::abs(e_freq - e_space) / std::max(e_space, 1e-300));
    if (trial % 20 == 0) {
      const auto ref = naive_centered_dft(x.data().subspan(0, h * w), h, w);
      for (std::size_t k = 0; k < h * w; ++k) {
        const double a = spec.amplitude.data()[k], ph = spec.phase.data()[k];
        naive = std::max(naive, std::abs(std::polar(a, ph) - ref[k]));
      }
    }
  }
  return {bound("fft", "roundtrip max abs error (100 tensors)", roundtrip, 1e-5),
          bound("fft", "Parseval relative error (100 tensors)", parseval, 1e-4),
          bound("fft", "matches direct-summation DFT", naive, 1e-9)};
}

std::vector<Check> gradient_suite(const VerifyOptions& o) {
  Rng rng(derive_seed(o.seed, {0x6AD}));
  std::vector<Check> out;

  {
    const auto emb = decouple::DiseaseEmbeddings::deterministic(3, 4, o.seed);
    auto params = decouple::DecoupleParams::init(3, 4, 5, rng);
    const Tensor f = uniform_tensor(rng, {2, 3, 4, 4}, -1.0, 1.0);
    const auto wts = uniform_vec(rng, 2 * 3 * 3, -1.0, 1.0);
    out.push_back(grad_check(
        "semantic decoupling",
        [&](const std::vector<Tensor>& in) {
          decouple::DecoupleParams p{in[1], in[2], in[3]};
          return ops::dot_const(decouple::decouple(in[0], emb, p), wts);
        },
        {f, params.w1, params.w2, params.v}));
  }

  const Tensor probs = uniform_tensor(rng, {4, 3}, 0.05, 0.95);
  const Tensor probs2 = uniform_tensor(rng, {4, 3}, 0.05, 0.95);
  const auto labels = random_labels(rng, 4, 3, 0.3);
  const auto pseudo = labeling::generate_pseudo_labels(
      std::vector<double>{0.99, 0.5, 0.01, 0.97, 0.02, 0.4, 0.6, 0.98, 0.03, 0.01, 0.99, 0.5},
      labels, 0.95);
  const Tensor feats = uniform_tensor(rng, {4, 3, 5}, -1.0, 1.0);
  const Tensor feats2 = uniform_tensor(rng, {4, 3, 5}, -1.0, 1.0);
  const losses::LossWeights weights;
  const auto kernel = losses::KernelConfig::fixed(1.3);

  out.push_back(grad_check(
      "partial BCE",
      [&](const std::vector<Tensor>& in) { return bce(o, in[0], labels); }, {probs}));
  out.push_back(grad_check(
      "student-2 classification loss",
      [&](const std::vector<Tensor>& in) {
        return losses::s2_classification_loss(in[0], labels, pseudo, weights);
      },
      {probs}));
  out.push_back(grad_check(
      "MMD consistency (fixed bandwidth)",
      [&](const std::vector<Tensor>& in) { return losses::mmd_loss(feats, in[0], kernel); },
      {feats2}));
  out.push_back(grad_check(
      "KL consistency",
      [&](const std::vector<Tensor>& in) { return losses::kl_known(probs, in[0], labels); },
      {probs2}));
  out.push_back(grad_check(
      "adversarial loss",
      [&](const std::vector<Tensor>& in) { return losses::adversarial_loss(labels, in[0]); },
      {probs2}));
  out.push_back(grad_check(
      "student-2 total",
      [&](const std::vector<Tensor>& in) {
        return losses::s2_total(losses::s2_classification_loss(in[0], labels, pseudo, weights),
                                losses::mmd_loss(feats, in[1], kernel),
                                losses::kl_known(probs, in[0], labels), weights);
      },
      {probs2, feats2}));

  {
    const Tensor x = uniform_tensor(rng, {2, 3, 6, 6}, -1.0, 1.0);
    const auto mask = augment::draw_drop_mask(x.shape(), 0.5, 0.5, rng);
    const auto wts = uniform_vec(rng, x.numel(), -1.0, 1.0);
    out.push_back(grad_check(
        "LF-Dropout with frozen mask",
        [&](const std::vector<Tensor>& in) {
          return ops::dot_const(ops::square(augment::lf_dropout(in[0], mask)), wts);
        },
        {x}));
  }
  {
    const Tensor x = uniform_tensor(rng, {2, 2, 6, 6}, -1.0, 1.0);
    augment::NoiseScales scales({2}, 0.3);
    const auto z_mu = uniform_vec(rng, 4, -1.5, 1.5);
    const auto z_sigma = uniform_vec(rng, 4, -1.5, 1.5);
    const auto wts = uniform_vec(rng, x.numel(), -1.0, 1.0);
    const Tensor raw_mu = scales.raw_mu(0).detach(), raw_sigma = scales.raw_sigma(0).detach();
    for (const bool windowed : {false, true}) {
      out.push_back(grad_check(
          windowed ? "windowed LF-Uncert with frozen z (input, s_mu, s_sigma)"
                   : "LF-Uncert with frozen z (input, s_mu, s_sigma)",
          [&](const std::vector<Tensor>& in) {
            const auto f = windowed ? augment::lf_uncert_windowed : augment::lf_uncert;
            auto y = f(in[0], ops::softplus(in[1]), ops::softplus(in[2]), 0.5, z_mu, z_sigma);
            return ops::dot_const(ops::square(y), wts);
          },
          {x, raw_mu, raw_sigma}));
    }
  }

  {
    // Total loss through a two-block backbone. The student targets are
    // stop-gradient, so the finite-difference reference holds them at the
    // base point.
    train::ModelConfig mc;
    mc.widths = {3, 4};
    mc.tasks = 2;
    mc.text_dim = 4;
    mc.att_dim = 5;
    train::TrainConfig tc;
    tc.tau = 0.6;
    tc.r = 0.5;
    tc.p = 0.5;
    tc.noise_init = 0.5;
    tc.mmd_bandwidth = 1.0;
    tc.seed = derive_seed(o.seed, {0xB0B});
    train::Trainer trainer(tc, mc, decouple::DiseaseEmbeddings::deterministic(2, 4, tc.seed));
    Rng r2(tc.seed);
    for (auto& [name, p] : trainer.network().named_parameters())
      if (name.rfind("classifier", 0) == 0)
        for (auto& v : p.mutable_data()) v = r2.uniform(-1.0, 1.0);
    train::Batch batch;
    batch.images = uniform_tensor(r2, {4, 1, 16, 16}, -1.0, 1.0);
    batch.labels = random_labels(r2, 4, 2, 0.4);
    batch.source = {0, 0, 1, 1};
    const auto in = trainer.draw_inputs(batch, tc.seed);
    const auto base = trainer.forward(batch, in);
    const train::TeacherTargets targets{base.teacher.features.detach().clone(),
                                        base.teacher.probs.detach().clone(), base.pseudo};
    out.push_back(grad_check(
        "L_total through a 2-block backbone (all network parameters)",
        [&](const std::vector<Tensor>&) { return trainer.forward(batch, in, &targets).total; },
        trainer.network().parameters()));
    std::vector<Tensor> noise;
    for (std::size_t l = 0; l < trainer.noise().blocks(); ++l) {
      noise.push_back(trainer.noise().raw_mu(l));
      noise.push_back(trainer.noise().raw_sigma(l));
    }
    out.push_back(grad_check(
        "L_adv through a 2-block backbone (noise scales)",
        [&](const std::vector<Tensor>&) { return trainer.adversarial_objective(batch, in); },
        noise));
  }
  return out;
}

std::vector<Check> augmentation_suite(const VerifyOptions& o) {
  Rng rng(derive_seed(o.seed, {0xA06}));
  const Tensor x = uniform_tensor(rng, {2, 3, 9, 8}, -1.0, 1.0);
  double inf_norm = 0.0;
  for (double v : x.data()) inf_norm = std::max(inf_norm, std::abs(v));
  auto max_diff = [&](const Tensor& y) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) d = std::max(d, std::abs(y.data()[i] - x.data()[i]));
    return d;
  };
  std::vector<Check> out;
  {
    Rng r(1);
    out.push_back(bound("augmentation", "LF-Dropout with p = 0 reproduces the input",
                        max_diff(augment::lf_dropout(x, 0.5, 0.0, r)), 1e-5));
    Rng r2(2);
    const auto y = augment::lf_dropout(x, 1.0, 1.0, r2);
    double m = 0.0;
    for (double v : y.data()) m = std::max(m, std::abs(v));
    out.push_back(bound("augmentation", "LF-Dropout with p = 1, r = 1 leaves max |y| / max |x|",
                        m / inf_norm, 1e-5));
  }
  {
    const Tensor zero = Tensor::zeros({3});
    const Tensor some = Tensor::full({3}, 0.7);
    const auto z = uniform_vec(rng, 6, -2.0, 2.0);
    const std::vector<double> z0(6, 0.0);
    double d = 0.0;
    for (const auto f : {augment::lf_uncert, augment::lf_uncert_windowed}) {
      d = std::max(d, max_diff(f(x, zero, zero, 0.5, z, z)));
      d = std::max(d, max_diff(f(x, some, some, 0.5, z0, z0)));
    }
    out.push_back(bound("augmentation", "LF-Uncert with Sigma = 0 or z = 0 reproduces the input",
                        d, 1e-5));
  }
  {
    const auto s = spectral::fft2_centered(x);
    const auto mask = augment::draw_drop_mask(x.shape(), 0.5, 0.7, rng);
    const auto dropped = augment::dropout_spectrum(s, mask);
    const Tensor sm = Tensor::full({3}, 0.7);
    const auto z = uniform_vec(rng, 6, -2.0, 2.0);
    const auto uncert = augment::uncert_spectrum(s, 0.5, sm, sm, z, z);
    const auto region = augment::LowFreqRegion::centered(9, 8, 0.5);
    double changed = 0.0;
    for (const auto* t : {&dropped, &uncert}) {
      for (std::size_t k = 0; k < x.numel(); ++k) {
        const std::size_t i = (k / 8) % 9, j = k % 8;
        changed += t->phase.data()[k] != s.phase.data()[k];
        if (!region.contains(i, j)) changed += t->amplitude.data()[k] != s.amplitude.data()[k];
      }
    }
    out.push_back(exact("augmentation",
                        "phase and high-frequency amplitude bins changed before inversion",
                        changed));
  }
  return out;
}

std::vector<Check> pseudo_label_suite(const VerifyOptions&) {
  const double tau = 0.95;
  const double eps = 1e-6;
  const double probs[] = {0.0, 1.0 - tau - eps, 1.0 - tau, 0.5, tau, tau + eps, 1.0};
  double wrong = 0.0, overlap = 0.0;
  for (int known = 0; known <= 1; ++known)
    for (double p : probs) {
      const std::vector<double> y{p};
      const std::vector<double> d{double(known)};
      const auto got = labeling::generate_pseudo_labels(y, d, tau)[0];
      std::int8_t want = labeling::kUnknown;
      if (!known) {
        if (p > tau) want = labeling::kPositive;
        if (p < 1.0 - tau) want = labeling::kNegative;
      }
      wrong += got != want;
      overlap += known && got != labeling::kUnknown;
    }
  double rejected = 0.0;
  for (double bad : {0.5, 0.3, 1.0}) {
    try {
      labeling::generate_pseudo_labels(std::vector<double>{0.5}, std::vector<double>{0.0}, bad);
    } catch (const Error&) {
      ++rejected;
    }
  }
  return {exact("pseudo-labels", "truth table (tau 0.95, 14 cases), mismatches", wrong),
          exact("pseudo-labels", "pseudo label on a known task", overlap),
          exact("pseudo-labels", "tau outside (0.5, 1) accepted", 3.0 - rejected)};
}

std::vector<Check> masking_suite(const VerifyOptions& o) {
  Rng rng(derive_seed(o.seed, {0x3A5}));
  std::vector<Check> out;
  {
    // Changing probabilities at unknown entries leaves the loss unchanged.
    const auto labels = random_labels(rng, 6, 4, 0.5);
    auto p1 = uniform_vec(rng, 24, 0.05, 0.95);
    auto p2 = p1;
    for (std::size_t i = 0; i < p2.size(); ++i)
      if (labels.values()[i] == labeling::kUnknown) p2[i] = rng.uniform(0.05, 0.95);
    const double a = bce(o, Tensor::from_data({6, 4}, p1), labels).item();
    const double b = bce(o, Tensor::from_data({6, 4}, p2), labels).item();
    out.push_back(bound("masking", "partial BCE ignores unknown entries", std::abs(a - b), 0.0));
    Tensor t = Tensor::from_data({6, 4}, p1, true);
    bce(o, t, labels).backward();
    double leak = 0.0;
    for (std::size_t i = 0; i < 24; ++i)
      if (labels.values()[i] == labeling::kUnknown) leak = std::max(leak, std::abs(t.grad()[i]));
    out.push_back(bound("masking", "no gradient at unknown entries", leak, 0.0));
    // Logit gradient of the student-2 classification loss vanishes wherever
    // neither a label nor a pseudo label exists.
    const auto ps = labeling::generate_pseudo_labels(p1, labels, 0.6);
    Tensor logits = uniform_tensor(rng, {6, 4}, -3.0, 3.0);
    logits.set_requires_grad(true);
    losses::s2_classification_loss(ops::sigmoid(logits), labels, ps, losses::LossWeights{})
        .backward();
    double logit_leak = 0.0;
    for (std::size_t i = 0; i < 24; ++i)
      if (labels.values()[i] == labeling::kUnknown && ps.values()[i] == labeling::kUnknown)
        logit_leak = std::max(logit_leak, std::abs(logits.grad()[i]));
    out.push_back(bound("masking", "no logit gradient where delta = zeta = 0", logit_leak, 0.0));
    const auto none = PartialLabels::unknown(6, 4);
    Tensor u = Tensor::from_data({6, 4}, p1, true);
    auto l = bce(o, u, none);
    l.backward();
    double g = 0.0;
    if (u.has_grad())
      for (double v : u.grad()) g = std::max(g, std::abs(v));
    out.push_back(bound("masking", "all-unknown batch gives exact 0 loss and gradient",
                        std::abs(l.item()) + g, 0.0));
  }
  {
    const Tensor x = uniform_tensor(rng, {3, 8, 8}, -1.0, 1.0);
    const auto mask = augment::draw_drop_mask(x.shape(), 0.5, 0.5, rng);
    const auto region = augment::LowFreqRegion::centered(8, 8, 0.5);
    const auto a = spectral::fft2_centered(x);
    const auto b = spectral::fft2_centered(augment::lf_dropout(x, mask));
    double hf = 0.0, sym = 0.0;
    for (std::size_t pl = 0; pl < 3; ++pl)
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
          const std::size_t k = pl * 64 + i * 8 + j;
          if (!region.contains(i, j)) {
            hf = std::max(hf, std::abs(a.amplitude.data()[k] - b.amplitude.data()[k]));
            sym += mask.keep[k] != 1.0;
          } else {
            const std::size_t partner = pl * 64 + spectral::conjugate_index(i, 8) * 8 +
                                        spectral::conjugate_index(j, 8);
            sym += mask.keep[k] != mask.keep[partner];
          }
        }
    out.push_back(bound("masking", "LF-Dropout leaves high-frequency amplitudes", hf, 1e-9));
    out.push_back(exact("masking", "drop mask: ones outside region, conjugate-symmetric", sym));
  }
  {
    double bad = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto labels = random_labels(rng, 3, 4, 0.5);
      const auto p = uniform_vec(rng, 12, 0.0, 1.0);
      const auto ps = labeling::generate_pseudo_labels(p, labels, 0.95);
      for (std::size_t i = 0; i < 12; ++i)
        bad += labels.values()[i] != labeling::kUnknown && ps.values()[i] != labeling::kUnknown;
    }
    out.push_back(exact("masking", "pseudo and known indicators never overlap (200 draws)", bad));
  }
  return out;
}

std::vector<Check> loss_suite(const VerifyOptions& o) {
  std::vector<Check> out;
  const Tensor probs = Tensor::from_data({2, 2}, {0.8, 0.3, 0.6, 0.9});
  const PartialLabels labels(2, 2, {1, 0, -1, 1});
  const double want = -(std::log(0.8) + std::log(0.7) + std::log(0.9)) / 3.0;
  out.push_back(bound("losses", "partial BCE closed form",
                      std::abs(bce(o, probs, labels).item() - want), 1e-12));
  const Tensor teacher = Tensor::from_data({2, 2}, {0.7, 0.2, 0.5, 0.6});
  const double kl_want = (0.7 * std::log(0.7 / 0.8) + 0.2 * std::log(0.2 / 0.3) +
                          0.6 * std::log(0.6 / 0.9)) / 3.0;
  out.push_back(bound("losses", "KL closed form",
                      std::abs(losses::kl_known(teacher, probs, labels).item() - kl_want),
                      1e-12));
  const double adv_want = (std::log(0.8) + std::log(0.9)) / 3.0;
  out.push_back(bound("losses", "adversarial loss closed form",
                      std::abs(losses::adversarial_loss(labels, probs).item() - adv_want),
                      1e-12));
  const Tensor f = Tensor::from_data({1, 2, 1}, {0.0, 1.0});
  const Tensor g = Tensor::from_data({1, 2, 1}, {1.0, 1.0});
  const double mmd_want = (2.0 * (1.0 - std::exp(-0.5)) + 0.0) / 2.0;
  out.push_back(bound("losses", "MMD closed form (h = 1)",
                      std::abs(losses::mmd_loss(f, g, losses::KernelConfig::fixed(1.0)).item() -
                               mmd_want),
                      1e-12));
  return out;
}

std::vector<Check> metric_suite(const VerifyOptions& o) {
  Rng rng(derive_seed(o.seed, {0x3E7}));
  std::vector<Check> out;
  double f_err = 0.0, q_err = 0.0, q5_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> p(1000), y(1000), p5(1000), y5(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
      p[i] = rng.bernoulli(0.4);
      y[i] = rng.bernoulli(0.55);
      p5[i] = static_cast<int>(rng.uniform() * 5);
      y5[i] = static_cast<int>(rng.uniform() * 5);
    }
    // Confusion matrix by brute force.
    double cm[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < 1000; ++i) cm[y[i]][p[i]] += 1.0;
    auto f1 = [](double tp, double fp, double fn) {
      const double d = 2 * tp + fp + fn;
      return d > 0 ? 2 * tp / d : 0.0;
    };
    const double ref_f = 0.5 * (f1(cm[1][1], cm[0][1], cm[1][0]) + f1(cm[0][0], cm[1][0], cm[0][1]));
    f_err = std::max(f_err, std::abs(metrics::macro_f(p, y) - ref_f));
    auto ref_qwk = [](const std::vector<int>& a, const std::vector<int>& b, int k) {
      std::vector<double> obs(k * k, 0.0), ra(k, 0.0), rb(k, 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) {
        obs[b[i] * k + a[i]] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
      }
      double num = 0.0, den = 0.0;
      const double n = static_cast<double>(a.size());
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const double w = double((i - j) * (i - j)) / double((k - 1) * (k - 1));
          num += w * obs[i * k + j];
          den += w * rb[i] * ra[j] / n;
        }
      return den > 0 ? 1.0 - num / den : 0.0;
    };
    q_err = std::max(q_err, std::abs(metrics::qwk(p, y, 2) - ref_qwk(p, y, 2)));
    q5_err = std::max(q5_err, std::abs(metrics::qwk(p5, y5, 5) - ref_qwk(p5, y5, 5)));
  }
  out.push_back(bound("metrics", "macro F vs confusion matrix (1000 samples)", f_err, 1e-12));
  out.push_back(bound("metrics", "binary QWK vs definition (1000 samples)", q_err, 1e-12));
  out.push_back(bound("metrics", "5-level QWK vs definition (1000 samples)", q5_err, 1e-12));
  const auto s = metrics::aggregate({{"a", 0, 75.7, 0.0}, {"b", 0, 89.5, 0.0}});
  out.push_back(bound("metrics", "two-dataset average 75.7, 89.5 -> 82.6",
                      std::abs(s.mF - 82.6), 1e-9));
  return out;
}

std::vector<Check> run_verify(const VerifyOptions& options) {
  std::vector<Check> all;
  for (const auto& suite : {fft_suite, gradient_suite, augmentation_suite, pseudo_label_suite,
                            masking_suite, loss_suite, metric_suite}) {
    auto part = suite(options);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json to_json(const std::vector<Check>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"suite", c.suite},
                   {"name", c.name},
                   {"measured", c.measured},
                   {"tolerance", c.tolerance},
                   {"passed", c.passed}});
  return {{"passed", all_passed(checks)}, {"checks", arr}};
}

}  // namespace partscreen::app
