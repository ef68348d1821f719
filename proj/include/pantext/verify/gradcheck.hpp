/* Copyright (c) 2026 The PanText Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

// Central finite-difference checks of every analytic loss gradient.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pantext/losses.hpp"
#include "pantext/random.hpp"

namespace pantext::verify {

struct GradcheckOptions {
  std::size_t inputs = 1000;
  double step = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 7;
};

struct GradcheckEntry {
  std::string name;
  std::size_t inputs = 0;
  std::size_t components = 0;
  double max_rel_error = 0.0;
  double seconds = 0.0;
  bool passed = false;
};

struct GradcheckReport {
  GradcheckOptions options;
  std::vector<GradcheckEntry> entries;

  bool passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const GradcheckEntry& e) { return e.passed; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["step"] = options.step;
    j["tolerance"] = options.tolerance;
    j["inputs"] = options.inputs;
    j["seed"] = options.seed;
    j["checks"] = nlohmann::json::array();
    for (const GradcheckEntry& e : entries) {
      j["checks"].push_back({{"name", e.name},
                             {"inputs", e.inputs},
                             {"components", e.components},
                             {"max_rel_error", e.max_rel_error},
                             {"seconds", e.seconds},
                             {"passed", e.passed}});
    }
    j["passed"] = passed();
    return j;
  }
};

// |a - n| / max(|a|, |n|); zero when both vanish.
inline double relative_error(double analytic, double numeric) {
  const double den = std::max(std::abs(analytic), std::abs(numeric));
  return den == 0.0 ? 0.0 : std::abs(analytic - numeric) / den;
}

namespace detail {

using LossFn = std::function<double(const std::vector<double>&)>;

// Max relative error over the listed components of x.
inline double check_components(const LossFn& f, std::vector<double> x, const std::vector<double>& analytic,
                               const std::vector<std::size_t>& components, double h, std::size_t& checked) {
  double worst = 0.0;
  for (std::size_t k : components) {
    const double x0 = x[k];
    x[k] = x0 + h;
    const double up = f(x);
    x[k] = x0 - h;
    const double down = f(x);
    x[k] = x0;
    worst = std::max(worst, relative_error(analytic[k], (up - down) / (2.0 * h)));
    ++checked;
  }
  return worst;
}

inline std::vector<std::size_t> all_components(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Regression residual away from 0 so the gradient is not vanishingly small.
inline double residual(Rng& rng) {
  const double mag = rng.uniform(0.01, 3.0);
  return rng.uniform() < 0.5 ? -mag : mag;
}

template <class Sample, std::size_t D>
std::vector<Sample> random_head_samples(Rng& rng) {
  const std::size_t n = 2 + rng.below(11);
  std::vector<Sample> samples(n);
  for (Sample& s : samples) {
    s.logits = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    s.label = rng.uniform() < 0.5 ? 1 : 0;
    for (std::size_t d = 0; d < D; ++d) {
      s.pred[d] = rng.uniform(-2.0, 2.0);
      s.target[d] = s.pred[d] - residual(rng);
    }
  }
  return samples;
}

// Flattened parameters: [logits..., preds...].
template <class Sample, std::size_t D>
std::vector<double> flatten(const std::vector<Sample>& samples) {
  std::vector<double> x;
  for (const Sample& s : samples) x.insert(x.end(), s.logits.begin(), s.logits.end());
  for (const Sample& s : samples) x.insert(x.end(), s.pred.begin(), s.pred.end());
  return x;
}

template <class Sample, std::size_t D>
std::vector<Sample> unflatten(std::vector<Sample> samples, const std::vector<double>& x) {
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].logits = {x[2 * i], x[2 * i + 1]};
    for (std::size_t d = 0; d < D; ++d) samples[i].pred[d] = x[2 * n + D * i + d];
  }
  return samples;
}

template <class Sample, std::size_t D, class LossOf>
double check_head(Rng& rng, double h, std::size_t& checked, LossOf&& loss_of) {
  const std::vector<Sample> samples = random_head_samples<Sample, D>(rng);
  const HeadLoss<D> base = loss_of(samples);
  std::vector<double> analytic;
  for (const auto& g : base.grad_logits) analytic.insert(analytic.end(), g.begin(), g.end());
  for (const auto& g : base.grad_pred) analytic.insert(analytic.end(), g.begin(), g.end());
  const std::vector<double> x = flatten<Sample, D>(samples);
  const LossFn f = [&](const std::vector<double>& v) { return loss_of(unflatten<Sample, D>(samples, v)).total; };
  return check_components(f, x, analytic, all_components(x.size()), h, checked);
}

inline Tensor random_logits(Rng& rng, std::size_t m) {
  Tensor z(Shape{1, 1, m, m});
  for (double& v : z.data()) v = rng.uniform(-4.0, 4.0);
  return z;
}

inline MaskTarget random_target(Rng& rng, std::size_t m) {
  MaskTarget t;
  t.size = m;
  t.cells.resize(m * m);
  for (auto& c : t.cells) c = rng.uniform() < 0.5 ? 1 : 0;
  return t;
}

}  // namespace detail

inline GradcheckReport run_gradcheck(const GradcheckOptions& opt = {}) {
  GradcheckReport report;
  report.options = opt;
  const double h = opt.step;

  auto run = [&](const std::string& name, std::uint64_t salt, const std::function<double(Rng&, std::size_t&)>& one) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(opt.seed * 1000003ULL + salt);
    GradcheckEntry e;
    e.name = name;
    for (std::size_t i = 0; i < opt.inputs; ++i) {
      e.max_rel_error = std::max(e.max_rel_error, one(rng, e.components));
      ++e.inputs;
    }
    e.passed = e.max_rel_error < opt.tolerance;
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.entries.push_back(e);
  };

  run("softmax_ce", 1, [&](Rng& rng, std::size_t& checked) {
    const int label = rng.uniform() < 0.5 ? 1 : 0;
    const std::vector<double> x = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const SoftmaxCe ce = softmax_ce({x[0], x[1]}, label);
    const detail::LossFn f = [&](const std::vector<double>& v) { return softmax_ce({v[0], v[1]}, label).loss; };
    return detail::check_components(f, x, {ce.grad[0], ce.grad[1]}, {0, 1}, h, checked);
  });

  run("smooth_l1", 2, [&](Rng& rng, std::size_t& checked) {
    const std::size_t n = 8;
    std::vector<double> pred(n), target(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng.uniform(-3.0, 3.0);
      target[i] = pred[i] - detail::residual(rng);
    }
    const VectorLoss l = smooth_l1(pred, target);
    const detail::LossFn f = [&](const std::vector<double>& v) { return smooth_l1(v, target).loss; };
    return detail::check_components(f, pred, l.grad, detail::all_components(n), h, checked);
  });

  run("binary_ce", 3, [&](Rng& rng, std::size_t& checked) {
    const std::size_t m = 14;
    const Tensor z = detail::random_logits(rng, m);
    const MaskTarget t = detail::random_target(rng, m);
    const TensorLoss l = binary_ce(z, t);
    const std::vector<double> x(z.data().begin(), z.data().end());
    const std::vector<double> analytic(l.grad.data().begin(), l.grad.data().end());
    const detail::LossFn f = [&](const std::vector<double>& v) {
      return binary_ce(Tensor(z.shape(), v), t).loss;
    };
    return detail::check_components(f, x, analytic, detail::all_components(x.size()), h, checked);
  });

  const LossConfig cfg;
  run("rpn_level_loss", 4, [&](Rng& rng, std::size_t& checked) {
    return detail::check_head<RpnSample, 4>(rng, h, checked, [&](const std::vector<RpnSample>& s) {
      return rpn_level_loss(s, cfg);
    });
  });

  run("frcnn_loss", 5, [&](Rng& rng, std::size_t& checked) {
    return detail::check_head<FrcnnSample, 8>(rng, h, checked, [&](const std::vector<FrcnnSample>& s) {
      return frcnn_loss(s, cfg);
    });
  });

  // Two masks per input; 24 random components of the pair are checked.
  run("mask_loss", 6, [&](Rng& rng, std::size_t& checked) {
    const std::size_t m = 14;
    std::vector<MaskSample> samples(2);
    for (MaskSample& s : samples) {
      s.logits = detail::random_logits(rng, m);
      s.target = detail::random_target(rng, m);
    }
    const MaskLoss l = mask_loss(samples);
    std::vector<double> x, analytic;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      x.insert(x.end(), samples[i].logits.data().begin(), samples[i].logits.data().end());
      analytic.insert(analytic.end(), l.grads[i].data().begin(), l.grads[i].data().end());
    }
    std::vector<std::size_t> comps;
    for (std::size_t k = 0; k < 24; ++k) comps.push_back(rng.below(x.size()));
    const detail::LossFn f = [&](const std::vector<double>& v) {
      std::vector<MaskSample> s = samples;
      for (std::size_t i = 0; i < s.size(); ++i) {
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(i * m * m), m * m, s[i].logits.data().begin());
      }
      return mask_loss(s).total;
    };
    return detail::check_components(f, x, analytic, comps, h, checked);
  });

  return report;
}

}  // namespace pantext::verify
