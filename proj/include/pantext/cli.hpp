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

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pantext/anchors.hpp"
#include "pantext/config.hpp"
#include "pantext/detection_json.hpp"
#include "pantext/error.hpp"
#include "pantext/evaluation.hpp"
#include "pantext/ground_truth.hpp"
#include "pantext/image.hpp"
#include "pantext/inference.hpp"
#include "pantext/io.hpp"
#include "pantext/weights_io.hpp"
#include "pantext/verify/gradcheck.hpp"
#include "pantext/verify/selftest.hpp"

namespace pantext {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

namespace cli {

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    write_file_bytes(out_path, text);
  }
}

struct InferArgs {
  std::string image, weights, config, out;
  std::size_t threads = 0;
};

inline int run_infer(const InferArgs& a, std::ostream& out) {
  PipelineConfig cfg;
  if (!a.config.empty()) cfg = parse_config(read_file_bytes(a.config));
  if (a.threads > 0) cfg.threads = a.threads;
  const std::string weights_path = a.weights.empty() ? cfg.weights_path : a.weights;
  if (weights_path.empty()) throw ValidationError("infer: no weights given (--weights or weights_path)");
  const ModelWeights w = load_weights(weights_path);
  const RgbImage img = load_ppm(a.image);
  InferResult res = infer(img, w, cfg);
  const DetectionFile file{image_key_from_path(a.image), img.width, img.height, std::move(res.detections)};
  emit(serialize_detections(file, cfg.mask_threshold), a.out, out);
  return kExitOk;
}

struct EvalArgs {
  std::string dets, gt_dir, format = "icdar";
  double iou = 0.5;
};

inline std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline int run_eval(const EvalArgs& a, std::ostream& out) {
  namespace fs = std::filesystem;
  if (a.format != "icdar" && a.format != "ctw") throw ValidationError("eval: --format must be icdar or ctw");
  std::error_code ec;
  if (!fs::is_directory(a.gt_dir, ec)) throw IoError("eval: ground-truth directory not found: " + a.gt_dir);
  std::map<std::string, GroundTruth> gts;
  for (const fs::path& p : sorted_files(a.gt_dir, ".txt")) {
    const std::string bytes = read_file_bytes(p.string());
    try {
      gts[gt_key_from_path(p)] = a.format == "icdar" ? parse_icdar_gt(bytes) : parse_ctw_gt(bytes);
    } catch (const FormatError& e) {
      throw FormatError(p.filename().string() + ": " + e.what());
    }
  }
  std::vector<fs::path> det_files;
  if (fs::is_directory(a.dets, ec)) {
    det_files = sorted_files(a.dets, ".json");
  } else {
    det_files.push_back(a.dets);
  }
  std::map<std::string, std::vector<Detection>> dets;
  for (const fs::path& p : det_files) {
    DetectionFile f = parse_detections(read_file_bytes(p.string()));
    auto& list = dets[f.image];
    list.insert(list.end(), f.detections.begin(), f.detections.end());
  }
  const EvalReport r = evaluate(dets, gts, a.iou);
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "R=" << r.recall << " P=" << r.precision << " F=" << r.f_measure
     << " (matched " << r.matched << ", gt " << r.gt_care << ", dets " << r.dets_counted << ")\n";
  out << os.str();
  return kExitOk;
}

struct GenWeightsArgs {
  std::uint64_t seed = 42;
  std::string out;
  std::size_t channels = 32;
  std::size_t ctx_channels = 0;
};

inline int run_gen_weights(const GenWeightsArgs& a) {
  NetworkConfig cfg;
  cfg.channels = a.channels;
  cfg.ctx_channels = a.ctx_channels == 0 ? a.channels : a.ctx_channels;
  if (cfg.channels == 0) throw ValidationError("gen-weights: --channels must be positive");
  save_weights(ModelWeights::random(cfg, a.seed), a.out);
  return kExitOk;
}

struct AnchorsArgs {
  std::string level, size, out;
};

inline std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
  const auto x = s.find('x');
  long long h = 0, w = 0;
  const bool ok = x == std::string::npos
                      ? detail::parse_int(s, h) && (w = h, true)
                      : detail::parse_int(std::string_view(s).substr(0, x), h) &&
                            detail::parse_int(std::string_view(s).substr(x + 1), w);
  if (!ok || h <= 0 || w <= 0) throw ValidationError("anchors: --size must be N or HxW with positive extents");
  return {static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

inline int run_anchors(const AnchorsArgs& a, std::ostream& out) {
  const PyramidLevel level = parse_level(a.level);
  const auto [fh, fw] = parse_size(a.size);
  const AnchorSpec spec;
  nlohmann::json boxes = nlohmann::json::array();
  for (const AxisRect& r : generate_anchors(spec, level, fh, fw)) boxes.push_back({r.x1, r.y1, r.x2, r.y2});
  const nlohmann::json j = {{"level", level_name(level)},
                            {"stride", spec.stride(level)},
                            {"scale", spec.scale(level)},
                            {"aspect_ratios", spec.aspect_ratios},
                            {"feature_size", {fh, fw}},
                            {"count", boxes.size()},
                            {"anchors", std::move(boxes)}};
  emit(j.dump(1) + "\n", a.out, out);
  return kExitOk;
}

inline int run_gradcheck(const std::string& out_path, std::size_t inputs, std::ostream& out) {
  verify::GradcheckOptions opt;
  opt.inputs = inputs;
  const verify::GradcheckReport rep = verify::run_gradcheck(opt);
  emit(rep.to_json().dump(1) + "\n", out_path, out);
  return rep.passed() ? kExitOk : kExitInvalid;
}

inline int run_selftest(std::ostream& out) {
  bool all = true;
  std::size_t i = 0;
  for (const verify::CheckResult& r : verify::run_selftest()) {
    ++i;
    all = all && r.passed;
    out << (r.passed ? "PASS" : "FAIL") << " [" << i << "] " << r.name << " (" << std::fixed << std::setprecision(2)
        << r.seconds << " s): " << r.detail << "\n";
  }
  out << (all ? "selftest: all checks passed\n" : "selftest: FAILED\n");
  return all ? kExitOk : kExitInvalid;
}

}  // namespace cli

// Entry point of the `pantext` tool. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"pantext: quadrilateral scene-text detector"};
  app.require_subcommand(1);

  cli::InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "detect text in a PPM image");
  infer_cmd->add_option("--image", infer_args.image, "input image (binary PPM)")->required();
  infer_cmd->add_option("--weights", infer_args.weights, "PANW weights file");
  infer_cmd->add_option("--config", infer_args.config, "key = value pipeline config");
  infer_cmd->add_option("--out", infer_args.out, "detection JSON path (default stdout)");
  infer_cmd->add_option("--threads", infer_args.threads, "worker threads (overrides config)");

  cli::EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score detections against ground truth");
  eval_cmd->add_option("--dets", eval_args.dets, "detection JSON file or directory")->required();
  eval_cmd->add_option("--gt-dir", eval_args.gt_dir, "directory of ground-truth .txt files")->required();
  eval_cmd->add_option("--format", eval_args.format, "icdar or ctw");
  eval_cmd->add_option("--iou", eval_args.iou, "IoU match threshold");

  cli::GenWeightsArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen-weights", "write seeded random weights");
  gen_cmd->add_option("--seed", gen_args.seed, "generator seed");
  gen_cmd->add_option("--out", gen_args.out, "output path")->required();
  gen_cmd->add_option("--channels", gen_args.channels, "pyramid width C");
  gen_cmd->add_option("--ctx-channels", gen_args.ctx_channels, "FPA branch width (default C)");

  cli::AnchorsArgs anchor_args;
  auto* anchors_cmd = app.add_subcommand("anchors", "dump the anchor lattice of one level as JSON");
  anchors_cmd->add_option("--level", anchor_args.level, "P2, P3 or P4")->required();
  anchors_cmd->add_option("--size", anchor_args.size, "feature map size, N or HxW")->required();
  anchors_cmd->add_option("--out", anchor_args.out, "output path (default stdout)");

  std::string grad_out;
  std::size_t grad_inputs = 1000;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of loss gradients");
  grad_cmd->add_option("--out", grad_out, "report path (default stdout)");
  grad_cmd->add_option("--inputs", grad_inputs, "random inputs per loss");

  auto* self_cmd = app.add_subcommand("selftest", "run every oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (infer_cmd->parsed()) return cli::run_infer(infer_args, out);
    if (eval_cmd->parsed()) return cli::run_eval(eval_args, out);
    if (gen_cmd->parsed()) return cli::run_gen_weights(gen_args);
    if (anchors_cmd->parsed()) return cli::run_anchors(anchor_args, out);
    if (grad_cmd->parsed()) return cli::run_gradcheck(grad_out, grad_inputs, out);
    if (self_cmd->parsed()) return cli::run_selftest(out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace pantext
