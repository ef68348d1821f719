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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include "pantext/cli.hpp"
#include "pantext/verify/fixtures.hpp"
#include "pantext/verify/selftest.hpp"

namespace fs = std::filesystem;
using namespace pantext;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
  failures += passed ? 0 : 1;
  std::cout << (passed ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << detail << std::endl;
}

void report(int id, const verify::CheckResult& r, double limit_s = 0.0) {
  const bool in_time = limit_s <= 0.0 || r.seconds < limit_s;
  std::string detail = r.detail + " [" + verify::detail::fmt(r.seconds) + " s";
  if (limit_s > 0.0) detail += ", limit " + verify::detail::fmt(limit_s) + " s";
  report(id, r.name, r.passed && in_time, detail + "]");
}

int run_cli_process(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string("\"") + PANTEXT_CLI + "\" " + args + " >\"" + out.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// The determinism contract exercised through the command-line tool.
bool cli_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "pantext_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path img = dir / "fixture.ppm", w = dir / "seed42.panw", cfg = dir / "fixture.cfg";
  write_file_bytes(img.string(), encode_ppm(verify::fixture_image()));
  write_file_bytes(cfg.string(), format_config(verify::fixture_config()));
  if (run_cli_process("gen-weights --seed 42 --out \"" + w.string() + "\"", dir / "gen.log") != 0) {
    detail = "gen-weights failed";
    return false;
  }
  std::set<std::string> outputs;
  int runs = 0;
  for (const char* threads : {"1", "1", "1", "2", "4"}) {
    const fs::path out = dir / ("dets_" + std::to_string(runs++) + ".json");
    const int code = run_cli_process("infer --image \"" + img.string() + "\" --weights \"" + w.string() +
                                         "\" --config \"" + cfg.string() + "\" --threads " + threads +
                                         " --out \"" + out.string() + "\"",
                                     dir / "infer.log");
    if (code != 0) {
      detail = "infer exited with " + std::to_string(code);
      return false;
    }
    outputs.insert(read_file_bytes(out.string()));
  }
  fs::remove_all(dir);
  detail = "cli: " + std::to_string(outputs.size()) + " distinct JSON over " + std::to_string(runs) +
           " runs (threads 1,1,1,2,4)";
  return outputs.size() == 1;
}

}  // namespace

int main() {
  report(1, verify::check_quad_roundtrip(), 1.0);
  report(2, verify::check_gradients(), 10.0);
  report(3, verify::check_nms());
  report(4, verify::check_polygon_iou());
  report(5, verify::check_roi_align());
  report(6, verify::check_anchor_lattice());
  report(7, verify::check_architecture());
  report(8, verify::check_loss_composition());

  const verify::CheckResult det = verify::check_determinism();
  std::string cli_detail;
  const bool cli_ok = cli_determinism(cli_detail);
  report(9, det.name, det.passed && cli_ok, det.detail + "; " + cli_detail);

  report(10, verify::check_evaluation());

  const fs::path log = fs::temp_directory_path() / "pantext_acceptance_selftest.log";
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli_process("selftest", log);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(11, "selftest_runtime", code == 0 && secs < 300.0,
         "pantext selftest exit " + std::to_string(code) + " in " + verify::detail::fmt(secs) + " s (limit 300 s)");
  if (code != 0) std::cout << read_file_bytes(log.string());
  fs::remove(log);

  std::cout << (failures == 0 ? "acceptance: all criteria passed" : "acceptance: FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
