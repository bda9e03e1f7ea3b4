// wkam <study> --config <path> [--out <dir>] [--threads N]
//
// Exit status: 0 when every check passes, 1 when some check fails, 2 on a
// configuration, I/O or numerical error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "wkam/experiments.hpp"
#include "wkam/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discounted Hamilton-Jacobi solver and weak KAM studies"};
  std::string study, config_path, out_dir;
  unsigned threads = 0;
  bool no_timings = false;
  app.add_option("study", study, "solve | flow | alpha | measure | rate-c1 | rate-c2 | selection | barrier")
      ->required();
  app.add_option("--config", config_path, "configuration file (key = value)")->required();
  app.add_option("--out", out_dir, "output root, default output.dir; files go to <out>/<study>-<config hash>");
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  app.add_flag("--no-timings", no_timings, "write 0 in timing columns so reruns are byte-identical");
  CLI11_PARSE(app, argc, argv);

  try {
    wkam::set_thread_count(threads);
    wkam::ExperimentConfig cfg = wkam::load_config(config_path);
    cfg.study = wkam::study_kind_from_string(study);
    if (out_dir.empty()) out_dir = cfg.out_dir;
    wkam::RunOptions opt;
    opt.timings = !no_timings;
    const wkam::StudyReport rep = wkam::run_study(cfg, out_dir, opt);
    for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& c : rep.checks)
      std::printf("%s %s value=%.6g bound=%.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.bound);
    std::printf("%s: %zu checks, %s; outputs in %s\n", study.c_str(), rep.checks.size(),
                rep.passed() ? "all passed" : "some failed", rep.run_dir.c_str());
    return rep.passed() ? 0 : 1;
  } catch (const wkam::Error& e) {
    std::fprintf(stderr, "wkam: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wkam: %s\n", e.what());
    return 2;
  }
}
