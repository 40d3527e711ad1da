// Batch experiment runner: executes a RunConfig's experiments in order, writes
// per-experiment CSV artifacts plus a summary, and reports an exit status.
// Artifacts are staged in "<output_dir>.staging" and promoted to output_dir
// only when every experiment succeeds, so failures leave no partial outputs.
#pragma once

#include <string>

#include "philap/config.hpp"

namespace philap {

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 validation/config failure, 2 solver failure
  std::string summary;
};

// check_only: validate the configured system and report, solving nothing.
// verbosity: 0 silent, 1 progress, 2 per-stage chatter (stdout).
RunResult run(const RunConfig& cfg, bool check_only = false, int verbosity = 1);

// Deterministic CSV number formatting used by all artifacts.
std::string csv_num(double v);

}  // namespace philap
