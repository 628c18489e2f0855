#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parahom/config.hpp"
#include "parahom/experiment.hpp"

namespace parahom {

struct ExperimentOutcome {
  enum class Status { pass, fail, error };

  std::string id;
  std::string kind;
  Status status = Status::error;
  /// Main CSV, relative to the output directory.
  std::string rows_file;
  std::vector<std::string> files;
  std::map<std::string, double> tolerances;
  std::vector<Verdict> verdicts;
  std::string message;
  /// One-line human summary (printed by the command-line tool).
  std::string summary;
};

std::string to_string(ExperimentOutcome::Status status);

struct SuiteReport {
  std::vector<ExperimentOutcome> experiments;
  bool passed() const;
};

struct SuiteOptions {
  /// 0 runs everything serially in a fixed order.
  unsigned threads = 0;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
};

/// Runs one experiment, writing its artifacts below out_dir/<id>/. Errors are
/// caught and reported as Status::error.
ExperimentOutcome run_experiment(const ExperimentConfig& experiment,
                                 const std::filesystem::path& out_dir, unsigned threads);

/// Runs every experiment (or only those of `only`), writes suite_report.json
/// into out_dir and returns the per-experiment outcomes in config order.
SuiteReport run_suite(const RunConfig& config, const std::filesystem::path& out_dir,
                      const SuiteOptions& options,
                      std::optional<ExperimentKind> only = std::nullopt);

void write_suite_report(std::ostream& os, const SuiteReport& report);

}  // namespace parahom
