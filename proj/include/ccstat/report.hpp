#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccstat/metrics.hpp"
#include "ccstat/tuning.hpp"

namespace ccstat {

/// Free-form CSV table written alongside the standard bundle files.
struct Table {
  std::string file_name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Everything a run persists. Files written by write_results:
///   run.txt      key=value metadata, one per line
///   errors.csv   image_id then one column per tuple (empty cell = ZeroSignal)
///   summary.csv  label plus the ErrorSummary columns
///   tuning.csv   label,tuple,criterion,zero_signal_count,chosen
///   pairs.csv    delta_sigma,delta_median
/// plus every entry of `tables`.
struct ReportBundle {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ParameterTuple> error_tuples;
  std::optional<ErrorMatrix> errors;
  std::vector<std::pair<std::string, ErrorSummary>> summaries;
  std::vector<std::pair<std::string, TuningResult>> tuning;
  std::vector<DifferencePair> pairs;
  std::vector<Table> tables;
};

void write_results(const ReportBundle& bundle, const std::filesystem::path& directory);

/// Reads back metadata, errors, summaries and pairs (tuning logs and extra
/// tables are not parsed). Values carry 12 significant digits.
ReportBundle read_results(const std::filesystem::path& directory);

std::string software_version();

}  // namespace ccstat
