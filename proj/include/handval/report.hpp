#pragma once

#include "handval/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace handval {

/// Rounds to 6 significant digits, the serialization precision of reports.
double sig6(double v);

/// include_aligned adds the post-alignment sample arrays (the --debug view).
nlohmann::json trial_report_json(const TrialReport& report, bool include_aligned = false);
nlohmann::json cohort_report_json(const CohortReport& report);

enum class EmitFormat { Json, CsvTables, PlotData };

/// Writes the report into out_dir. Output bytes are a pure function of the
/// report content: stable key order, fixed float precision, no clocks.
///   json       -> report.json
///   csv_tables -> agreement.csv, segments.csv, strata.csv, trials.csv
///   plotdata   -> aligned_<trial>.csv, bland_altman_<parameter>.csv
void emit(const CohortReport& report, EmitFormat format, const std::string& out_dir);

} // namespace handval
