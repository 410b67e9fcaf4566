#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fgts/metrics.hpp"

namespace fgts {

/// Per-generator evaluation of one configuration.
struct EvalReport {
    std::string label;
    std::string fingerprint;
    std::string parent_fingerprint;  // set for runs that belong to a sweep
    std::string strategy;
    std::string selection;
    std::string protocol;
    std::size_t n_eval = 0;
    GroupedMetrics metrics;
    std::vector<EvalReport> seed_reports;  // per-seed runs behind an averaged random-K report

    /// Aggregate recomputed from the generator rows.
    MetricTriple recomputed_aggregate() const { return mean_of(metrics.rows); }
};

/// Element-wise mean of reports that share their generator rows.
EvalReport average_reports(const std::vector<EvalReport>& reports);

std::string report_csv(const EvalReport& report);
std::string report_markdown(const EvalReport& report);
EvalReport parse_report_csv(std::string_view text);

void write_report(const EvalReport& report, const std::filesystem::path& dir);
EvalReport read_report(const std::filesystem::path& dir_or_csv);

/// Accuracy table with one row per report and one column per generator plus Avg-acc.
std::string accuracy_table_markdown(const std::vector<EvalReport>& reports);
std::string accuracy_table_csv(const std::vector<EvalReport>& reports);

/// Acc / AUC / AP table with one row per labelled report (aggregate values).
std::string summary_table_markdown(const std::vector<std::pair<std::string, EvalReport>>& rows,
                                   const std::string& first_column);
std::string summary_table_csv(const std::vector<std::pair<std::string, EvalReport>>& rows,
                              const std::string& first_column);

std::string format_metric(double v);  // shortest round-trip representation

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fgts
