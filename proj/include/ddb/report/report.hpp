#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ddb/curve.hpp"
#include "ddb/run_store.hpp"

namespace ddb::report {

struct AnalysisResult {
    std::string run_id;
    PhaseSegmentation seg;
    PhaseCorrelationReport correlations;
    bool has_bias_series = false;
};

struct ReportBundle {
    std::string run_id;
    std::filesystem::path curve_plot_ref;
    std::filesystem::path bias_plot_ref;     // empty when the run has no probe records
    std::filesystem::path scatter_plot_ref;  // empty when the run has no probe records
    std::filesystem::path table_ref;
    std::filesystem::path json_ref;
    std::filesystem::path summary_ref;
    std::vector<std::filesystem::path> filter_grid_refs;
};

// Segmentation plus per-phase correlations for a stored run. Requires at
// least two epoch records; bias correlations are computed only when the
// run carries probe records.
AnalysisResult analyze_run(const RunStore& store, const std::string& run_id,
                           const PhaseConfig& config = {});

// CSV table, one row per phase: phase,start,end,r_shape,r_texture,s,n_points.
// r/s columns are printed at 3 decimal places (half-to-even).
void write_phase_table(const AnalysisResult& analysis, const std::filesystem::path& out_csv);

// Machine-readable JSON mirror of the analysis (full-precision values).
void write_report_json(const AnalysisResult& analysis, const std::filesystem::path& out_json);

// Human-readable summary with 1-based inclusive epoch labels.
void write_summary(const AnalysisResult& analysis, const std::filesystem::path& out_txt);

// Rounds half-to-even at 3 decimal places (the table printing rule).
double round3(double value);

// Orchestrates analysis, plots, table, JSON and summary into out_dir.
// out_dir is cleared first so regeneration leaves no stale files. Filter
// grids are rendered for checkpoints at the phase boundaries and the
// final probe epoch when those checkpoints exist.
ReportBundle emit_report(const RunStore& store, const std::string& run_id,
                         const std::filesystem::path& out_dir, const PhaseConfig& config = {});

}  // namespace ddb::report
