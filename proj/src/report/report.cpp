#include "ddb/report/report.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ddb/errors.hpp"
#include "ddb/report/plots.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ddb::report {

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

// 1-based inclusive label for a half-open 0-based range, matching the
// epoch-range convention used in the summary tables.
std::string display_range(const EpochRange& r) {
    return std::to_string(r.start + 1) + "-" + std::to_string(r.end);
}

}  // namespace

double round3(double value) {
    const int prev = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double r = std::nearbyint(value * 1000.0) / 1000.0;
    std::fesetround(prev);
    return r;
}

AnalysisResult analyze_run(const RunStore& store, const std::string& run_id,
                           const PhaseConfig& config) {
    AnalysisResult result;
    result.run_id = run_id;
    const TimeSeries test_error = store.load_run_series(run_id, "test_error");
    if (test_error.size() < 2) {
        throw InsufficientDataError("run " + run_id + " has fewer than 2 records");
    }
    result.seg = segment_phases(test_error, config);
    const TimeSeries shape = store.load_run_series(run_id, "shape_bias");
    const TimeSeries texture = store.load_run_series(run_id, "texture_bias");
    result.has_bias_series = shape.size() > 0 && texture.size() > 0;
    if (result.has_bias_series) {
        result.correlations = phase_correlations(test_error, shape, texture, result.seg);
    }
    return result;
}

void write_phase_table(const AnalysisResult& analysis, const fs::path& out_csv) {
    std::string text = "phase,start,end,r_shape,r_texture,s,n_points\n";
    char buf[256];
    for (const auto& p : analysis.correlations.phases) {
        if (p.reported) {
            std::snprintf(buf, sizeof(buf), "%d,%lld,%lld,%.3f,%.3f,%.3f,%lld\n", p.phase,
                          static_cast<long long>(p.range.start),
                          static_cast<long long>(p.range.end), round3(p.r_shape),
                          round3(p.r_texture), round3(p.s), static_cast<long long>(p.n_points));
        } else {
            std::snprintf(buf, sizeof(buf), "%d,%lld,%lld,,,,%lld\n", p.phase,
                          static_cast<long long>(p.range.start),
                          static_cast<long long>(p.range.end),
                          static_cast<long long>(p.n_points));
        }
        text += buf;
    }
    if (analysis.correlations.phases.empty()) {
        // Analysis without bias series: record the segmentation alone.
        for (std::size_t i = 0; i < analysis.seg.phase_ranges.size(); ++i) {
            const auto& r = analysis.seg.phase_ranges[i];
            std::snprintf(buf, sizeof(buf), "%zu,%lld,%lld,,,,0\n", i + 1,
                          static_cast<long long>(r.start), static_cast<long long>(r.end));
            text += buf;
        }
    }
    write_text(out_csv, text);
}

void write_report_json(const AnalysisResult& analysis, const fs::path& out_json) {
    json doc;
    doc["run_id"] = analysis.run_id;
    doc["double_descent_detected"] = analysis.seg.double_descent_detected;
    doc["b1"] = analysis.seg.b1;
    if (analysis.seg.b2) doc["b2"] = *analysis.seg.b2;
    doc["phases"] = json::array();
    for (std::size_t i = 0; i < analysis.seg.phase_ranges.size(); ++i) {
        const auto& r = analysis.seg.phase_ranges[i];
        json phase{{"phase", i + 1}, {"start", r.start}, {"end", r.end}};
        for (const auto& p : analysis.correlations.phases) {
            if (p.phase == static_cast<int>(i + 1)) {
                phase["reported"] = p.reported;
                phase["n_points"] = p.n_points;
                if (p.reported) {
                    phase["r_shape"] = p.r_shape;
                    phase["r_texture"] = p.r_texture;
                    phase["s"] = p.s;
                } else {
                    phase["note"] = p.note;
                }
            }
        }
        doc["phases"].push_back(phase);
    }
    doc["has_bias_series"] = analysis.has_bias_series;
    write_text(out_json, doc.dump(2) + "\n");
}

void write_summary(const AnalysisResult& analysis, const fs::path& out_txt) {
    std::string text = "Run " + analysis.run_id + "\n";
    text += analysis.seg.double_descent_detected
                ? "Double descent detected: three phases.\n"
                : "Double descent not detected.\n";
    char buf[256];
    for (std::size_t i = 0; i < analysis.seg.phase_ranges.size(); ++i) {
        const auto& r = analysis.seg.phase_ranges[i];
        std::snprintf(buf, sizeof(buf), "Phase %zu: epochs %s", i + 1,
                      display_range(r).c_str());
        text += buf;
        for (const auto& p : analysis.correlations.phases) {
            if (p.phase != static_cast<int>(i + 1)) continue;
            if (p.reported) {
                std::snprintf(buf, sizeof(buf),
                              "  r_shape=%.3f r_texture=%.3f s=%.3f (n=%lld)",
                              round3(p.r_shape), round3(p.r_texture), round3(p.s),
                              static_cast<long long>(p.n_points));
                text += buf;
            } else {
                text += "  correlations unavailable: " + p.note;
            }
        }
        text += "\n";
    }
    if (!analysis.has_bias_series) {
        text += "No probe records: bias correlations and bias plots omitted.\n";
    }
    write_text(out_txt, text);
}

ReportBundle emit_report(const RunStore& store, const std::string& run_id,
                         const fs::path& out_dir, const PhaseConfig& config) {
    AnalysisResult analysis = analyze_run(store, run_id, config);
    const RunManifest manifest = store.load_manifest(run_id);

    // Deterministic overwrite: clear the output directory first.
    std::error_code ec;
    fs::remove_all(out_dir, ec);
    fs::create_directories(out_dir);

    ReportBundle bundle;
    bundle.run_id = run_id;

    const TimeSeries train_error = store.load_run_series(run_id, "train_error");
    const TimeSeries test_error = store.load_run_series(run_id, "test_error");
    bundle.curve_plot_ref = out_dir / "error_curves.png";
    render_curve_plot(train_error, test_error, analysis.seg, bundle.curve_plot_ref);

    if (analysis.has_bias_series) {
        const TimeSeries shape = store.load_run_series(run_id, "shape_bias");
        const TimeSeries texture = store.load_run_series(run_id, "texture_bias");
        bundle.bias_plot_ref = out_dir / "bias_curves.png";
        render_bias_plot(shape, texture, analysis.seg, bundle.bias_plot_ref);
        bundle.scatter_plot_ref = out_dir / "bias_scatter.png";
        render_scatter_plot(test_error, shape, texture, analysis.seg, bundle.scatter_plot_ref);
    } else {
        std::fprintf(stderr, "warning: run %s has no probe records; bias plots omitted\n",
                     run_id.c_str());
    }

    bundle.table_ref = out_dir / "phases.csv";
    write_phase_table(analysis, bundle.table_ref);
    bundle.json_ref = out_dir / "report.json";
    write_report_json(analysis, bundle.json_ref);
    bundle.summary_ref = out_dir / "summary.txt";
    write_summary(analysis, bundle.summary_ref);

    // Filter grids at the epochs ending each phase plus the final record,
    // for whichever of those epochs have a checkpoint on disk.
    std::vector<std::int64_t> grid_epochs;
    for (const auto& r : analysis.seg.phase_ranges) grid_epochs.push_back(r.end - 1);
    const auto records = store.load_records(run_id);
    std::vector<fs::path> checkpoints;
    for (std::int64_t e : grid_epochs) {
        // Walk back to the nearest checkpointed record at or before e.
        for (auto it = records.rbegin(); it != records.rend(); ++it) {
            if (it->epoch > e || !it->checkpoint_ref) continue;
            const fs::path ckpt = store.run_dir(run_id) / *it->checkpoint_ref;
            if (std::find(checkpoints.begin(), checkpoints.end(), ckpt) == checkpoints.end() &&
                fs::exists(ckpt)) {
                checkpoints.push_back(ckpt);
                char name[64];
                std::snprintf(name, sizeof(name), "filters_epoch_%06lld.png",
                              static_cast<long long>(it->epoch));
                const fs::path out = out_dir / name;
                const int num_classes = manifest.config.dataset == DatasetId::cifar100 ? 100 : 10;
                try {
                    render_filter_grid_from_checkpoint(ckpt, manifest.config.architecture,
                                                       num_classes, out);
                    bundle.filter_grid_refs.push_back(out);
                } catch (const std::exception& ex) {
                    std::fprintf(stderr, "warning: filter grid for %s skipped: %s\n",
                                 ckpt.string().c_str(), ex.what());
                }
            }
            break;
        }
    }
    return bundle;
}

}  // namespace ddb::report
