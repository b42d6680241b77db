#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ddb/errors.hpp"
#include "ddb/report/plots.hpp"
#include "ddb/report/report.hpp"
#include "ddb/torch/imaging.hpp"
#include "ddb/torch/models.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest_torch.h"

namespace fs = std::filesystem;
using namespace ddb;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ddb_report_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A clean double-descent trajectory: descend to 10, plateau, rise to 22,
// plateau, descend to 8. Each plateau spans more than lag+1 epochs so the
// lag-5 difference drops below theta inside it. Hand-derived segmentation
// at theta=0.1, lag=5: b1=8 (first delta<=theta at i=8), re-arm at i=12,
// b2=24, so phases are [0,9), [9,25), [25,40).
double dd_error(std::int64_t e) {
    if (e < 8) return 30.0 - 2.5 * static_cast<double>(e);
    if (e < 17) return 10.0;
    if (e < 25) return 10.0 + 1.5 * static_cast<double>(e - 16);
    if (e < 32) return 22.0;
    return std::max(8.0, 22.0 - 2.0 * static_cast<double>(e - 31));
}

std::string make_dd_run(RunStore& store, bool with_bias) {
    RunConfig c;
    c.architecture = ArchitectureId::tinycnn;
    c.init = InitMode::scratch;
    c.epochs = 40;
    auto manifest = store.create_run(c);
    for (std::int64_t e = 0; e < 40; ++e) {
        EpochRecord r;
        r.epoch = e;
        r.test_error = dd_error(e);
        r.train_error = std::max(0.0, r.test_error - 5.0);
        r.train_loss = r.train_error / 25.0;
        r.test_loss = r.test_error / 25.0;
        if (with_bias) {
            // Shape bias tracks the inverted error, texture the error.
            r.shape_bias = 0.7 - r.test_error / 100.0;
            r.texture_bias = 0.1 + r.test_error / 100.0;
            r.residual_bias = 1.0 - *r.shape_bias - *r.texture_bias;
        }
        r.wall_time = static_cast<double>(e) + 0.5;
        store.append_epoch_record(manifest.run_id, r);
    }
    store.finalize_run(manifest.run_id, RunStatus::complete);
    return manifest.run_id;
}

}  // namespace

TEST_CASE("round3 rounds half to even at three decimals") {
    CHECK(report::round3(1.23456) == doctest::Approx(1.235).epsilon(1e-12));
    CHECK(report::round3(-1.23456) == doctest::Approx(-1.235).epsilon(1e-12));
    CHECK(report::round3(0.8635) == doctest::Approx(std::nearbyint(0.8635 * 1000.0) / 1000.0));
    CHECK(report::round3(2.0) == 2.0);
}

TEST_CASE("analyze_run needs at least two records") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    RunConfig c;
    c.architecture = ArchitectureId::tinycnn;
    c.init = InitMode::scratch;
    c.epochs = 1;
    auto manifest = store.create_run(c);
    EpochRecord r;
    r.epoch = 0;
    r.test_error = 10.0;
    store.append_epoch_record(manifest.run_id, r);
    CHECK_THROWS_AS(report::analyze_run(store, manifest.run_id), InsufficientDataError);
}

TEST_CASE("emit_report produces the full bundle deterministically") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    const auto run_id = make_dd_run(store, true);

    const fs::path out = dir.path / "report";
    const auto bundle = report::emit_report(store, run_id, out);
    CHECK(bundle.run_id == run_id);
    for (const fs::path* ref : {&bundle.curve_plot_ref, &bundle.bias_plot_ref,
                                &bundle.scatter_plot_ref, &bundle.table_ref, &bundle.json_ref,
                                &bundle.summary_ref}) {
        CHECK(fs::exists(*ref));
        CHECK(fs::file_size(*ref) > 0);
    }

    const auto analysis = report::analyze_run(store, run_id);
    CHECK(analysis.seg.double_descent_detected);
    CHECK(analysis.seg.phase_ranges.size() == 3);

    // The CSV table prints the report's own values at 3 dp.
    const std::string table = read_file(bundle.table_ref);
    CHECK(table.rfind("phase,start,end,r_shape,r_texture,s,n_points\n", 0) == 0);
    int rows = 0;
    for (char ch : table) rows += ch == '\n';
    CHECK(rows == 4);  // header + 3 phases

    // Regeneration is byte-identical and clears stale files.
    const std::string curve_before = read_file(bundle.curve_plot_ref);
    std::ofstream(out / "stale.txt") << "stale";
    const auto bundle2 = report::emit_report(store, run_id, out);
    CHECK(read_file(bundle2.curve_plot_ref) == curve_before);
    CHECK_FALSE(fs::exists(out / "stale.txt"));
}

TEST_CASE("runs without probe records omit bias artifacts with a note") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    const auto run_id = make_dd_run(store, false);
    const fs::path out = dir.path / "report";
    const auto bundle = report::emit_report(store, run_id, out);
    CHECK(fs::exists(bundle.curve_plot_ref));
    CHECK(bundle.bias_plot_ref.empty());
    CHECK(bundle.scatter_plot_ref.empty());
    const std::string summary = read_file(bundle.summary_ref);
    CHECK(summary.find("No probe records") != std::string::npos);
}

TEST_CASE("monotone run reports no double descent") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    RunConfig c;
    c.architecture = ArchitectureId::tinycnn;
    c.init = InitMode::scratch;
    c.epochs = 20;
    auto manifest = store.create_run(c);
    for (std::int64_t e = 0; e < 20; ++e) {
        EpochRecord r;
        r.epoch = e;
        r.test_error = 30.0 * std::exp(-0.3 * static_cast<double>(e)) + 5.0;
        r.train_error = r.test_error * 0.5;
        r.wall_time = static_cast<double>(e);
        store.append_epoch_record(manifest.run_id, r);
    }
    const auto bundle = report::emit_report(store, manifest.run_id, dir.path / "report");
    const auto analysis = report::analyze_run(store, manifest.run_id);
    CHECK_FALSE(analysis.seg.double_descent_detected);
    const std::string summary = read_file(bundle.summary_ref);
    CHECK(summary.find("not detected") != std::string::npos);
}

TEST_CASE("filter grid tiles ResNet18's 64 first-layer filters into 8x8") {
    TempDir dir;
    torch::manual_seed(0);
    auto model = nets::make_model(ArchitectureId::resnet18, 10);
    const fs::path out = dir.path / "filters.png";
    report::render_filter_grid(model->first_conv()->weight, out);
    REQUIRE(fs::exists(out));
    // 8 columns/rows of 32px tiles with 2px gaps: 8*34+2 = 274.
    const auto decoded = img::load_image(out);
    CHECK(decoded.size(1) == 274);
    CHECK(decoded.size(2) == 274);
}

TEST_CASE("constant filters render mid-gray") {
    TempDir dir;
    const fs::path out = dir.path / "zero_filters.png";
    report::render_filter_grid(torch::zeros({4, 3, 3, 3}), out);
    REQUIRE(fs::exists(out));
    const auto decoded = img::load_image(out);
    // Center of the first tile (tiles start at the 2px gap offset).
    const float v = decoded.index({0, 2 + 16, 2 + 16}).item<float>();
    CHECK(v > 0.49f);
    CHECK(v < 0.51f);
}
