#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ddb/errors.hpp"
#include "ddb/torch/trainer.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest_torch.h"

namespace fs = std::filesystem;
using namespace ddb;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ddb_trainer_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// CIFAR-10 record layout: 1 label byte + 3072 image bytes.
void write_fake_split(const fs::path& file, int n, int num_classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    for (int i = 0; i < n; ++i) {
        out.put(static_cast<char>(i % num_classes));
        for (int b = 0; b < 3072; ++b) out.put(static_cast<char>(rng() & 0xff));
    }
}

fs::path make_fake_dataset(const TempDir& dir, int n_train = 64, int n_test = 32) {
    const fs::path root = dir.path / "data";
    fs::create_directories(root);
    write_fake_split(root / "train.bin", n_train, 4, 11);
    write_fake_split(root / "test.bin", n_test, 4, 12);
    return root;
}

RunConfig smoke_config(const fs::path& data_root, std::int64_t epochs) {
    RunConfig c;
    c.dataset = DatasetId::custom;
    c.architecture = ArchitectureId::tinycnn;
    c.init = InitMode::scratch;
    c.noise_p = 0.2;
    c.batch_size = 16;
    c.epochs = epochs;
    c.seed = 31337;
    c.probe_cadence = 1;
    c.probe_layers = {-1};
    c.data_root = data_root.string();
    return c;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("zero-epoch run completes without records or data access") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    RunConfig c = smoke_config(dir.path / "missing_data", 0);
    const auto manifest = train::run_training(c, store, {.quiet = true});
    CHECK(manifest.status == RunStatus::complete);
    CHECK(manifest.record_count == 0);
}

TEST_CASE("pretrained init without a weights file is rejected") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    RunConfig c = smoke_config(make_fake_dataset(dir), 1);
    c.init = InitMode::pretrained;
    unsetenv("DDB_PRETRAINED_DIR");
    CHECK_THROWS_AS(train::run_training(c, store, {.quiet = true}), ConfigurationError);
}

TEST_CASE("smoke run: records are well-formed and probes recorded") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    RunConfig c = smoke_config(make_fake_dataset(dir), 2);
    const auto manifest = train::run_training(c, store, {.quiet = true});
    CHECK(manifest.status == RunStatus::complete);
    REQUIRE(manifest.record_count == 2);

    const auto records = store.load_records(manifest.run_id);
    double last_wall = -1.0;
    for (const auto& r : records) {
        CHECK(r.train_error >= 0.0);
        CHECK(r.train_error <= 100.0);
        CHECK(r.test_error >= 0.0);
        CHECK(r.test_error <= 100.0);
        CHECK(r.wall_time > last_wall);
        last_wall = r.wall_time;
        // Probe cadence 1: every record carries a bias triple and checkpoint.
        REQUIRE(r.shape_bias.has_value());
        REQUIRE(r.texture_bias.has_value());
        REQUIRE(r.residual_bias.has_value());
        CHECK(*r.shape_bias + *r.texture_bias + *r.residual_bias ==
              doctest::Approx(1.0).epsilon(1e-6));
        REQUIRE(r.checkpoint_ref.has_value());
        CHECK(fs::exists(store.run_dir(manifest.run_id) / *r.checkpoint_ref));
    }
    // The layer sweep side file carries one line per probe epoch and layer.
    CHECK(fs::exists(store.run_dir(manifest.run_id) / "bias_layers"));
}

TEST_CASE("resume rejects a mismatched config") {
    TempDir dir;
    RunStore store(dir.path / "runs");
    RunConfig c = smoke_config(make_fake_dataset(dir), 1);
    const auto manifest = train::run_training(c, store, {.quiet = true});
    RunConfig other = c;
    other.noise_p = 0.5;
    train::TrainOptions opts;
    opts.resume_run_id = manifest.run_id;
    opts.quiet = true;
    CHECK_THROWS_AS(train::run_training(other, store, opts), StateError);
}

TEST_CASE("kill-and-resume: byte-identical prefix, identical replayed metrics") {
    TempDir dir;
    const auto data_root = make_fake_dataset(dir);
    RunConfig c = smoke_config(data_root, 4);

    RunStore store_a(dir.path / "runs_a");
    const auto full = train::run_training(c, store_a, {.quiet = true});
    REQUIRE(full.record_count == 4);
    const auto full_records = store_a.load_records(full.run_id);

    // Simulate a crash after epoch 1: clone the run, drop the last two
    // records and leave a torn partial line, keep the stale manifest.
    RunStore store_b(dir.path / "runs_b");
    fs::create_directories(store_b.root());
    fs::copy(store_a.run_dir(full.run_id), store_b.run_dir(full.run_id),
             fs::copy_options::recursive);
    const fs::path records_path = store_b.run_dir(full.run_id) / "records";
    {
        std::ifstream in(records_path);
        std::string header, line0, line1;
        std::getline(in, header);
        std::getline(in, line0);
        std::getline(in, line1);
        std::ofstream out(records_path, std::ios::trunc | std::ios::binary);
        out << header << '\n' << line0 << '\n' << line1 << '\n' << "2,13.7";  // torn line
    }
    // Drop the checkpoints past the crash point too.
    fs::remove(store_b.checkpoint_dir(full.run_id) / "epoch_000002.pt");
    fs::remove(store_b.checkpoint_dir(full.run_id) / "epoch_000002.pt.optim");
    fs::remove(store_b.checkpoint_dir(full.run_id) / "epoch_000003.pt");
    fs::remove(store_b.checkpoint_dir(full.run_id) / "epoch_000003.pt.optim");

    const std::string prefix_before = read_file(records_path);

    train::TrainOptions opts;
    opts.resume_run_id = full.run_id;
    opts.quiet = true;
    const auto resumed = train::run_training(c, store_b, opts);
    CHECK(resumed.status == RunStatus::complete);
    CHECK(resumed.record_count == 4);

    // Records 0..1 (including the header) are byte-identical; the torn
    // line was discarded, not extended.
    const std::string after = read_file(records_path);
    std::string expected_prefix = prefix_before.substr(0, prefix_before.rfind('\n') + 1);
    CHECK(after.substr(0, expected_prefix.size()) == expected_prefix);

    // Replayed epochs reproduce the original metrics exactly; wall_time
    // legitimately differs across processes.
    const auto resumed_records = store_b.load_records(full.run_id);
    REQUIRE(resumed_records.size() == 4);
    for (std::size_t i = 2; i < 4; ++i) {
        CHECK(resumed_records[i].epoch == full_records[i].epoch);
        CHECK(resumed_records[i].train_error == full_records[i].train_error);
        CHECK(resumed_records[i].test_error == full_records[i].test_error);
        CHECK(resumed_records[i].train_loss == full_records[i].train_loss);
        CHECK(resumed_records[i].test_loss == full_records[i].test_loss);
        CHECK(*resumed_records[i].shape_bias == *full_records[i].shape_bias);
        CHECK(*resumed_records[i].texture_bias == *full_records[i].texture_bias);
    }
}
