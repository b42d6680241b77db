#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddb/curve.hpp"

namespace ddb {

enum class DatasetId { cifar10, cifar100, custom };
enum class ArchitectureId { resnet18, mobilenetv2, densenet121, efficientnetb0, tinycnn };
enum class InitMode { scratch, pretrained };

// Full configuration and identity of one training run. Defaults reproduce
// the baseline setting: ResNet18 on CIFAR-10, pretrained init, p=0.2 label
// noise, Adam 1e-4, batch 128, augmentation on.
struct RunConfig {
    DatasetId dataset = DatasetId::cifar10;
    ArchitectureId architecture = ArchitectureId::resnet18;
    InitMode init = InitMode::pretrained;
    double noise_p = 0.2;
    double learning_rate = 1e-4;
    std::int64_t batch_size = 128;
    std::int64_t epochs = 0;
    std::uint64_t seed = 0;
    std::int64_t probe_cadence = 1;
    std::vector<int> probe_layers = {-1};  // -1 = the architecture's final conv layer
    std::string data_root;
    bool augmentation = true;

    bool probing_enabled() const { return !probe_layers.empty(); }
    void validate() const;

    // Canonical flat key=value serialization (also the --config file format).
    std::string serialize() const;
    static RunConfig parse(const std::string& text);
    std::uint64_t hash() const;  // FNV-1a over the canonical serialization
};

struct EpochRecord {
    std::int64_t epoch = 0;  // 0-based
    double train_error = 0.0;  // percent
    double test_error = 0.0;   // percent
    double train_loss = 0.0;   // nats
    double test_loss = 0.0;    // nats
    std::optional<double> shape_bias;
    std::optional<double> texture_bias;
    std::optional<double> residual_bias;
    std::optional<std::string> checkpoint_ref;
    double wall_time = 0.0;  // seconds since run start

    void validate() const;
};

enum class RunStatus { running, complete, failed };

struct RunManifest {
    std::string run_id;
    RunConfig config;
    std::string created_at;  // ISO-8601 UTC
    RunStatus status = RunStatus::running;
    std::int64_t record_count = 0;
};

// Append-only per-run persistence rooted at a store directory. Layout per
// run: <root>/<run_id>/manifest, <root>/<run_id>/records (line-delimited
// CSV, fixed header), <root>/<run_id>/checkpoints/. Single writer per run,
// any number of readers; a partial trailing line is ignored on read.
class RunStore {
  public:
    explicit RunStore(std::filesystem::path root);

    RunManifest create_run(const RunConfig& config);
    RunManifest append_epoch_record(const std::string& run_id, const EpochRecord& record);
    RunManifest finalize_run(const std::string& run_id, RunStatus status);
    // Reconciles the manifest with the records file after an interrupted
    // writer (a crash can land between record append and manifest save)
    // and reopens the run for appending.
    RunManifest reopen_run(const std::string& run_id);

    RunManifest load_manifest(const std::string& run_id) const;
    std::vector<EpochRecord> load_records(const std::string& run_id) const;
    TimeSeries load_run_series(const std::string& run_id, const std::string& metric_name) const;

    std::filesystem::path run_dir(const std::string& run_id) const;
    std::filesystem::path checkpoint_dir(const std::string& run_id) const;
    const std::filesystem::path& root() const { return root_; }

    static const std::vector<std::string>& metric_names();

  private:
    std::filesystem::path root_;
    void save_manifest(const RunManifest& manifest) const;  // atomic rewrite
};

// Record CSV line format, shared with tooling.
std::string format_record(const EpochRecord& record);
EpochRecord parse_record(const std::string& line);
extern const char* const kRecordHeader;

std::string to_string(DatasetId v);
std::string to_string(ArchitectureId v);
std::string to_string(InitMode v);
std::string to_string(RunStatus v);
DatasetId dataset_from_string(const std::string& s);
ArchitectureId architecture_from_string(const std::string& s);
InitMode init_from_string(const std::string& s);
RunStatus status_from_string(const std::string& s);

}  // namespace ddb
