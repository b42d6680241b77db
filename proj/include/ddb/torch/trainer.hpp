#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "ddb/run_store.hpp"
#include "ddb/torch/models.hpp"

namespace ddb::train {

struct TrainOptions {
    // Materialized probe pairset manifest; empty selects the built-in
    // synthetic probe set derived from the run seed.
    std::filesystem::path probe_manifest;
    // Resume an existing run instead of creating a new one.
    std::string resume_run_id;
    // TorchScript parameter source for init=pretrained. Empty falls back
    // to $DDB_PRETRAINED_DIR/<arch>.pt.
    std::string pretrained_path;
    bool quiet = false;
};

// Full training loop: one Adam pass per epoch over the noise-injected
// training set, per-epoch train/test evaluation, bias probing and
// checkpointing at the probe cadence, one EpochRecord appended per epoch.
// Label corruption is sampled once at run start and reused every epoch.
RunManifest run_training(const RunConfig& config, RunStore& store, const TrainOptions& opts = {});

}  // namespace ddb::train
