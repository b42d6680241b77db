#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <torch/torch.h>

#include "ddb/bias.hpp"
#include "ddb/pairset.hpp"
#include "ddb/synth_probe.hpp"
#include "ddb/torch/models.hpp"

namespace ddb::probe {

// Both sides of each factor's pairs, stacked N x 3 x 32 x 32 and already
// normalized for model input.
struct ProbeBatch {
    torch::Tensor shape_a, shape_b;
    torch::Tensor texture_a, texture_b;
};

// Materialized pairset (PNG files referenced from the manifest, paths
// resolved relative to the manifest directory).
ProbeBatch load_probe_batch(const std::filesystem::path& manifest_path, DatasetId normalize_as);

// In-memory synthetic pairset, grayscale replicated to 3 channels and
// pooled down to the model input size.
ProbeBatch probe_batch_from_synthetic(const SyntheticPairSet& set, DatasetId normalize_as);

// Raw feature map at a tap (eval mode, no grad): N x C x H x W.
torch::Tensor raw_feature_map(nets::ConvNet& model, int layer_index, const torch::Tensor& images);

// Global-average-pooled activations: one scalar per neuron (channel).
ActivationMatrix capture_activations(nets::ConvNet& model, int layer_index,
                                     const torch::Tensor& images);

BiasEstimate probe_bias(nets::ConvNet& model, const ProbeBatch& batch, int layer_index,
                        BaselineMode mode = BaselineMode::mean_rho);

// One estimate per requested layer over the same batch. All indices are
// validated before any forward pass.
std::vector<BiasEstimate> layer_sweep(nets::ConvNet& model, const ProbeBatch& batch,
                                      std::span<const int> layer_indices,
                                      BaselineMode mode = BaselineMode::mean_rho);

// Module parameter persistence for checkpoints.
void save_checkpoint(nets::ConvNet& model, const std::filesystem::path& path);
void load_checkpoint(nets::ConvNet& model, const std::filesystem::path& path);

}  // namespace ddb::probe
