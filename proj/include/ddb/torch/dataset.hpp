#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "ddb/run_store.hpp"

namespace ddb::data {

// In-memory image classification split: float images in [0, 1], NCHW.
struct ImageDataset {
    torch::Tensor images;  // N x 3 x 32 x 32
    std::vector<std::int32_t> labels;
    int num_classes = 0;

    std::int64_t size() const { return images.size(0); }
};

// Reads the standard published binary formats: CIFAR-10 batch files
// (data_batch_*.bin / test_batch.bin, 3073-byte records), CIFAR-100
// train.bin / test.bin (3074-byte records, fine labels used). The custom
// dataset uses CIFAR-10 record layout in train.bin / test.bin with the
// class count inferred from the labels.
ImageDataset load_dataset(DatasetId dataset, const std::string& data_root, bool train);

// Per-channel normalization constants applied after augmentation.
torch::Tensor normalize(const torch::Tensor& images, DatasetId dataset);

}  // namespace ddb::data
