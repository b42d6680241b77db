#pragma once

#include <cstdint>
#include <random>

#include <torch/torch.h>

namespace ddb::aug {

struct CropParams {
    int offset_y = 4;  // top-left corner of the 32x32 crop in the 40x40 padded image
    int offset_x = 4;
    bool flip = false;
};

// Zero-pad a 3x32x32 image by 4 pixels per side, crop 32x32 at the given
// offset, optionally flip horizontally. offset (4, 4) without flip is the
// identity.
torch::Tensor pad_crop_flip(const torch::Tensor& image, const CropParams& params);

// Seeded random parameters: offsets uniform in [0, 8], flip with p = 0.5.
CropParams sample_crop(std::mt19937_64& rng);

// Random augmentation of a batch (N x 3 x 32 x 32), one draw per image.
torch::Tensor augment_batch(const torch::Tensor& batch, std::mt19937_64& rng);

}  // namespace ddb::aug
