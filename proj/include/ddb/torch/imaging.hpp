#pragma once

#include <filesystem>

#include <torch/torch.h>

#include "ddb/synth_probe.hpp"

namespace ddb::img {

// RGB float tensor 3 x H x W in [0, 1].
torch::Tensor load_image(const std::filesystem::path& file);

// Saves as lossless PNG.
void save_image(const torch::Tensor& image, const std::filesystem::path& file);
void save_gray_png(const GrayImage& image, const std::filesystem::path& file);

}  // namespace ddb::img
