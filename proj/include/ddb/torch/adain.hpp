#pragma once

#include <filesystem>
#include <string>

#include <torch/script.h>
#include <torch/torch.h>

#include "ddb/pairset.hpp"

namespace ddb::adain {

// Channel-wise feature renormalization: content features take on the
// style features' per-channel mean and standard deviation. Inputs are
// N x C x H x W; sigma is epsilon-stabilized against flat content
// channels.
torch::Tensor adain_transform(const torch::Tensor& content_features,
                              const torch::Tensor& style_features, double eps = 1e-5);

struct StylizationAssets {
    std::string encoder_path;  // TorchScript image -> features
    std::string decoder_path;  // TorchScript features -> image
    double alpha = 1.0;        // blend between content features and the transform

    // Resolves encoder.pt / decoder.pt under a directory ($DDB_ADAIN_ASSETS
    // when dir is empty). Returns false when the files are absent.
    static bool locate(const std::string& dir, StylizationAssets& out);
};

class Stylizer {
  public:
    explicit Stylizer(const StylizationAssets& assets);

    torch::Tensor encode(const torch::Tensor& image);  // 3xHxW -> features
    // Output has the content image's spatial dimensions, values in [0, 1].
    torch::Tensor stylize(const torch::Tensor& content, const torch::Tensor& style);

  private:
    torch::jit::script::Module encoder_;
    torch::jit::script::Module decoder_;
    double alpha_;
};

// Materializes shape- and texture-matched stylized pairs from two image
// directories into out_dir (PNG files + pairset manifest "pairset.tsv").
PairSet build_pair_sets(const std::filesystem::path& content_dir,
                        const std::filesystem::path& style_dir, std::int64_t n_shape_pairs,
                        std::int64_t n_texture_pairs, std::uint64_t seed,
                        const StylizationAssets& assets, const std::filesystem::path& out_dir,
                        bool exhaustive = false);

}  // namespace ddb::adain
