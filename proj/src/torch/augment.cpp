#include "ddb/torch/augment.hpp"

#include "ddb/errors.hpp"

namespace ddb::aug {

namespace {
constexpr int kPad = 4;
constexpr int kSize = 32;
}  // namespace

torch::Tensor pad_crop_flip(const torch::Tensor& image, const CropParams& params) {
    if (image.dim() != 3 || image.size(0) != 3 || image.size(1) != kSize || image.size(2) != kSize) {
        throw ShapeError("augment: expected a 3x32x32 image");
    }
    if (params.offset_y < 0 || params.offset_y > 2 * kPad || params.offset_x < 0 ||
        params.offset_x > 2 * kPad) {
        throw ShapeError("augment: crop offset out of [0, 8]");
    }
    auto padded = torch::constant_pad_nd(image, {kPad, kPad, kPad, kPad}, 0.0);
    auto crop = padded.slice(1, params.offset_y, params.offset_y + kSize)
                    .slice(2, params.offset_x, params.offset_x + kSize);
    if (params.flip) crop = crop.flip({2});
    return crop.contiguous();
}

CropParams sample_crop(std::mt19937_64& rng) {
    CropParams p;
    p.offset_y = static_cast<int>(rng() % (2 * kPad + 1));
    p.offset_x = static_cast<int>(rng() % (2 * kPad + 1));
    p.flip = (rng() & 1) != 0;
    return p;
}

torch::Tensor augment_batch(const torch::Tensor& batch, std::mt19937_64& rng) {
    std::vector<torch::Tensor> out;
    out.reserve(batch.size(0));
    for (std::int64_t i = 0; i < batch.size(0); ++i) {
        out.push_back(pad_crop_flip(batch[i], sample_crop(rng)));
    }
    return torch::stack(out);
}

}  // namespace ddb::aug
