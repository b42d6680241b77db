#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ddb/bias.hpp"
#include "ddb/pairset.hpp"

namespace ddb {

// Grayscale image in [0, 1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    float at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Procedural probe images: a binary mask (shape) filled with a procedural
// texture, black background. Mask and fill are addressed by ids of the form
// "<family>:<seed>", so every image is exactly reconstructible from its
// provenance alone.
struct SynthSpec {
    int image_size = 64;
    int n_masks = 16;
    int n_fills = 16;
    std::int64_t n_shape_pairs = 16;
    std::int64_t n_texture_pairs = 16;
    std::vector<std::string> mask_families = {"ellipse", "polygon"};
    std::vector<std::string> fill_families = {"checker", "stripes", "noise"};
};

struct SyntheticPairSet {
    PairSet meta;  // content slots carry mask ids, style slots carry fill ids
    std::vector<std::pair<GrayImage, GrayImage>> shape_images;
    std::vector<std::pair<GrayImage, GrayImage>> texture_images;
    SynthSpec spec;
};

GrayImage render_mask(const std::string& mask_id, int size);          // binary {0,1}
GrayImage render_synthetic_image(const std::string& mask_id, const std::string& fill_id, int size);

SyntheticPairSet generate_synthetic_probe(const SynthSpec& spec, std::uint64_t seed);

// Stand-in feature extractors used as oracles for the probing pipeline.
// Both map a grayscale image to a fixed-length feature vector.
std::vector<double> mask_downsample_features(const GrayImage& image, int grid = 8);
std::vector<double> fill_histogram_features(const GrayImage& image, int bins = 16);

// Apply an extractor to one side of a pair list, producing an activation
// matrix with one row per pair.
template <typename Extractor>
ActivationMatrix extract_features(const std::vector<std::pair<GrayImage, GrayImage>>& pairs,
                                  bool side_b, Extractor&& extract) {
    ActivationMatrix m;
    for (const auto& [a, b] : pairs) {
        const auto f = extract(side_b ? b : a);
        if (m.cols == 0) m.cols = static_cast<std::int64_t>(f.size());
        m.values.insert(m.values.end(), f.begin(), f.end());
        m.rows += 1;
    }
    return m;
}

}  // namespace ddb
