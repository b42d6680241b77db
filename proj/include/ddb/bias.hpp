#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddb {

// Pooled activations: one row per image, one column per neuron (channel).
struct ActivationMatrix {
    std::vector<double> values;  // row-major, rows * cols
    std::int64_t rows = 0;       // N images
    std::int64_t cols = 0;       // |z| neurons
    int layer_index = 0;
    std::string pooling = "gap";  // descriptor of the spatial reduction

    double at(std::int64_t r, std::int64_t c) const { return values[r * cols + c]; }
    void validate() const;
};

enum class BiasFactor { shape, texture };

struct CorrelationVector {
    std::vector<double> rho;  // one entry per neuron, in [-1, 1]
    BiasFactor factor = BiasFactor::shape;
    std::int64_t n_pairs = 0;
};

// Score normalization variants for the softmax dimensionality estimate.
//   mean_rho:       scores are mean correlations with baseline 1 (default).
//   raw_paper:      unscaled sums with baseline |z|, stabilized softmax.
//   reference_impl: per-neuron softmax over (rho_shape_i, rho_texture_i, 1)
//                   averaged over neurons, as in the public shape/texture
//                   neuron-counting implementation.
enum class BaselineMode { mean_rho, raw_paper, reference_impl };

struct BiasEstimate {
    double shape_frac = 0.0;
    double texture_frac = 0.0;
    double residual_frac = 0.0;
    double scores[3] = {0.0, 0.0, 0.0};  // pre-normalization (shape, texture, baseline)
    int layer_index = 0;
    std::int64_t epoch = -1;
};

// Per-neuron Pearson correlation between the two sides of a pair batch.
// Row k of acts_a and acts_b hold the two images of pair k. Zero-variance
// columns on either side yield rho = 0.
CorrelationVector neuron_pair_correlation(const ActivationMatrix& acts_a,
                                          const ActivationMatrix& acts_b);

// Softmax dimensionality estimate over (shape score, texture score, baseline).
BiasEstimate bias_fractions(const CorrelationVector& rho_shape,
                            const CorrelationVector& rho_texture,
                            BaselineMode mode = BaselineMode::mean_rho);

BaselineMode baseline_mode_from_string(const std::string& name);
std::string to_string(BaselineMode mode);

}  // namespace ddb
