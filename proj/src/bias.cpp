#include "ddb/bias.hpp"

#include <algorithm>
#include <cmath>

#include "ddb/curve.hpp"
#include "ddb/errors.hpp"

namespace ddb {

void ActivationMatrix::validate() const {
    if (rows <= 0 || cols <= 0) throw ShapeError("ActivationMatrix: empty matrix");
    if (static_cast<std::int64_t>(values.size()) != rows * cols) {
        throw ShapeError("ActivationMatrix: values size does not match rows*cols");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("ActivationMatrix: non-finite activation");
    }
}

CorrelationVector neuron_pair_correlation(const ActivationMatrix& acts_a,
                                          const ActivationMatrix& acts_b) {
    acts_a.validate();
    acts_b.validate();
    if (acts_a.rows != acts_b.rows || acts_a.cols != acts_b.cols) {
        throw ShapeError("neuron_pair_correlation: activation shapes differ");
    }
    const std::int64_t n = acts_a.rows;
    const std::int64_t z = acts_a.cols;
    if (n < 3) throw InsufficientDataError("neuron_pair_correlation: need at least 3 pairs");

    CorrelationVector out;
    out.n_pairs = n;
    out.rho.resize(static_cast<std::size_t>(z));
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (std::int64_t c = 0; c < z; ++c) {
        for (std::int64_t r = 0; r < n; ++r) {
            a[r] = acts_a.at(r, c);
            b[r] = acts_b.at(r, c);
        }
        out.rho[c] = pearson(a, b);  // constant column -> 0 by convention
    }
    return out;
}

namespace {

// Stabilized three-way softmax.
void softmax3(const double v[3], double out[3]) {
    const double m = std::max({v[0], v[1], v[2]});
    double e[3], sum = 0.0;
    for (int i = 0; i < 3; ++i) { e[i] = std::exp(v[i] - m); sum += e[i]; }
    for (int i = 0; i < 3; ++i) out[i] = e[i] / sum;
}

}  // namespace

BiasEstimate bias_fractions(const CorrelationVector& rho_shape,
                            const CorrelationVector& rho_texture,
                            BaselineMode mode) {
    if (rho_shape.rho.size() != rho_texture.rho.size()) {
        throw ShapeError("bias_fractions: correlation vector lengths differ");
    }
    const auto z = static_cast<std::int64_t>(rho_shape.rho.size());
    if (z < 1) throw ShapeError("bias_fractions: empty correlation vectors");

    double sum_s = 0.0, sum_t = 0.0;
    for (double r : rho_shape.rho) sum_s += r;
    for (double r : rho_texture.rho) sum_t += r;

    BiasEstimate est;
    double frac[3];
    switch (mode) {
        case BaselineMode::mean_rho: {
            const double v[3] = {sum_s / z, sum_t / z, 1.0};
            softmax3(v, frac);
            est.scores[0] = v[0]; est.scores[1] = v[1]; est.scores[2] = v[2];
            break;
        }
        case BaselineMode::raw_paper: {
            const double v[3] = {sum_s, sum_t, static_cast<double>(z)};
            softmax3(v, frac);
            est.scores[0] = v[0]; est.scores[1] = v[1]; est.scores[2] = v[2];
            break;
        }
        case BaselineMode::reference_impl: {
            // Per-neuron softmax over (rho_shape_i, rho_texture_i, 1),
            // averaged over neurons.
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::int64_t i = 0; i < z; ++i) {
                const double v[3] = {rho_shape.rho[i], rho_texture.rho[i], 1.0};
                double f[3];
                softmax3(v, f);
                for (int k = 0; k < 3; ++k) acc[k] += f[k];
            }
            for (int k = 0; k < 3; ++k) frac[k] = acc[k] / z;
            est.scores[0] = sum_s; est.scores[1] = sum_t; est.scores[2] = static_cast<double>(z);
            break;
        }
    }
    est.shape_frac = frac[0];
    est.texture_frac = frac[1];
    est.residual_frac = frac[2];
    return est;
}

BaselineMode baseline_mode_from_string(const std::string& name) {
    if (name == "mean_rho") return BaselineMode::mean_rho;
    if (name == "raw_paper") return BaselineMode::raw_paper;
    if (name == "reference_impl") return BaselineMode::reference_impl;
    throw ValidationError("unknown baseline mode: " + name);
}

std::string to_string(BaselineMode mode) {
    switch (mode) {
        case BaselineMode::mean_rho: return "mean_rho";
        case BaselineMode::raw_paper: return "raw_paper";
        case BaselineMode::reference_impl: return "reference_impl";
    }
    return "mean_rho";
}

}  // namespace ddb
