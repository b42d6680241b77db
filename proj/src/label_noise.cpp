#include "ddb/label_noise.hpp"

#include <random>

#include "ddb/errors.hpp"

namespace ddb {

std::int64_t NoisyLabelSet::corrupted_count() const {
    std::int64_t n = 0;
    for (auto m : corrupted_mask) n += m != 0;
    return n;
}

void NoisyLabelSet::validate() const {
    const auto n = original_labels.size();
    if (noisy_labels.size() != n || corrupted_mask.size() != n) {
        throw ValidationError("NoisyLabelSet: field length mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (corrupted_mask[i] ? noisy_labels[i] == original_labels[i]
                              : noisy_labels[i] != original_labels[i]) {
            throw ValidationError("NoisyLabelSet: mask inconsistent with labels");
        }
    }
}

NoisyLabelSet inject_label_noise(std::span<const std::int32_t> labels, double p,
                                 std::uint64_t seed, std::int32_t num_classes) {
    if (p < 0.0 || p > 1.0) throw ValidationError("inject_label_noise: p must be in [0, 1]");
    if (num_classes < 2 && p > 0.0) {
        throw ValidationError("inject_label_noise: num_classes must be >= 2 when p > 0");
    }
    for (auto l : labels) {
        if (l < 0 || l >= num_classes) {
            throw ValidationError("inject_label_noise: label out of [0, num_classes)");
        }
    }

    NoisyLabelSet out;
    out.original_labels.assign(labels.begin(), labels.end());
    out.noisy_labels = out.original_labels;
    out.corrupted_mask.assign(labels.size(), 0);
    out.p = p;
    out.seed = seed;
    out.num_classes = num_classes;

    // mt19937_64 raw draws only: the mapping to [0,1) and to a class offset
    // is spelled out here so the result does not depend on any library's
    // distribution implementation.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < p) {
            const auto offset =
                1 + static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(num_classes - 1));
            out.noisy_labels[i] = (labels[i] + offset) % num_classes;
            out.corrupted_mask[i] = 1;
        }
    }
    return out;
}

}  // namespace ddb
