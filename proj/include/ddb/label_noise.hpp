#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ddb {

// Label corruption sampled once per run and fixed thereafter. The mask is
// a pure function of (seed, p, label order) and is bitwise reproducible
// across processes.
struct NoisyLabelSet {
    std::vector<std::int32_t> original_labels;
    std::vector<std::int32_t> noisy_labels;
    std::vector<std::uint8_t> corrupted_mask;
    double p = 0.0;
    std::uint64_t seed = 0;
    std::int32_t num_classes = 0;

    std::int64_t corrupted_count() const;
    void validate() const;
};

// Each label is independently corrupted with probability p; a corrupted
// label is redrawn uniformly from the other num_classes-1 classes.
NoisyLabelSet inject_label_noise(std::span<const std::int32_t> labels, double p,
                                 std::uint64_t seed, std::int32_t num_classes);

}  // namespace ddb
