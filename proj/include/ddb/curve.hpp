#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddb {

// Epoch-indexed series. Epochs are strictly increasing but need not be
// contiguous (bias series sampled at a probe cadence have holes).
struct TimeSeries {
    std::vector<std::int64_t> epochs;
    std::vector<double> values;

    std::size_t size() const { return epochs.size(); }
    void validate() const;  // throws ValidationError on malformed series
};

// Half-open [start, end) epoch interval.
struct EpochRange {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t e) const { return e >= start && e < end; }
    bool operator==(const EpochRange&) const = default;
};

struct PhaseConfig {
    double theta = 0.1;   // plateau threshold, percentage points
    std::int64_t lag = 5; // lag L in delta_e(i) = |e_i - e_{i+L}|

    void validate() const;
};

// Three-phase split of a test-error curve. b1 ends Phase 1 (the first
// plateau/minimum); b2 ends Phase 2 (the rise). Epoch b1 belongs to
// Phase 1, b2 to Phase 2. Ranges are half-open and, when double descent
// is detected, partition [first epoch, last epoch] exactly.
struct PhaseSegmentation {
    std::int64_t b1 = 0;
    std::optional<std::int64_t> b2;
    bool double_descent_detected = false;
    std::vector<EpochRange> phase_ranges;  // 1 to 3 entries
};

struct PhaseCorrelation {
    int phase = 0;  // 1-based phase number
    EpochRange range;
    bool reported = false;  // false when fewer than 3 joined points
    double r_shape = 0.0;
    double r_texture = 0.0;
    double s = 0.0;
    std::int64_t n_points = 0;
    std::string note;  // diagnostic when not reported
};

struct PhaseCorrelationReport {
    std::vector<PhaseCorrelation> phases;
};

// Centered moving average with symmetric truncation at the boundaries.
// window must be odd; window=1 is the identity.
TimeSeries moving_average(const TimeSeries& series, int window = 5);

// Lagged-difference phase segmentation of a test-error curve.
// delta_e(i) = |e_i - e_{i+L}|; Phase 1 closes at the smallest i with
// delta_e <= theta; the detector re-arms on the next delta_e > theta and
// Phase 2 closes at the next plateau after that.
PhaseSegmentation segment_phases(const TimeSeries& test_error, const PhaseConfig& config = {});

// Pearson product-moment correlation. Either side constant returns 0.
double pearson(std::span<const double> x, std::span<const double> y);

// s = (|r_shape| + |r_texture|) / 2.
double sync_score(double r_shape, double r_texture);

// Per-phase correlations between test error and the two bias series,
// inner-joined on epochs within each phase range.
PhaseCorrelationReport phase_correlations(const TimeSeries& test_error,
                                          const TimeSeries& shape_bias,
                                          const TimeSeries& texture_bias,
                                          const PhaseSegmentation& seg);

}  // namespace ddb
