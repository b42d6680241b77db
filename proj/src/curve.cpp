#include "ddb/curve.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ddb/errors.hpp"

namespace ddb {

void TimeSeries::validate() const {
    if (epochs.size() != values.size()) {
        throw ValidationError("TimeSeries: epochs/values length mismatch");
    }
    for (std::size_t i = 1; i < epochs.size(); ++i) {
        if (epochs[i] <= epochs[i - 1]) {
            throw ValidationError("TimeSeries: epochs must be strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("TimeSeries: non-finite value");
    }
}

void PhaseConfig::validate() const {
    if (!(theta > 0.0)) throw ValidationError("PhaseConfig: theta must be > 0");
    if (lag < 1) throw ValidationError("PhaseConfig: lag must be >= 1");
}

TimeSeries moving_average(const TimeSeries& series, int window) {
    series.validate();
    if (window < 1 || window % 2 == 0) {
        throw ValidationError("moving_average: window must be odd and >= 1");
    }
    const auto n = static_cast<std::int64_t>(series.size());
    const std::int64_t radius = window / 2;
    TimeSeries out;
    out.epochs = series.epochs;
    out.values.resize(series.values.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t r = std::min({radius, i, n - 1 - i});
        double sum = 0.0;
        for (std::int64_t j = i - r; j <= i + r; ++j) sum += series.values[j];
        out.values[i] = sum / static_cast<double>(2 * r + 1);
    }
    return out;
}

namespace {

// delta_e(i) = |e_i - e_{i+L}| over positions, valid for i in [0, n-L).
std::vector<double> lagged_abs_diff(const std::vector<double>& e, std::int64_t lag) {
    const auto n = static_cast<std::int64_t>(e.size());
    std::vector<double> d(static_cast<std::size_t>(n - lag));
    for (std::int64_t i = 0; i + lag < n; ++i) d[i] = std::abs(e[i] - e[i + lag]);
    return d;
}

}  // namespace

PhaseSegmentation segment_phases(const TimeSeries& test_error, const PhaseConfig& config) {
    test_error.validate();
    config.validate();
    const auto n = static_cast<std::int64_t>(test_error.size());
    if (n <= config.lag + 1) {
        throw InsufficientDataError("segment_phases: series length must exceed lag + 1");
    }
    for (std::size_t i = 1; i < test_error.epochs.size(); ++i) {
        if (test_error.epochs[i] != test_error.epochs[i - 1] + 1) {
            throw ValidationError("segment_phases: epochs must be contiguous");
        }
    }

    const std::int64_t first = test_error.epochs.front();
    const std::int64_t last = test_error.epochs.back();
    const auto delta = lagged_abs_diff(test_error.values, config.lag);
    const auto m = static_cast<std::int64_t>(delta.size());

    PhaseSegmentation seg;

    // Phase 1 closes at the first plateau.
    std::int64_t p1 = -1;
    for (std::int64_t i = 0; i < m; ++i) {
        if (delta[i] <= config.theta) { p1 = i; break; }
    }
    if (p1 < 0) {
        // Error never plateaus in the observed window.
        seg.b1 = last;
        seg.phase_ranges.push_back({first, last + 1});
        return seg;
    }
    seg.b1 = first + p1;

    // Re-arm: require an intervening rise before Phase 2 may close,
    // otherwise the plateau that ended Phase 1 would end Phase 2 too.
    std::int64_t rearm = -1;
    for (std::int64_t i = p1 + 1; i < m; ++i) {
        if (delta[i] > config.theta) { rearm = i; break; }
    }
    if (rearm < 0) {
        seg.phase_ranges.push_back({first, seg.b1 + 1});
        return seg;
    }

    std::int64_t p2 = -1;
    for (std::int64_t i = rearm + 1; i < m; ++i) {
        if (delta[i] <= config.theta) { p2 = i; break; }
    }
    if (p2 < 0) {
        // The rise never settles: Phase 2 is open-ended, no second descent.
        seg.phase_ranges.push_back({first, seg.b1 + 1});
        seg.phase_ranges.push_back({seg.b1 + 1, last + 1});
        return seg;
    }

    seg.b2 = first + p2;
    seg.double_descent_detected = true;
    seg.phase_ranges.push_back({first, seg.b1 + 1});
    seg.phase_ranges.push_back({seg.b1 + 1, *seg.b2 + 1});
    seg.phase_ranges.push_back({*seg.b2 + 1, last + 1});
    return seg;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("pearson: length mismatch");
    const auto n = static_cast<std::int64_t>(x.size());
    if (n < 3) throw InsufficientDataError("pearson: need at least 3 points");

    double mx = 0.0, my = 0.0;
    for (std::int64_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;  // constant side, by convention
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double sync_score(double r_shape, double r_texture) {
    if (std::abs(r_shape) > 1.0 || std::abs(r_texture) > 1.0 ||
        !std::isfinite(r_shape) || !std::isfinite(r_texture)) {
        throw ValidationError("sync_score: correlations must lie in [-1, 1]");
    }
    return 0.5 * (std::abs(r_shape) + std::abs(r_texture));
}

PhaseCorrelationReport phase_correlations(const TimeSeries& test_error,
                                          const TimeSeries& shape_bias,
                                          const TimeSeries& texture_bias,
                                          const PhaseSegmentation& seg) {
    test_error.validate();
    shape_bias.validate();
    texture_bias.validate();

    std::unordered_map<std::int64_t, double> err, shp, tex;
    for (std::size_t i = 0; i < test_error.size(); ++i) err[test_error.epochs[i]] = test_error.values[i];
    for (std::size_t i = 0; i < shape_bias.size(); ++i) shp[shape_bias.epochs[i]] = shape_bias.values[i];
    for (std::size_t i = 0; i < texture_bias.size(); ++i) tex[texture_bias.epochs[i]] = texture_bias.values[i];

    PhaseCorrelationReport report;
    bool any = false;
    for (std::size_t p = 0; p < seg.phase_ranges.size(); ++p) {
        const EpochRange range = seg.phase_ranges[p];
        std::vector<double> e, sv, tv;
        for (std::int64_t epoch = range.start; epoch < range.end; ++epoch) {
            auto ie = err.find(epoch);
            auto is = shp.find(epoch);
            auto it = tex.find(epoch);
            if (ie == err.end() || is == shp.end() || it == tex.end()) continue;
            e.push_back(ie->second);
            sv.push_back(is->second);
            tv.push_back(it->second);
        }
        PhaseCorrelation pc;
        pc.phase = static_cast<int>(p) + 1;
        pc.range = range;
        pc.n_points = static_cast<std::int64_t>(e.size());
        if (e.size() >= 3) {
            pc.reported = true;
            pc.r_shape = pearson(e, sv);
            pc.r_texture = pearson(e, tv);
            pc.s = sync_score(pc.r_shape, pc.r_texture);
            any = true;
        } else {
            pc.note = "fewer than 3 joined probe points in phase";
        }
        report.phases.push_back(std::move(pc));
    }
    if (!any) {
        throw InsufficientDataError("phase_correlations: no phase has 3 joined points");
    }
    return report;
}

}  // namespace ddb
