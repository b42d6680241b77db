#include "ddb/report/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ddb/errors.hpp"
#include "ddb/torch/models.hpp"
#include "ddb/torch/prober.hpp"

namespace fs = std::filesystem;

namespace ddb::report {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 600;
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 30;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

const cv::Scalar kPhaseShade[3] = {
    cv::Scalar(235, 245, 235),  // phase 1: pale green (BGR)
    cv::Scalar(235, 235, 250),  // phase 2: pale red
    cv::Scalar(250, 240, 230),  // phase 3: pale blue
};

struct Frame {
    double ex0 = 0.0, ex1 = 1.0;  // epoch span
    double v0 = 0.0, v1 = 1.0;    // value span
    int px0 = kMarginLeft, px1 = kWidth - kMarginRight;
    int py0 = kMarginTop, py1 = kHeight - kMarginBottom;

    cv::Point map(double epoch, double value) const {
        const double fx = (epoch - ex0) / (ex1 - ex0);
        const double fy = (value - v0) / (v1 - v0);
        return {px0 + static_cast<int>(std::lround(fx * (px1 - px0))),
                py1 - static_cast<int>(std::lround(fy * (py1 - py0)))};
    }
};

void span_of(const TimeSeries& s, double& lo, double& hi) {
    for (double v : s.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
}

Frame make_frame(std::initializer_list<const TimeSeries*> series) {
    Frame f;
    double e0 = 1e300, e1 = -1e300, v0 = 1e300, v1 = -1e300;
    for (const TimeSeries* s : series) {
        if (s->size() == 0) continue;
        e0 = std::min(e0, static_cast<double>(s->epochs.front()));
        e1 = std::max(e1, static_cast<double>(s->epochs.back()));
        span_of(*s, v0, v1);
    }
    if (e1 <= e0) e1 = e0 + 1.0;
    const double pad = (v1 > v0) ? 0.05 * (v1 - v0) : 0.5;
    f.ex0 = e0;
    f.ex1 = e1;
    f.v0 = v0 - pad;
    f.v1 = v1 + pad;
    return f;
}

void shade_phases(cv::Mat& canvas, const Frame& f, const PhaseSegmentation& seg) {
    for (std::size_t i = 0; i < seg.phase_ranges.size() && i < 3; ++i) {
        const auto& r = seg.phase_ranges[i];
        const double lo = std::max(static_cast<double>(r.start), f.ex0);
        const double hi = std::min(static_cast<double>(r.end), f.ex1);
        if (hi <= lo) continue;
        cv::rectangle(canvas, f.map(lo, f.v1), f.map(hi, f.v0), kPhaseShade[i], cv::FILLED);
    }
}

void draw_axes(cv::Mat& canvas, const Frame& f, const std::string& title,
               const std::string& xlabel, const std::string& ylabel) {
    const cv::Scalar black(20, 20, 20);
    cv::rectangle(canvas, {f.px0, f.py0}, {f.px1, f.py1}, black, 1, cv::LINE_AA);
    char buf[64];
    for (int t = 0; t <= 5; ++t) {
        const double e = f.ex0 + (f.ex1 - f.ex0) * t / 5.0;
        const double v = f.v0 + (f.v1 - f.v0) * t / 5.0;
        const cv::Point pe = f.map(e, f.v0);
        const cv::Point pv = f.map(f.ex0, v);
        cv::line(canvas, pe, {pe.x, pe.y + 5}, black, 1, cv::LINE_AA);
        cv::line(canvas, {pv.x - 5, pv.y}, pv, black, 1, cv::LINE_AA);
        std::snprintf(buf, sizeof(buf), "%.0f", e);
        cv::putText(canvas, buf, {pe.x - 10, pe.y + 22}, cv::FONT_HERSHEY_SIMPLEX, 0.45, black, 1,
                    cv::LINE_AA);
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        cv::putText(canvas, buf, {8, pv.y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.45, black, 1,
                    cv::LINE_AA);
    }
    cv::putText(canvas, title, {f.px0, 30}, cv::FONT_HERSHEY_SIMPLEX, 0.65, black, 1, cv::LINE_AA);
    cv::putText(canvas, xlabel, {(f.px0 + f.px1) / 2 - 25, kHeight - 18}, cv::FONT_HERSHEY_SIMPLEX,
                0.5, black, 1, cv::LINE_AA);
    cv::putText(canvas, ylabel, {8, f.py0 - 10}, cv::FONT_HERSHEY_SIMPLEX, 0.5, black, 1,
                cv::LINE_AA);
}

void draw_series(cv::Mat& canvas, const Frame& f, const TimeSeries& s, const cv::Scalar& color,
                 int thickness = 2) {
    for (std::size_t i = 1; i < s.size(); ++i) {
        cv::line(canvas, f.map(static_cast<double>(s.epochs[i - 1]), s.values[i - 1]),
                 f.map(static_cast<double>(s.epochs[i]), s.values[i]), color, thickness,
                 cv::LINE_AA);
    }
    if (s.size() == 1) {
        cv::circle(canvas, f.map(static_cast<double>(s.epochs[0]), s.values[0]), 3, color,
                   cv::FILLED, cv::LINE_AA);
    }
}

void draw_points(cv::Mat& canvas, const Frame& f, const TimeSeries& s, const cv::Scalar& color,
                 int radius = 2) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        cv::circle(canvas, f.map(static_cast<double>(s.epochs[i]), s.values[i]), radius, color,
                   cv::FILLED, cv::LINE_AA);
    }
}

void legend_entry(cv::Mat& canvas, int slot, const cv::Scalar& color, const std::string& label) {
    const int x = kWidth - kMarginRight - 180;
    const int y = kMarginTop + 18 + 20 * slot;
    cv::line(canvas, {x, y - 4}, {x + 24, y - 4}, color, 3, cv::LINE_AA);
    cv::putText(canvas, label, {x + 32, y}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                cv::Scalar(20, 20, 20), 1, cv::LINE_AA);
}

void write_png(const cv::Mat& canvas, const fs::path& out_png) {
    if (!cv::imwrite(out_png.string(), canvas)) {
        throw IoError("cannot write plot: " + out_png.string());
    }
}

int phase_of(std::int64_t epoch, const PhaseSegmentation& seg) {
    for (std::size_t i = 0; i < seg.phase_ranges.size(); ++i) {
        if (seg.phase_ranges[i].contains(epoch)) return static_cast<int>(i);
    }
    return static_cast<int>(seg.phase_ranges.size()) - 1;
}

}  // namespace

void render_curve_plot(const TimeSeries& train_error, const TimeSeries& test_error,
                       const PhaseSegmentation& seg, const fs::path& out_png) {
    train_error.validate();
    test_error.validate();
    cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    Frame f = make_frame({&train_error, &test_error});
    shade_phases(canvas, f, seg);
    draw_axes(canvas, f, "Train / test error by epoch", "epoch", "error (%)");
    const cv::Scalar train_color(180, 120, 30), test_color(60, 60, 200);
    draw_series(canvas, f, train_error, train_color);
    draw_series(canvas, f, test_error, test_color);
    legend_entry(canvas, 0, train_color, "train error");
    legend_entry(canvas, 1, test_color, "test error");
    write_png(canvas, out_png);
}

void render_bias_plot(const TimeSeries& shape_bias, const TimeSeries& texture_bias,
                      const PhaseSegmentation& seg, const fs::path& out_png) {
    shape_bias.validate();
    texture_bias.validate();
    cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    Frame f = make_frame({&shape_bias, &texture_bias});
    shade_phases(canvas, f, seg);
    draw_axes(canvas, f, "Shape / texture bias by epoch (5-term smoothed)", "epoch", "fraction");
    const cv::Scalar shape_color(90, 160, 40), texture_color(40, 120, 230);
    // Raw samples as faint points, smoothed trend as the solid line.
    draw_points(canvas, f, shape_bias, cv::Scalar(200, 225, 190));
    draw_points(canvas, f, texture_bias, cv::Scalar(190, 215, 245));
    draw_series(canvas, f, moving_average(shape_bias, 5), shape_color);
    draw_series(canvas, f, moving_average(texture_bias, 5), texture_color);
    legend_entry(canvas, 0, shape_color, "shape bias");
    legend_entry(canvas, 1, texture_color, "texture bias");
    write_png(canvas, out_png);
}

void render_scatter_plot(const TimeSeries& test_error, const TimeSeries& shape_bias,
                         const TimeSeries& texture_bias, const PhaseSegmentation& seg,
                         const fs::path& out_png) {
    test_error.validate();
    shape_bias.validate();
    texture_bias.validate();
    const cv::Scalar phase_color[3] = {cv::Scalar(90, 170, 60), cv::Scalar(60, 60, 210),
                                       cv::Scalar(200, 130, 40)};
    cv::Mat canvas(kHeight, 2 * kWidth, CV_8UC3, cv::Scalar(255, 255, 255));

    auto panel = [&](const TimeSeries& bias, int panel_index, const std::string& title) {
        cv::Mat view = canvas(cv::Rect(panel_index * kWidth, 0, kWidth, kHeight));
        // Inner join on epochs; x = test error, y = bias fraction.
        std::vector<std::int64_t> epochs;
        std::vector<double> xs, ys;
        std::size_t j = 0;
        for (std::size_t i = 0; i < test_error.size(); ++i) {
            while (j < bias.size() && bias.epochs[j] < test_error.epochs[i]) ++j;
            if (j < bias.size() && bias.epochs[j] == test_error.epochs[i]) {
                epochs.push_back(test_error.epochs[i]);
                xs.push_back(test_error.values[i]);
                ys.push_back(bias.values[j]);
            }
        }
        Frame f;
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (double v : xs) { x0 = std::min(x0, v); x1 = std::max(x1, v); }
        for (double v : ys) { y0 = std::min(y0, v); y1 = std::max(y1, v); }
        if (xs.empty()) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
        const double padx = (x1 > x0) ? 0.05 * (x1 - x0) : 0.5;
        const double pady = (y1 > y0) ? 0.05 * (y1 - y0) : 0.5;
        f.ex0 = x0 - padx; f.ex1 = x1 + padx;
        f.v0 = y0 - pady; f.v1 = y1 + pady;
        draw_axes(view, f, title, "test error (%)", "fraction");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cv::circle(view, f.map(xs[i], ys[i]), 4, phase_color[phase_of(epochs[i], seg) % 3],
                       cv::FILLED, cv::LINE_AA);
        }
        for (std::size_t p = 0; p < seg.phase_ranges.size() && p < 3; ++p) {
            cv::circle(view, {kWidth - kMarginRight - 176, kMarginTop + 14 + 20 * static_cast<int>(p)},
                       4, phase_color[p], cv::FILLED, cv::LINE_AA);
            cv::putText(view, "phase " + std::to_string(p + 1),
                        {kWidth - kMarginRight - 164, kMarginTop + 18 + 20 * static_cast<int>(p)},
                        cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(20, 20, 20), 1, cv::LINE_AA);
        }
    };
    panel(shape_bias, 0, "Test error vs shape bias");
    panel(texture_bias, 1, "Test error vs texture bias");
    write_png(canvas, out_png);
}

void render_filter_grid(const torch::Tensor& filters, const fs::path& out_png) {
    if (filters.dim() != 4) throw ShapeError("render_filter_grid: expected N x C x kh x kw");
    const auto f = filters.detach().to(torch::kFloat64).contiguous();
    const std::int64_t n = f.size(0), c = f.size(1), kh = f.size(2), kw = f.size(3);
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = static_cast<int>((n + cols - 1) / cols);
    const int tile = 32, gap = 2;
    cv::Mat canvas(rows * (tile + gap) + gap, cols * (tile + gap) + gap, CV_8UC3,
                   cv::Scalar(255, 255, 255));
    for (std::int64_t i = 0; i < n; ++i) {
        auto w = f[i];  // C x kh x kw
        const double lo = w.min().item<double>();
        const double hi = w.max().item<double>();
        torch::Tensor norm = (hi > lo) ? (w - lo) / (hi - lo) : torch::full_like(w, 0.5);
        cv::Mat tile_img(static_cast<int>(kh), static_cast<int>(kw), CV_8UC3);
        for (int y = 0; y < kh; ++y) {
            for (int x = 0; x < kw; ++x) {
                cv::Vec3b px;
                if (c == 3) {
                    // RGB weights -> BGR pixel.
                    px[2] = static_cast<std::uint8_t>(norm[0][y][x].item<double>() * 255.0 + 0.5);
                    px[1] = static_cast<std::uint8_t>(norm[1][y][x].item<double>() * 255.0 + 0.5);
                    px[0] = static_cast<std::uint8_t>(norm[2][y][x].item<double>() * 255.0 + 0.5);
                } else {
                    const auto g = static_cast<std::uint8_t>(
                        norm.index({torch::indexing::Slice(), y, x}).mean().item<double>() * 255.0 +
                        0.5);
                    px = {g, g, g};
                }
                tile_img.at<cv::Vec3b>(y, x) = px;
            }
        }
        cv::Mat scaled;
        cv::resize(tile_img, scaled, {tile, tile}, 0, 0, cv::INTER_NEAREST);
        const int r = static_cast<int>(i) / cols, col = static_cast<int>(i) % cols;
        scaled.copyTo(canvas(cv::Rect(gap + col * (tile + gap), gap + r * (tile + gap), tile, tile)));
    }
    write_png(canvas, out_png);
}

void render_filter_grid_from_checkpoint(const fs::path& checkpoint, ArchitectureId arch,
                                        int num_classes, const fs::path& out_png) {
    auto model = nets::make_model(arch, num_classes);
    probe::load_checkpoint(*model, checkpoint);
    render_filter_grid(model->first_conv()->weight, out_png);
}

}  // namespace ddb::report
