#pragma once

#include <filesystem>

#include <torch/torch.h>

#include "ddb/curve.hpp"
#include "ddb/run_store.hpp"

namespace ddb::report {

// Train/test error vs epoch with phase intervals shaded behind the curves.
void render_curve_plot(const TimeSeries& train_error, const TimeSeries& test_error,
                       const PhaseSegmentation& seg, const std::filesystem::path& out_png);

// Shape/texture bias fractions vs epoch. The plotted lines are 5-term
// moving averages; the raw samples are drawn as faint points.
void render_bias_plot(const TimeSeries& shape_bias, const TimeSeries& texture_bias,
                      const PhaseSegmentation& seg, const std::filesystem::path& out_png);

// Two scatter panels: test error vs shape bias and test error vs texture
// bias, points colored by the phase their epoch falls into.
void render_scatter_plot(const TimeSeries& test_error, const TimeSeries& shape_bias,
                         const TimeSeries& texture_bias, const PhaseSegmentation& seg,
                         const std::filesystem::path& out_png);

// Tiles first-layer filters (N x C x kh x kw) into a square-ish grid.
// Each filter is min-max normalized independently; constant filters
// render as mid-gray. 3-channel filters render in color, others as the
// channel mean in grayscale.
void render_filter_grid(const torch::Tensor& filters, const std::filesystem::path& out_png);

// Loads a checkpoint for the given architecture and renders its first
// convolution's filters.
void render_filter_grid_from_checkpoint(const std::filesystem::path& checkpoint,
                                        ArchitectureId arch, int num_classes,
                                        const std::filesystem::path& out_png);

}  // namespace ddb::report
