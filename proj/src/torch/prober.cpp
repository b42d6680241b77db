#include "ddb/torch/prober.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ddb/errors.hpp"
#include "ddb/torch/dataset.hpp"

namespace fs = std::filesystem;

namespace ddb::probe {

namespace {

torch::Tensor load_image_tensor(const fs::path& file) {
    cv::Mat bgr = cv::imread(file.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot read probe image: " + file.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    if (rgb.cols != 32 || rgb.rows != 32) {
        cv::resize(rgb, rgb, cv::Size(32, 32), 0, 0, cv::INTER_AREA);
    }
    cv::Mat f32;
    rgb.convertTo(f32, CV_32FC3, 1.0 / 255.0);
    auto t = torch::from_blob(f32.data, {32, 32, 3}, torch::kFloat32).permute({2, 0, 1});
    return t.clone();
}

torch::Tensor stack_side(const std::vector<ProbePair>& pairs, bool side_b, const fs::path& base) {
    std::vector<torch::Tensor> images;
    images.reserve(pairs.size());
    for (const auto& p : pairs) {
        const std::string& rel = side_b ? p.path_b : p.path_a;
        if (rel.empty()) throw ValidationError("pairset manifest has no materialized image path");
        fs::path path(rel);
        if (path.is_relative()) path = base / path;
        images.push_back(load_image_tensor(path));
    }
    return torch::stack(images);
}

torch::Tensor gray_to_input(const std::vector<std::pair<GrayImage, GrayImage>>& pairs,
                            bool side_b) {
    std::vector<torch::Tensor> images;
    images.reserve(pairs.size());
    for (const auto& pr : pairs) {
        const GrayImage& im = side_b ? pr.second : pr.first;
        auto t = torch::from_blob(const_cast<float*>(im.pixels.data()), {1, im.height, im.width},
                                  torch::kFloat32)
                     .clone();
        t = torch::adaptive_avg_pool2d(t.unsqueeze(0), {32, 32}).squeeze(0);
        images.push_back(t.repeat({3, 1, 1}));
    }
    return torch::stack(images);
}

}  // namespace

ProbeBatch load_probe_batch(const fs::path& manifest_path, DatasetId normalize_as) {
    const PairSet set = load_pairset_manifest(manifest_path);
    if (set.shape_pairs.empty() || set.texture_pairs.empty()) {
        throw InsufficientDataError("probe pairset must contain both shape and texture pairs");
    }
    const fs::path base = manifest_path.parent_path();
    ProbeBatch batch;
    batch.shape_a = data::normalize(stack_side(set.shape_pairs, false, base), normalize_as);
    batch.shape_b = data::normalize(stack_side(set.shape_pairs, true, base), normalize_as);
    batch.texture_a = data::normalize(stack_side(set.texture_pairs, false, base), normalize_as);
    batch.texture_b = data::normalize(stack_side(set.texture_pairs, true, base), normalize_as);
    return batch;
}

ProbeBatch probe_batch_from_synthetic(const SyntheticPairSet& set, DatasetId normalize_as) {
    if (set.shape_images.empty() || set.texture_images.empty()) {
        throw InsufficientDataError("synthetic pairset must contain both shape and texture pairs");
    }
    ProbeBatch batch;
    batch.shape_a = data::normalize(gray_to_input(set.shape_images, false), normalize_as);
    batch.shape_b = data::normalize(gray_to_input(set.shape_images, true), normalize_as);
    batch.texture_a = data::normalize(gray_to_input(set.texture_images, false), normalize_as);
    batch.texture_b = data::normalize(gray_to_input(set.texture_images, true), normalize_as);
    return batch;
}

torch::Tensor raw_feature_map(nets::ConvNet& model, int layer_index, const torch::Tensor& images) {
    const int tap = nets::resolve_tap_index(model, layer_index);
    const bool was_training = model.is_training();
    model.eval();
    torch::NoGradGuard no_grad;
    std::vector<torch::Tensor> taps;
    model.forward_collect(images, &taps);
    if (was_training) model.train();
    return taps[tap - 1];
}

ActivationMatrix capture_activations(nets::ConvNet& model, int layer_index,
                                     const torch::Tensor& images) {
    auto fmap = raw_feature_map(model, layer_index, images);
    auto pooled = fmap.mean({2, 3}).to(torch::kFloat64).contiguous();  // N x C
    ActivationMatrix m;
    m.rows = pooled.size(0);
    m.cols = pooled.size(1);
    m.layer_index = nets::resolve_tap_index(model, layer_index);
    m.pooling = "gap";
    const double* data = pooled.data_ptr<double>();
    m.values.assign(data, data + m.rows * m.cols);
    return m;
}

BiasEstimate probe_bias(nets::ConvNet& model, const ProbeBatch& batch, int layer_index,
                        BaselineMode mode) {
    auto shape_a = capture_activations(model, layer_index, batch.shape_a);
    auto shape_b = capture_activations(model, layer_index, batch.shape_b);
    auto tex_a = capture_activations(model, layer_index, batch.texture_a);
    auto tex_b = capture_activations(model, layer_index, batch.texture_b);

    auto rho_shape = neuron_pair_correlation(shape_a, shape_b);
    rho_shape.factor = BiasFactor::shape;
    auto rho_texture = neuron_pair_correlation(tex_a, tex_b);
    rho_texture.factor = BiasFactor::texture;

    BiasEstimate est = bias_fractions(rho_shape, rho_texture, mode);
    est.layer_index = nets::resolve_tap_index(model, layer_index);
    return est;
}

std::vector<BiasEstimate> layer_sweep(nets::ConvNet& model, const ProbeBatch& batch,
                                      std::span<const int> layer_indices, BaselineMode mode) {
    for (int idx : layer_indices) nets::resolve_tap_index(model, idx);  // validate up front
    std::vector<BiasEstimate> out;
    out.reserve(layer_indices.size());
    for (int idx : layer_indices) out.push_back(probe_bias(model, batch, idx, mode));
    return out;
}

void save_checkpoint(nets::ConvNet& model, const fs::path& path) {
    torch::serialize::OutputArchive archive;
    model.save(archive);
    archive.save_to(path.string());
}

void load_checkpoint(nets::ConvNet& model, const fs::path& path) {
    if (!fs::exists(path)) throw IoError("checkpoint not found: " + path.string());
    torch::serialize::InputArchive archive;
    try {
        archive.load_from(path.string());
        model.load(archive);
    } catch (const c10::Error&) {
        throw IoError("unreadable checkpoint: " + path.string());
    }
}

}  // namespace ddb::probe
