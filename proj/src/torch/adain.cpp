#include "ddb/torch/adain.hpp"

#include <algorithm>
#include <cstdlib>

#include "ddb/errors.hpp"
#include "ddb/torch/imaging.hpp"

namespace fs = std::filesystem;

namespace ddb::adain {

torch::Tensor adain_transform(const torch::Tensor& content_features,
                              const torch::Tensor& style_features, double eps) {
    if (content_features.dim() != 4 || style_features.dim() != 4 ||
        content_features.size(1) != style_features.size(1)) {
        throw ShapeError("adain_transform: expected NxCxHxW features with matching channels");
    }
    auto mu_c = content_features.mean({2, 3}, /*keepdim=*/true);
    auto mu_s = style_features.mean({2, 3}, /*keepdim=*/true);
    auto sigma_c = (content_features.var({2, 3}, /*unbiased=*/false, /*keepdim=*/true) + eps).sqrt();
    auto sigma_s = (style_features.var({2, 3}, /*unbiased=*/false, /*keepdim=*/true) + eps).sqrt();
    return sigma_s * (content_features - mu_c) / sigma_c + mu_s;
}

bool StylizationAssets::locate(const std::string& dir, StylizationAssets& out) {
    std::string base = dir;
    if (base.empty()) {
        if (const char* env = std::getenv("DDB_ADAIN_ASSETS")) base = env;
    }
    if (base.empty()) return false;
    const fs::path enc = fs::path(base) / "encoder.pt";
    const fs::path dec = fs::path(base) / "decoder.pt";
    if (!fs::exists(enc) || !fs::exists(dec)) return false;
    out.encoder_path = enc.string();
    out.decoder_path = dec.string();
    return true;
}

Stylizer::Stylizer(const StylizationAssets& assets) : alpha_(assets.alpha) {
    if (assets.alpha < 0.0 || assets.alpha > 1.0) {
        throw ValidationError("stylization alpha must be in [0, 1]");
    }
    if (assets.encoder_path.empty() || assets.decoder_path.empty()) {
        throw ConfigurationError("stylization assets not configured (encoder/decoder paths)");
    }
    try {
        encoder_ = torch::jit::load(assets.encoder_path);
        decoder_ = torch::jit::load(assets.decoder_path);
    } catch (const c10::Error&) {
        throw ConfigurationError("failed to load stylization assets from " + assets.encoder_path +
                                 " / " + assets.decoder_path);
    }
    encoder_.eval();
    decoder_.eval();
}

torch::Tensor Stylizer::encode(const torch::Tensor& image) {
    torch::NoGradGuard no_grad;
    auto batch = image.dim() == 3 ? image.unsqueeze(0) : image;
    return encoder_.forward({batch}).toTensor();
}

torch::Tensor Stylizer::stylize(const torch::Tensor& content, const torch::Tensor& style) {
    torch::NoGradGuard no_grad;
    auto c_f = encode(content);
    auto s_f = encode(style);
    if (c_f.size(2) != s_f.size(2) || c_f.size(3) != s_f.size(3)) {
        s_f = torch::adaptive_avg_pool2d(s_f, {c_f.size(2), c_f.size(3)});
    }
    auto t = adain_transform(c_f, s_f);
    t = alpha_ * t + (1.0 - alpha_) * c_f;
    auto out = decoder_.forward({t}).toTensor().squeeze(0);
    // Decoder padding can overshoot by a pixel or two; pin to content dims.
    const auto h = content.size(1), w = content.size(2);
    if (out.size(1) != h || out.size(2) != w) {
        out = torch::adaptive_avg_pool2d(out.unsqueeze(0), {h, w}).squeeze(0);
    }
    return out.clamp(0, 1);
}

namespace {

std::vector<std::string> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("image directory not found: " + dir.string());
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp") {
            names.push_back(entry.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace

PairSet build_pair_sets(const fs::path& content_dir, const fs::path& style_dir,
                        std::int64_t n_shape_pairs, std::int64_t n_texture_pairs,
                        std::uint64_t seed, const StylizationAssets& assets,
                        const fs::path& out_dir, bool exhaustive) {
    Stylizer stylizer(assets);
    const auto contents = list_images(content_dir);
    const auto styles = list_images(style_dir);
    PairSet plan = sample_pair_plan(contents, styles, n_shape_pairs, n_texture_pairs, seed,
                                    exhaustive);
    fs::create_directories(out_dir);

    auto materialize = [&](std::vector<ProbePair>& pairs, const char* kind) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            auto& p = pairs[k];
            const auto a = stylizer.stylize(img::load_image(content_dir / p.content_a),
                                            img::load_image(style_dir / p.style_a));
            const auto b = stylizer.stylize(img::load_image(content_dir / p.content_b),
                                            img::load_image(style_dir / p.style_b));
            p.path_a = std::string(kind) + "_" + std::to_string(k) + "_a.png";
            p.path_b = std::string(kind) + "_" + std::to_string(k) + "_b.png";
            img::save_image(a, out_dir / p.path_a);
            img::save_image(b, out_dir / p.path_b);
        }
    };
    materialize(plan.shape_pairs, "shape");
    materialize(plan.texture_pairs, "texture");
    save_pairset_manifest(plan, out_dir / "pairset.tsv");
    return plan;
}

}  // namespace ddb::adain
