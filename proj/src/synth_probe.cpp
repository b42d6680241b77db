#include "ddb/synth_probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ddb/errors.hpp"

namespace ddb {

namespace {

constexpr float kForegroundThreshold = 0.125f;  // fills live in [0.25, 1], background is 0

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stateless per-pixel noise in [0, 1).
double pixel_noise(std::uint64_t seed, int x, int y) {
    const std::uint64_t h = splitmix64(seed ^ (static_cast<std::uint64_t>(x) * 0xC2B2AE3D27D4EB4Full) ^
                                       (static_cast<std::uint64_t>(y) + 0x165667B19E3779F9ull));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::pair<std::string, std::uint64_t> parse_id(const std::string& id) {
    const auto colon = id.find(':');
    if (colon == std::string::npos) throw ValidationError("bad probe id: " + id);
    return {id.substr(0, colon), std::stoull(id.substr(colon + 1))};
}

struct Point {
    double x, y;
};

bool point_in_polygon(const std::vector<Point>& poly, double px, double py) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > py) != (poly[j].y > py)) {
            const double xcross =
                poly[j].x + (py - poly[j].y) / (poly[i].y - poly[j].y) * (poly[i].x - poly[j].x);
            if (px < xcross) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

GrayImage render_mask(const std::string& mask_id, int size) {
    const auto [family, seed] = parse_id(mask_id);
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    GrayImage img;
    img.width = img.height = size;
    img.pixels.assign(static_cast<std::size_t>(size) * size, 0.0f);

    if (family == "ellipse") {
        const double cx = (0.3 + 0.4 * unit()) * size;
        const double cy = (0.3 + 0.4 * unit()) * size;
        const double rx = (0.15 + 0.2 * unit()) * size;
        const double ry = (0.15 + 0.2 * unit()) * size;
        const double angle = std::numbers::pi * unit();
        const double ca = std::cos(angle), sa = std::sin(angle);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                const double u = (dx * ca + dy * sa) / rx;
                const double v = (-dx * sa + dy * ca) / ry;
                if (u * u + v * v <= 1.0) img.at(y, x) = 1.0f;
            }
        }
    } else if (family == "polygon") {
        const int k = 3 + static_cast<int>(rng() % 5);
        const double cx = (0.35 + 0.3 * unit()) * size;
        const double cy = (0.35 + 0.3 * unit()) * size;
        std::vector<double> angles(k);
        for (auto& a : angles) a = 2.0 * std::numbers::pi * unit();
        std::sort(angles.begin(), angles.end());
        std::vector<Point> poly(k);
        for (int i = 0; i < k; ++i) {
            const double r = (0.15 + 0.25 * unit()) * size;
            poly[i] = {cx + r * std::cos(angles[i]), cy + r * std::sin(angles[i])};
        }
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                if (point_in_polygon(poly, x + 0.5, y + 0.5)) img.at(y, x) = 1.0f;
            }
        }
    } else {
        throw ValidationError("unknown mask family: " + family);
    }
    return img;
}

namespace {

// Fill value at (x, y) for a fill id, in [0.25, 1].
double fill_value(const std::string& family, std::uint64_t seed, int x, int y) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    if (family == "checker") {
        const int period = 3 + static_cast<int>(rng() % 6);
        const double a = 0.25 + 0.75 * unit();
        const double b = 0.25 + 0.75 * unit();
        const bool odd = ((x / period) + (y / period)) % 2 != 0;
        return odd ? a : b;
    }
    if (family == "stripes") {
        const int orient = static_cast<int>(rng() % 3);  // 0=h, 1=v, 2=diag
        const int period = 2 + static_cast<int>(rng() % 6);
        const double a = 0.25 + 0.75 * unit();
        const double b = 0.25 + 0.75 * unit();
        const int t = orient == 0 ? y : orient == 1 ? x : x + y;
        return (t / period) % 2 != 0 ? a : b;
    }
    if (family == "noise") {
        return 0.25 + 0.75 * pixel_noise(seed, x, y);
    }
    throw ValidationError("unknown fill family: " + family);
}

}  // namespace

GrayImage render_synthetic_image(const std::string& mask_id, const std::string& fill_id, int size) {
    GrayImage img = render_mask(mask_id, size);
    const auto [family, seed] = parse_id(fill_id);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            if (img.at(y, x) > 0.0f) {
                img.at(y, x) = static_cast<float>(fill_value(family, seed, x, y));
            }
        }
    }
    return img;
}

SyntheticPairSet generate_synthetic_probe(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.image_size < 8) throw ValidationError("synth spec: image_size must be >= 8");
    if (spec.mask_families.empty() || spec.fill_families.empty()) {
        throw ValidationError("synth spec: mask/fill families must be non-empty");
    }
    const bool need_shape = spec.n_shape_pairs > 0;
    const bool need_texture = spec.n_texture_pairs > 0;
    if (need_shape && (spec.n_masks < 1 || spec.n_fills < 2)) {
        throw CapacityError("shape pairs need >= 1 mask and >= 2 fills");
    }
    if (need_texture && (spec.n_masks < 2 || spec.n_fills < 1)) {
        throw CapacityError("texture pairs need >= 2 masks and >= 1 fill");
    }

    std::mt19937_64 rng(splitmix64(seed));
    std::vector<std::string> mask_ids, fill_ids;
    for (int i = 0; i < spec.n_masks; ++i) {
        mask_ids.push_back(spec.mask_families[i % spec.mask_families.size()] + ":" +
                           std::to_string(rng()));
    }
    for (int i = 0; i < spec.n_fills; ++i) {
        fill_ids.push_back(spec.fill_families[i % spec.fill_families.size()] + ":" +
                           std::to_string(rng()));
    }

    SyntheticPairSet out;
    out.spec = spec;
    out.meta = sample_pair_plan(mask_ids, fill_ids, spec.n_shape_pairs, spec.n_texture_pairs,
                                splitmix64(seed + 1));
    for (const auto& p : out.meta.shape_pairs) {
        out.shape_images.emplace_back(render_synthetic_image(p.content_a, p.style_a, spec.image_size),
                                      render_synthetic_image(p.content_b, p.style_b, spec.image_size));
    }
    for (const auto& p : out.meta.texture_pairs) {
        out.texture_images.emplace_back(
            render_synthetic_image(p.content_a, p.style_a, spec.image_size),
            render_synthetic_image(p.content_b, p.style_b, spec.image_size));
    }
    return out;
}

std::vector<double> mask_downsample_features(const GrayImage& image, int grid) {
    std::vector<double> features(static_cast<std::size_t>(grid) * grid, 0.0);
    std::vector<std::int64_t> counts(features.size(), 0);
    for (int y = 0; y < image.height; ++y) {
        const int gy = std::min(grid - 1, y * grid / image.height);
        for (int x = 0; x < image.width; ++x) {
            const int gx = std::min(grid - 1, x * grid / image.width);
            const std::size_t cell = static_cast<std::size_t>(gy) * grid + gx;
            features[cell] += image.at(y, x) > kForegroundThreshold ? 1.0 : 0.0;
            counts[cell] += 1;
        }
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (counts[i] > 0) features[i] /= static_cast<double>(counts[i]);
    }
    return features;
}

std::vector<double> fill_histogram_features(const GrayImage& image, int bins) {
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    std::int64_t n = 0;
    for (float p : image.pixels) {
        if (p > kForegroundThreshold) {
            const int bin = std::min(bins - 1, static_cast<int>(p * bins));
            hist[bin] += 1.0;
            ++n;
        }
    }
    if (n > 0) {
        for (auto& h : hist) h /= static_cast<double>(n);
    }
    return hist;
}

}  // namespace ddb
