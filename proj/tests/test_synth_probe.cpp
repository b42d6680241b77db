#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "ddb/bias.hpp"
#include "ddb/curve.hpp"
#include "ddb/errors.hpp"
#include "ddb/pairset.hpp"
#include "ddb/synth_probe.hpp"

using namespace ddb;
namespace fs = std::filesystem;

namespace {

// Per-feature correlation between the two sides of a pair list.
std::vector<double> side_correlations(const std::vector<std::pair<GrayImage, GrayImage>>& pairs,
                                      std::vector<double> (*extract)(const GrayImage&, int),
                                      int arg) {
    auto a = extract_features(pairs, false, [&](const GrayImage& im) { return extract(im, arg); });
    auto b = extract_features(pairs, true, [&](const GrayImage& im) { return extract(im, arg); });
    return neuron_pair_correlation(a, b).rho;
}

double median_nonzero(std::vector<double> v) {
    std::erase_if(v, [](double x) { return x == 0.0; });
    REQUIRE(!v.empty());
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("sample_pair_plan: empty request gives empty set") {
    const auto set = sample_pair_plan({"c0", "c1"}, {"s0", "s1"}, 0, 0, 1);
    CHECK(set.shape_pairs.empty());
    CHECK(set.texture_pairs.empty());
}

TEST_CASE("sample_pair_plan: exhaustive 2x2 gives one pair per content / per style") {
    const auto set = sample_pair_plan({"c0", "c1"}, {"s0", "s1"}, 0, 0, 5, true);
    REQUIRE(set.shape_pairs.size() == 2);
    REQUIRE(set.texture_pairs.size() == 2);
    set.validate();
    CHECK(set.shape_pairs[0].content_a == "c0");
    CHECK(set.shape_pairs[1].content_a == "c1");
    CHECK(set.texture_pairs[0].style_a == "s0");
    CHECK(set.texture_pairs[1].style_a == "s1");
}

TEST_CASE("sample_pair_plan: deterministic under seed, capacity enforced") {
    const std::vector<std::string> contents = {"a", "b", "c"};
    const std::vector<std::string> styles = {"x", "y", "z"};
    const auto s1 = sample_pair_plan(contents, styles, 10, 10, 42);
    const auto s2 = sample_pair_plan(contents, styles, 10, 10, 42);
    for (std::size_t i = 0; i < s1.shape_pairs.size(); ++i) {
        CHECK(s1.shape_pairs[i].content_a == s2.shape_pairs[i].content_a);
        CHECK(s1.shape_pairs[i].style_a == s2.shape_pairs[i].style_a);
        CHECK(s1.shape_pairs[i].style_b == s2.shape_pairs[i].style_b);
    }
    CHECK_THROWS_AS(sample_pair_plan({"a"}, {"x"}, 1, 0, 0), CapacityError);
    CHECK_THROWS_AS(sample_pair_plan({"a"}, {"x", "y"}, 0, 1, 0), CapacityError);
}

TEST_CASE("pairset manifest round-trips") {
    auto set = sample_pair_plan({"c0", "c1", "c2"}, {"s0", "s1"}, 4, 4, 9);
    set.shape_pairs[0].path_a = "img/a.png";
    set.shape_pairs[0].path_b = "img/b.png";
    const auto file = fs::temp_directory_path() / "ddb-pairset-test.tsv";
    save_pairset_manifest(set, file);
    const auto loaded = load_pairset_manifest(file);
    REQUIRE(loaded.shape_pairs.size() == set.shape_pairs.size());
    REQUIRE(loaded.texture_pairs.size() == set.texture_pairs.size());
    CHECK(loaded.seed == set.seed);
    CHECK(loaded.shape_pairs[0].path_a == "img/a.png");
    CHECK(loaded.shape_pairs[2].style_b == set.shape_pairs[2].style_b);
    fs::remove(file);
}

TEST_CASE("shape pairs share a pixel-identical mask support") {
    SynthSpec spec;
    spec.n_masks = 1;
    spec.n_fills = 2;
    spec.n_shape_pairs = 1;
    spec.n_texture_pairs = 0;
    const auto set = generate_synthetic_probe(spec, 3);
    REQUIRE(set.shape_images.size() == 1);
    const auto& [a, b] = set.shape_images[0];
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        CHECK((a.pixels[i] > 0) == (b.pixels[i] > 0));
    }
}

TEST_CASE("texture pairs sample the same fill pattern") {
    SynthSpec spec;
    spec.n_masks = 2;
    spec.n_fills = 1;
    spec.n_shape_pairs = 0;
    spec.n_texture_pairs = 1;
    const auto set = generate_synthetic_probe(spec, 4);
    REQUIRE(set.texture_images.size() == 1);
    const auto& pair = set.meta.texture_pairs[0];
    CHECK(pair.style_a == pair.style_b);
    // wherever both masks are foreground, the fill values agree exactly
    const auto& [a, b] = set.texture_images[0];
    int overlap = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        if (a.pixels[i] > 0 && b.pixels[i] > 0) {
            CHECK(a.pixels[i] == b.pixels[i]);
            ++overlap;
        }
    }
    CHECK(overlap > 0);
}

TEST_CASE("provenance reconstructs every synthetic image exactly") {
    SynthSpec spec;
    spec.n_shape_pairs = 4;
    spec.n_texture_pairs = 4;
    const auto set = generate_synthetic_probe(spec, 11);
    for (std::size_t k = 0; k < set.meta.shape_pairs.size(); ++k) {
        const auto& p = set.meta.shape_pairs[k];
        const auto re_a = render_synthetic_image(p.content_a, p.style_a, spec.image_size);
        const auto re_b = render_synthetic_image(p.content_b, p.style_b, spec.image_size);
        CHECK(re_a.pixels == set.shape_images[k].first.pixels);
        CHECK(re_b.pixels == set.shape_images[k].second.pixels);
    }
}

TEST_CASE("generator is deterministic under (spec, seed)") {
    SynthSpec spec;
    const auto a = generate_synthetic_probe(spec, 21);
    const auto b = generate_synthetic_probe(spec, 21);
    REQUIRE(a.meta.shape_pairs.size() == b.meta.shape_pairs.size());
    for (std::size_t i = 0; i < a.meta.shape_pairs.size(); ++i) {
        CHECK(a.meta.shape_pairs[i].content_a == b.meta.shape_pairs[i].content_a);
        CHECK(a.meta.shape_pairs[i].style_a == b.meta.shape_pairs[i].style_a);
    }
    const auto c = generate_synthetic_probe(spec, 22);
    CHECK(a.meta.shape_pairs[0].content_a != c.meta.shape_pairs[0].content_a);
}

TEST_CASE("capacity errors for impoverished corpora") {
    SynthSpec spec;
    spec.n_masks = 1;
    spec.n_fills = 1;
    spec.n_shape_pairs = 1;
    spec.n_texture_pairs = 0;
    CHECK_THROWS_AS(generate_synthetic_probe(spec, 0), CapacityError);
    spec.n_fills = 2;
    spec.n_shape_pairs = 0;
    spec.n_texture_pairs = 1;
    CHECK_THROWS_AS(generate_synthetic_probe(spec, 0), CapacityError);
}

TEST_CASE("pair-type exclusivity holds on a large sampled set") {
    SynthSpec spec;
    spec.n_masks = 12;
    spec.n_fills = 12;
    spec.n_shape_pairs = 40;
    spec.n_texture_pairs = 40;
    const auto set = generate_synthetic_probe(spec, 13);
    set.meta.validate();
    for (const auto& s : set.meta.shape_pairs) {
        for (const auto& t : set.meta.texture_pairs) {
            const bool same = s.content_a == t.content_a && s.style_a == t.style_a &&
                              s.content_b == t.content_b && s.style_b == t.style_b;
            CHECK_FALSE(same);
        }
    }
}

TEST_CASE("mask-downsampling extractor separates shape from texture pairs") {
    SynthSpec spec;
    spec.n_masks = 32;
    spec.n_fills = 32;
    spec.n_shape_pairs = 50;
    spec.n_texture_pairs = 50;
    const auto set = generate_synthetic_probe(spec, 8);

    const auto rho_shape = side_correlations(set.shape_images, mask_downsample_features, 8);
    const auto rho_texture = side_correlations(set.texture_images, mask_downsample_features, 8);
    CHECK(median_nonzero(rho_shape) >= 0.9);
    CHECK(median_nonzero(rho_texture) <= 0.3);
}

TEST_CASE("stand-in extractors drive bias_fractions in opposite directions") {
    SynthSpec spec;
    spec.n_masks = 32;
    spec.n_fills = 32;
    spec.n_shape_pairs = 50;
    spec.n_texture_pairs = 50;
    const auto set = generate_synthetic_probe(spec, 15);

    {
        const auto rs = side_correlations(set.shape_images, mask_downsample_features, 8);
        const auto rt = side_correlations(set.texture_images, mask_downsample_features, 8);
        CorrelationVector cs{rs, BiasFactor::shape, 50}, ct{rt, BiasFactor::texture, 50};
        const auto est = bias_fractions(cs, ct);
        CHECK(est.shape_frac - est.texture_frac >= 0.05);
    }
    {
        const auto rs = side_correlations(set.shape_images, fill_histogram_features, 16);
        const auto rt = side_correlations(set.texture_images, fill_histogram_features, 16);
        CorrelationVector cs{rs, BiasFactor::shape, 50}, ct{rt, BiasFactor::texture, 50};
        const auto est = bias_fractions(cs, ct);
        CHECK(est.texture_frac - est.shape_frac >= 0.05);
    }
}
