#include <cmath>

#include "ddb/errors.hpp"
#include "ddb/torch/models.hpp"
#include "ddb/torch/prober.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest_torch.h"

using namespace ddb;

TEST_CASE("tap counts and final tap widths per architecture") {
    torch::manual_seed(0);
    CHECK(nets::make_model(ArchitectureId::resnet18, 10)->num_taps() == 17);
    CHECK(nets::make_model(ArchitectureId::tinycnn, 10)->num_taps() == 4);
    CHECK(nets::make_model(ArchitectureId::mobilenetv2, 10)->num_taps() == 19);
    CHECK(nets::make_model(ArchitectureId::densenet121, 10)->num_taps() == 8);
    CHECK(nets::make_model(ArchitectureId::efficientnetb0, 10)->num_taps() == 18);
}

TEST_CASE("resolve_tap_index maps -1 to the final conv and rejects junk") {
    torch::manual_seed(0);
    auto model = nets::make_model(ArchitectureId::resnet18, 10);
    CHECK(nets::resolve_tap_index(*model, -1) == 17);
    CHECK(nets::resolve_tap_index(*model, 1) == 1);
    CHECK(nets::resolve_tap_index(*model, 17) == 17);
    CHECK_THROWS_AS(nets::resolve_tap_index(*model, 0), LookupError);
    CHECK_THROWS_AS(nets::resolve_tap_index(*model, 18), LookupError);
    CHECK_THROWS_AS(nets::resolve_tap_index(*model, -2), LookupError);
}

TEST_CASE("final-tap activations: shape, pooling oracle, determinism") {
    torch::manual_seed(1);
    auto model = nets::make_model(ArchitectureId::resnet18, 10);
    const auto images = torch::rand({8, 3, 32, 32});

    const auto acts = probe::capture_activations(*model, -1, images);
    CHECK(acts.rows == 8);
    CHECK(acts.cols == 512);  // block-stage end width of the final conv tap
    CHECK(acts.pooling == "gap");

    // GAP oracle: mean of the raw feature map over the spatial dims.
    const auto raw = probe::raw_feature_map(*model, -1, images);
    const auto manual = raw.mean({2, 3}).to(torch::kFloat64);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 512; ++c) {
            CHECK(std::abs(acts.at(r, c) - manual.index({r, c}).item<double>()) < 1e-5);
        }
    }

    // Identical inputs give identical rows.
    const auto twice = torch::cat({images.slice(0, 0, 1), images.slice(0, 0, 1)});
    const auto acts2 = probe::capture_activations(*model, -1, twice);
    for (int c = 0; c < 512; ++c) CHECK(acts2.at(0, c) == acts2.at(1, c));
}

TEST_CASE("block-stage taps expose the expected channel widths") {
    torch::manual_seed(2);
    auto model = nets::make_model(ArchitectureId::resnet18, 10);
    const auto images = torch::rand({4, 3, 32, 32});
    const int taps[4] = {5, 9, 13, 17};
    const int widths[4] = {64, 128, 256, 512};
    for (int i = 0; i < 4; ++i) {
        const auto acts = probe::capture_activations(*model, taps[i], images);
        CHECK(acts.cols == widths[i]);
    }
}

TEST_CASE("probing leaves training mode untouched and grads absent") {
    torch::manual_seed(3);
    auto model = nets::make_model(ArchitectureId::tinycnn, 10);
    model->train();
    const auto images = torch::rand({4, 3, 32, 32});
    (void)probe::capture_activations(*model, -1, images);
    CHECK(model->is_training());
    model->eval();
    (void)probe::capture_activations(*model, -1, images);
    CHECK_FALSE(model->is_training());
}

TEST_CASE("layer_sweep validates every index before any forward pass") {
    torch::manual_seed(4);
    auto model = nets::make_model(ArchitectureId::tinycnn, 10);
    probe::ProbeBatch batch;
    batch.shape_a = torch::rand({6, 3, 32, 32});
    batch.shape_b = torch::rand({6, 3, 32, 32});
    batch.texture_a = torch::rand({6, 3, 32, 32});
    batch.texture_b = torch::rand({6, 3, 32, 32});
    const int bad[2] = {1, 99};
    CHECK_THROWS_AS(probe::layer_sweep(*model, batch, bad), LookupError);
    const int good[2] = {1, -1};
    const auto estimates = probe::layer_sweep(*model, batch, good);
    REQUIRE(estimates.size() == 2);
    for (const auto& est : estimates) {
        CHECK(est.shape_frac + est.texture_frac + est.residual_frac ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("checkpoint round-trip preserves forward outputs exactly") {
    torch::manual_seed(5);
    auto model = nets::make_model(ArchitectureId::tinycnn, 10);
    const auto images = torch::rand({4, 3, 32, 32});
    model->eval();
    const auto before = model->forward(images);

    const auto path = std::filesystem::temp_directory_path() / "ddb_ckpt_test.pt";
    probe::save_checkpoint(*model, path);
    torch::manual_seed(99);
    auto reloaded = nets::make_model(ArchitectureId::tinycnn, 10);
    probe::load_checkpoint(*reloaded, path);
    reloaded->eval();
    CHECK(torch::equal(reloaded->forward(images), before));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(probe::load_checkpoint(*model, "/nonexistent/ckpt.pt"), IoError);
}
