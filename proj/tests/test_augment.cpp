#include <random>

#include "ddb/errors.hpp"
#include "ddb/torch/augment.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest_torch.h"

using namespace ddb;

namespace {

torch::Tensor ramp_image() {
    return torch::arange(3 * 32 * 32, torch::kFloat32).reshape({3, 32, 32}) /
           static_cast<float>(3 * 32 * 32);
}

}  // namespace

TEST_CASE("center crop without flip is the identity") {
    const auto img = ramp_image();
    const auto out = aug::pad_crop_flip(img, {4, 4, false});
    CHECK(torch::equal(out, img));
}

TEST_CASE("flip at the center crop reverses columns") {
    const auto img = ramp_image();
    const auto out = aug::pad_crop_flip(img, {4, 4, true});
    CHECK(torch::equal(out, img.flip(2)));
}

TEST_CASE("offset crop pulls in zero padding") {
    const auto img = torch::ones({3, 32, 32});
    const auto out = aug::pad_crop_flip(img, {0, 0, false});
    // Cropping at (0,0) shows 4 padded rows/cols of zeros at the top/left.
    CHECK(out.index({0, 0, 0}).item<float>() == 0.0f);
    CHECK(out.index({0, 3, 3}).item<float>() == 0.0f);
    CHECK(out.index({0, 4, 4}).item<float>() == 1.0f);
    CHECK(out.sizes() == img.sizes());
}

TEST_CASE("invalid offsets and shapes are rejected") {
    const auto img = ramp_image();
    CHECK_THROWS_AS(aug::pad_crop_flip(img, {9, 0, false}), ShapeError);
    CHECK_THROWS_AS(aug::pad_crop_flip(img, {0, -1, false}), ShapeError);
    CHECK_THROWS_AS(aug::pad_crop_flip(torch::zeros({1, 32, 32}), {4, 4, false}), ShapeError);
    CHECK_THROWS_AS(aug::pad_crop_flip(torch::zeros({3, 16, 16}), {4, 4, false}), ShapeError);
}

TEST_CASE("sample_crop draws stay in range and flip both ways") {
    std::mt19937_64 rng(7);
    bool saw_flip = false, saw_noflip = false;
    for (int i = 0; i < 1000; ++i) {
        const auto p = aug::sample_crop(rng);
        CHECK(p.offset_y >= 0);
        CHECK(p.offset_y <= 8);
        CHECK(p.offset_x >= 0);
        CHECK(p.offset_x <= 8);
        (p.flip ? saw_flip : saw_noflip) = true;
    }
    CHECK(saw_flip);
    CHECK(saw_noflip);
}

TEST_CASE("augment_batch reproduces per-image draws from the same seed") {
    const auto batch = torch::rand({16, 3, 32, 32}, torch::Generator());
    std::mt19937_64 rng_a(42), rng_b(42), rng_sim(42);
    const auto out_a = aug::augment_batch(batch, rng_a);
    const auto out_b = aug::augment_batch(batch, rng_b);
    CHECK(torch::equal(out_a, out_b));

    // Re-simulate the augmentation image by image with the shared RNG
    // stream: the batch op must consume draws in index order.
    for (int i = 0; i < 16; ++i) {
        const auto p = aug::sample_crop(rng_sim);
        const auto expected = aug::pad_crop_flip(batch[i], p);
        CHECK(torch::equal(out_a[i], expected));
    }
}
