#include <doctest.h>

#include <random>

#include "uatta/augment.hpp"
#include "uatta/core.hpp"

using namespace uatta;

namespace {

RasterImage noise_image(int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0F, 1.0F);
    RasterImage img(w, h);
    for (auto& v : img.pixels) v = u(rng);
    return img;
}

}  // namespace

TEST_CASE("identity plan is pixel-exact")
{
    const auto img = noise_image(13, 9, 1);
    CHECK(apply_plan(img, identity_plan(5, "a", 13, 9)) == img);
    const auto p0 = sample_plan(5, "a", 0, 13, 9);
    CHECK(p0 == identity_plan(5, "a", 13, 9));
    CHECK(apply_plan(img, p0) == img);
}

TEST_CASE("flips are commuting involutions")
{
    const auto img = noise_image(7, 5, 2);
    CHECK(flip_horizontal(flip_horizontal(img)) == img);
    CHECK(flip_vertical(flip_vertical(img)) == img);
    CHECK(flip_horizontal(flip_vertical(img)) == flip_vertical(flip_horizontal(img)));
    CHECK(flip_horizontal(img).at(0, 0, 1) == img.at(6, 0, 1));
    CHECK(flip_vertical(img).at(2, 0, 2) == img.at(2, 4, 2));

    auto plan = identity_plan(0, "a", 7, 5);
    plan.hflip = true;
    CHECK(apply_plan(apply_plan(img, plan), plan) == img);
}

TEST_CASE("colour operators")
{
    const RasterImage grey(4, 4, 0.5F);
    for (float v : adjust_brightness(grey, 0.1).pixels) CHECK(v == doctest::Approx(0.6).epsilon(1e-7));
    for (float v : adjust_contrast(grey, 1.4).pixels) CHECK(v == 0.5F);
    for (float v : adjust_brightness(grey, 0.7).pixels) CHECK(v == 1.0F);

    RasterImage px(1, 1);
    px.at(0, 0, 0) = 0.8F;
    px.at(0, 0, 1) = 0.4F;
    px.at(0, 0, 2) = 0.2F;
    CHECK(adjust_contrast(px, 1.5).at(0, 0, 0) == doctest::Approx(0.95));
    // grey has no saturation to scale or hue to rotate
    CHECK(adjust_saturation_hue(grey, 2.0, 0.1) == grey);
    // a full hue turn is the identity up to rounding
    const auto turned = adjust_saturation_hue(px, 1.0, 1.0);
    for (int c = 0; c < 3; ++c) CHECK(turned.at(0, 0, c) == doctest::Approx(px.at(0, 0, c)).epsilon(1e-6));
    // saturation 0 leaves lightness only
    const auto flat = adjust_saturation_hue(px, 0.0, 0.0);
    CHECK(flat.at(0, 0, 0) == doctest::Approx(0.5));
    CHECK(flat.at(0, 0, 2) == doctest::Approx(0.5));
}

TEST_CASE("hsl round trip")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = u(rng), g = u(rng), b = u(rng);
        double h, s, l, r2, g2, b2;
        rgb_to_hsl(r, g, b, h, s, l);
        hsl_to_rgb(h, s, l, r2, g2, b2);
        CHECK(std::abs(r - r2) < 1e-12);
        CHECK(std::abs(g - g2) < 1e-12);
        CHECK(std::abs(b - b2) < 1e-12);
    }
}

TEST_CASE("resize")
{
    RasterImage cb(2, 2);
    const float vals[4] = {0.0F, 1.0F, 1.0F, 0.0F};
    for (int i = 0; i < 4; ++i) {
        for (int c = 0; c < 3; ++c) cb.at(i % 2, i / 2, c) = vals[i] * (c + 1) / 3.0F;
    }
    const auto one = resize_bilinear(cb, 1, 1);
    for (int c = 0; c < 3; ++c) CHECK(one.at(0, 0, c) == doctest::Approx(0.5 * (c + 1) / 3.0));

    const RasterImage flat(6, 4, 0.3F);
    CHECK(resize_bilinear(flat, 6, 4) == flat);
    for (float v : resize_bilinear(flat, 11, 3).pixels) CHECK(v == doctest::Approx(0.3));
    for (float v : resize_normalize(flat, 6).pixels) CHECK(v == 0.5F);

    const auto img = noise_image(9, 7, 4);
    const auto n = resize_normalize(img, 5);
    CHECK(n.width == 5);
    CHECK(n.height == 5);
    for (float v : n.pixels) {
        CHECK(v >= 0.0F);
        CHECK(v <= 1.0F);
    }
    CHECK_THROWS_AS(resize_normalize(img, 0), Error);
}

TEST_CASE("crop")
{
    const auto img = noise_image(8, 6, 5);
    const auto c = crop(img, {2, 1, 3, 4});
    CHECK(c.width == 3);
    CHECK(c.height == 4);
    CHECK(c.at(0, 0, 0) == img.at(2, 1, 0));
    CHECK(c.at(2, 3, 2) == img.at(4, 4, 2));
    CHECK_THROWS_AS(crop(img, {6, 0, 3, 2}), Error);
    CHECK_THROWS_AS(crop(img, {0, 0, 0, 2}), Error);
}

TEST_CASE("black background removal")
{
    const RasterImage black(10, 10, 0.0F);
    CHECK(remove_black_background(black) == black);
    const RasterImage lit(5, 4, 0.5F);
    CHECK(remove_black_background(lit) == lit);

    RasterImage disk(31, 23, 0.0F);
    const double cx = 17.0, cy = 10.0, r = 6.5;
    for (int y = 0; y < disk.height; ++y) {
        for (int x = 0; x < disk.width; ++x) {
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) disk.at(x, y, 1) = 0.6F;
        }
    }
    // Oracle: scan every pixel for the extent of the lit region.
    int x0 = 99, x1 = -1, y0 = 99, y1 = -1;
    for (int y = 0; y < disk.height; ++y) {
        for (int x = 0; x < disk.width; ++x) {
            if (disk.at(x, y, 1) > 0.0F) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
    }
    const auto out = remove_black_background(disk);
    CHECK(out == crop(disk, {x0, y0, x1 - x0 + 1, y1 - y0 + 1}));
    CHECK(out.width == 13);
    CHECK_THROWS_AS(remove_black_background(disk, 1.0), Error);
}

TEST_CASE("sampled plans stay inside the jitter ranges")
{
    double bsum = 0.0;
    const int draws = 10000;
    for (int i = 1; i <= draws; ++i) {
        const auto p = sample_plan(77, "img", i, 40, 30);
        REQUIRE(p.brightness > -0.15);
        REQUIRE(p.brightness < 0.15);
        REQUIRE(p.saturation > 0.5);
        REQUIRE(p.saturation < 2.5);
        REQUIRE(p.hue > -0.15);
        REQUIRE(p.hue < 0.15);
        REQUIRE(p.contrast > 0.5);
        REQUIRE(p.contrast < 1.5);
        REQUIRE(p.crop.w >= 28);
        REQUIRE(p.crop.h >= 21);
        REQUIRE(p.crop.x + p.crop.w <= 40);
        REQUIRE(p.crop.y + p.crop.h <= 30);
        bsum += p.brightness;
    }
    CHECK(std::abs(bsum / draws) < 0.01);
}

TEST_CASE("plans and images replay")
{
    const auto img = noise_image(20, 16, 6);
    for (int r = 1; r <= 5; ++r) {
        const auto p = sample_plan(3, "s00042", r, 20, 16);
        CHECK(p == sample_plan(3, "s00042", r, 20, 16));
        CHECK(apply_plan(img, p) == apply_plan(img, sample_plan(3, "s00042", r, 20, 16)));
        CHECK(apply_plan(img, p).width == 20);
    }
    CHECK_FALSE(sample_plan(3, "s00042", 1, 20, 16) == sample_plan(3, "s00043", 1, 20, 16));
    CHECK_FALSE(sample_plan(3, "s00042", 1, 20, 16) == sample_plan(4, "s00042", 1, 20, 16));
    CHECK_THROWS_AS(sample_plan(3, "a", -1, 20, 16), Error);
    CHECK_THROWS_AS(sample_plan(3, "a", 1, 20, 16, {0.0, 1.0}), Error);
}
