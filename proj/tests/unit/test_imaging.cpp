#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "angiokit/imaging.hpp"

using namespace angiokit;
using namespace angiokit::imaging;

namespace {

GrayImage random_gray(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GrayImage img(w, h);
    for (double& v : img.pixels()) v = u(rng);
    return img;
}

// Dense 2-D convolution with the same truncated kernel, zero outside; used
// only on content far from the borders.
double dense_gaussian_at(const GrayImage& img, double sigma, int cx, int cy) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    double norm = 0.0;
    double acc = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            norm += w;
            if (img.contains(cx - dx, cy - dy)) acc += w * img(cx - dx, cy - dy);
        }
    return acc / norm;
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("disk element membership follows the squared radius") {
    for (int r = 1; r <= 9; ++r) {
        const auto se = StructuringElement::disk(r);
        std::size_t expected = 0;
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
                if (dx * dx + dy * dy <= r * r) ++expected;
        const auto offs = se.offsets();
        CHECK(offs.size() == expected);
        for (const Point p : offs) {
            CHECK(p.x * p.x + p.y * p.y <= r * r);
            CHECK(se.half_width(p.y) == se.half_width(-p.y));
        }
    }
    CHECK_THROWS_AS(StructuringElement::disk(0), Error);
}

TEST_CASE("black top-hat of a constant image is zero") {
    GrayImage img(20, 15, 0.37);
    const auto out = morphology(img, StructuringElement::disk(3), MorphOp::black_tophat);
    for (const double v : out.pixels()) CHECK(v == 0.0);
}

TEST_CASE("erosion of an all-ones mask") {
    BinaryMask ones(10, 10, 1);
    const auto se = StructuringElement::disk(1);
    SUBCASE("replicated border keeps every pixel") {
        const auto out = morphology(ones, se, MorphOp::erode);
        CHECK(count_foreground(out) == 100);
    }
    SUBCASE("zero border strips the outer ring") {
        const auto out = morphology(ones, se, MorphOp::erode, Border::constant(0.0));
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x) {
                const bool ring = x == 0 || y == 0 || x == 9 || y == 9;
                CHECK(out(x, y) == (ring ? 0 : 1));
            }
    }
}

TEST_CASE("dilating a single pixel draws the disk") {
    BinaryMask m(21, 21);
    m(10, 10) = 1;
    const auto out = morphology(m, StructuringElement::disk(2), MorphOp::dilate);
    for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 21; ++x) {
            const int d2 = (x - 10) * (x - 10) + (y - 10) * (y - 10);
            CHECK(out(x, y) == (d2 <= 4 ? 1 : 0));
        }
}

TEST_CASE("grayscale erosion and dilation match a direct neighbourhood scan") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        const auto img = random_gray(rng, 17 + trial, 23 - trial);
        const int r = 1 + trial % 5;
        const auto se = StructuringElement::disk(r);
        CHECK(morphology(img, se, MorphOp::erode) == oracle::naive_morph(img, r, false));
        CHECK(morphology(img, se, MorphOp::dilate) == oracle::naive_morph(img, r, true));
    }
}

TEST_CASE("binary duality, anti-extensive opening, extensive closing") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = oracle::random_mask(rng, 24, 19, 0.45);
        BinaryMask inv(m.width(), m.height());
        for (std::size_t i = 0; i < m.size(); ++i) inv[i] = 1 - m[i];
        const auto se = StructuringElement::disk(1 + trial % 3);
        const auto er = morphology(m, se, MorphOp::erode);
        const auto dil_inv = morphology(inv, se, MorphOp::dilate);
        for (std::size_t i = 0; i < m.size(); ++i) CHECK(er[i] == 1 - dil_inv[i]);

        const auto img = random_gray(rng, 16, 16);
        const auto opened = morphology(img, se, MorphOp::open);
        const auto closed = morphology(img, se, MorphOp::close);
        const auto bth = morphology(img, se, MorphOp::black_tophat);
        for (std::size_t i = 0; i < img.size(); ++i) {
            CHECK(opened[i] <= img[i]);
            CHECK(closed[i] >= img[i]);
            CHECK(bth[i] >= 0.0);
        }
    }
}

TEST_CASE("white top-hat is the residual of the opening") {
    std::mt19937_64 rng(8);
    const auto img = random_gray(rng, 30, 30);
    const auto se = StructuringElement::disk(2);
    const auto wth = morphology(img, se, MorphOp::white_tophat);
    const auto opened = morphology(img, se, MorphOp::open);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(wth[i] == doctest::Approx(img[i] - opened[i]).epsilon(1e-15));
}

TEST_CASE("morphology rejects an empty image") {
    GrayImage empty;
    CHECK_THROWS_AS(morphology(empty, StructuringElement::disk(1), MorphOp::erode), Error);
}

TEST_CASE("gaussian blur keeps constants and means") {
    GrayImage c(25, 18, 0.6);
    for (const double v : gaussian_blur(c, 2.5).pixels()) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));

    GrayImage blob(64, 64);
    for (int y = 28; y < 36; ++y)
        for (int x = 26; x < 38; ++x) blob(x, y) = 0.9;
    const auto out = gaussian_blur(blob, 2.0);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < blob.size(); ++i) {
        a += blob[i];
        b += out[i];
    }
    CHECK(std::abs(a - b) / blob.size() <= 1e-3);
}

TEST_CASE("blurred impulse matches a dense convolution") {
    GrayImage img(33, 33);
    img(16, 16) = 1.0;
    const double sigma = 2.0;
    const auto out = gaussian_blur(img, sigma);
    for (int y = 0; y < 33; ++y)
        for (int x = 0; x < 33; ++x) CHECK(out(x, y) == doctest::Approx(dense_gaussian_at(img, sigma, x, y)).epsilon(1e-9));
    const double peak = 1.0 / (2.0 * M_PI * sigma * sigma);
    CHECK(std::abs(out(16, 16) - peak) <= 0.05 * peak);
}

TEST_CASE("gaussian blur is linear") {
    std::mt19937_64 rng(3);
    const auto x = random_gray(rng, 31, 22);
    const auto y = random_gray(rng, 31, 22);
    GrayImage mix(31, 22);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.3 * x[i] + 0.5 * y[i];
    const auto bx = gaussian_blur(x, 1.7);
    const auto by = gaussian_blur(y, 1.7);
    const auto bm = gaussian_blur(mix, 1.7);
    for (std::size_t i = 0; i < mix.size(); ++i) CHECK(std::abs(bm[i] - (0.3 * bx[i] + 0.5 * by[i])) <= 1e-6);
}

TEST_CASE("gaussian blur rejects non-positive sigma") {
    GrayImage img(4, 4);
    CHECK_THROWS_AS(gaussian_blur(img, 0.0), Error);
    CHECK_THROWS_AS(gaussian_blur(img, -1.0), Error);
    try {
        gaussian_blur(img, 0.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidParameter);
    }
}

TEST_CASE("canny on a constant image is empty") {
    GrayImage img(32, 32, 0.5);
    CHECK(count_foreground(canny(img, {})) == 0);
}

TEST_CASE("canny finds a vertical step as one line") {
    GrayImage img(40, 30);
    for (int y = 0; y < 30; ++y)
        for (int x = 20; x < 40; ++x) img(x, y) = 1.0;
    const auto e = canny(img, {1.0, 0.1, 0.3});
    for (int y = 0; y < 30; ++y) {
        int n = 0;
        for (int x = 0; x < 40; ++x) {
            if (!e(x, y)) continue;
            ++n;
            CHECK(std::abs(x - 19.5) <= 1.5);
        }
        CHECK(n == 1);
    }
}

TEST_CASE("canny contour of a disk is closed and near the perimeter") {
    const int r = 20;
    GrayImage img(64, 64);
    BinaryMask disk(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if ((x - 32) * (x - 32) + (y - 32) * (y - 32) <= r * r) {
                img(x, y) = 1.0;
                disk(x, y) = 1;
            }
    const auto e = canny(img, {1.0, 0.1, 0.3});
    const double perimeter = 2.0 * M_PI * r;
    CHECK(std::abs(double(count_foreground(e)) - perimeter) <= 0.15 * perimeter);
    // Closed: the complement splits into an inside and an outside.
    CHECK(oracle::count_components(e, 0, 4) == 2);
    CHECK(oracle::count_components(e, 1, 8) == 1);
}

TEST_CASE("canny validates thresholds") {
    GrayImage img(8, 8);
    CHECK_THROWS_AS(canny(img, {1.0, 0.3, 0.3}), Error);
    CHECK_THROWS_AS(canny(img, {1.0, 0.0, 0.3}), Error);
    CHECK_THROWS_AS(canny(img, {1.0, 0.1, 1.2}), Error);
    CHECK_THROWS_AS(canny(img, {0.0, 0.1, 0.3}), Error);
}

TEST_CASE("raster invariants are enforced at the boundary") {
    GrayImage bad(2, 1, std::vector<double>{0.5, 1.5});
    CHECK_THROWS_AS(validate(bad), Error);
    BinaryMask m(2, 1, std::vector<std::uint8_t>{0, 2});
    CHECK_THROWS_AS(validate(m), Error);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>{0.0}), Error);
    GrayImage ok(1, 1);
    CHECK_THROWS_AS(ok.set_pixel_size_mm(0.0), Error);
    CHECK_THROWS_AS(ok.set_pixel_size_mm(10.0), Error);
    ok.set_pixel_size_mm(0.3);
    CHECK(ok.pixel_size_mm() == 0.3);
}

}
