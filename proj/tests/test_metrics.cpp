#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "warpkit/metrics.hpp"
#include "warpkit/seed.hpp"

using namespace warpkit;

namespace {

ImageBuffer gray_image(int w, int h, uint8_t value) {
    ImageBuffer img(w, h);
    for (auto& b : img.data()) b = value;
    return img;
}

UVField random_field(int w, int h, uint64_t seed) {
    UVField f(w, h);
    Rng rng(seed);
    for (auto& u : f.u_values()) u = rng.uniform(-10.0, 10.0);
    for (auto& v : f.v_values()) v = rng.uniform(-10.0, 10.0);
    return f;
}

}  // namespace

TEST_CASE("psnr of identical images is the infinite sentinel") {
    const ImageBuffer a = gray_image(8, 8, 100);
    CHECK(!psnr(a, a).has_value());
}

TEST_CASE("psnr of a uniform +16 offset is about 24.05 dB") {
    const ImageBuffer a = gray_image(16, 16, 100);
    const ImageBuffer b = gray_image(16, 16, 116);
    const auto p = psnr(a, b);
    REQUIRE(p.has_value());
    CHECK(*p == doctest::Approx(10.0 * std::log10(65025.0 / 256.0)).epsilon(1e-12));
    CHECK(*p == doctest::Approx(24.05).epsilon(0.001));
}

TEST_CASE("psnr of a single maximal channel error in a 2x2 image") {
    ImageBuffer a = gray_image(2, 2, 0);
    ImageBuffer b = gray_image(2, 2, 0);
    b.at(0, 0, 0) = 255;
    // MSE = 255^2 / 12 over 12 samples
    const auto p = psnr(a, b);
    REQUIRE(p.has_value());
    CHECK(*p == doctest::Approx(10.0 * std::log10(12.0)).epsilon(1e-12));
}

TEST_CASE("psnr rejects mismatched sizes") {
    const ImageBuffer a = gray_image(4, 4, 0);
    const ImageBuffer b = gray_image(4, 5, 0);
    CHECK_THROWS_AS(psnr(a, b), std::invalid_argument);
}

TEST_CASE("psnr is symmetric") {
    ImageBuffer a = gray_image(8, 8, 10);
    ImageBuffer b = gray_image(8, 8, 10);
    Rng rng(3);
    for (auto& px : a.data()) px = static_cast<uint8_t>(rng.next_below(256));
    for (auto& px : b.data()) px = static_cast<uint8_t>(rng.next_below(256));
    CHECK(*psnr(a, b) == doctest::Approx(*psnr(b, a)).epsilon(1e-15));
}

TEST_CASE("psnr strictly decreases as uniform error grows") {
    const ImageBuffer base = gray_image(8, 8, 64);
    double prev = 1e9;
    for (int off = 1; off <= 64; off *= 2) {
        const ImageBuffer shifted = gray_image(8, 8, static_cast<uint8_t>(64 + off));
        const double p = *psnr(base, shifted);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("epe of identical fields is zero") {
    const UVField f = random_field(8, 8, 1);
    CHECK(epe(f, f) == 0.0);
}

TEST_CASE("epe of a constant (3,4) offset is exactly 5") {
    UVField a = random_field(8, 8, 2);
    UVField b = a;
    for (auto& u : b.u_values()) u += 3.0;
    for (auto& v : b.v_values()) v += 4.0;
    CHECK(epe(a, b) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("epe of half (1,0) / half (0,1) differences is 1") {
    UVField a(4, 4);
    UVField b(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            if ((y * 4 + x) % 2 == 0)
                b.u(x, y) = 1.0;
            else
                b.v(x, y) = 1.0;
        }
    CHECK(epe(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("epe rejects mismatched sizes") {
    CHECK_THROWS_AS(epe(UVField(4, 4), UVField(4, 5)), std::invalid_argument);
}

TEST_CASE("epe is a metric on random triples") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        const UVField a = random_field(6, 6, 3 * seed);
        const UVField b = random_field(6, 6, 3 * seed + 1);
        const UVField c = random_field(6, 6, 3 * seed + 2);
        const double ab = epe(a, b);
        const double ba = epe(b, a);
        const double bc = epe(b, c);
        const double ac = epe(a, c);
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
        CHECK(ac <= ab + bc + 1e-9);
    }
}
