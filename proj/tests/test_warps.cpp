#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "warpkit/warps.hpp"

using namespace warpkit;

namespace {

TpsControlSet random_controls(int n, uint64_t seed) {
    Rng rng(seed);
    TpsControlSet c;
    for (int i = 0; i < n; ++i) {
        c.src_x.push_back(rng.uniform(0.0, 100.0));
        c.src_y.push_back(rng.uniform(0.0, 100.0));
        c.dst_x.push_back(rng.uniform(0.0, 100.0));
        c.dst_y.push_back(rng.uniform(0.0, 100.0));
    }
    return c;
}

}  // namespace

TEST_CASE("brown_conrady identity coefficients give a zero field") {
    const CameraIntrinsics intr{100.0, 100.0, 32.0, 24.0};
    const UVField field = brown_conrady_uv(64, 48, intr, LensParams{});
    for (double u : field.u_values()) CHECK(u == 0.0);
    for (double v : field.v_values()) CHECK(v == 0.0);
}

TEST_CASE("brown_conrady k1 closed form at normalized (0.5, 0)") {
    LensParams lens;
    lens.k[0] = 0.1;
    double xd, yd;
    distort_normalized(lens, 0.5, 0.0, xd, yd);
    CHECK(std::abs(xd - 0.5125) <= 1e-12);
    CHECK(yd == 0.0);
}

TEST_CASE("principal point is a fixed point for any coefficients") {
    LensParams lens;
    lens.k[0] = 0.3;
    lens.k[1] = -0.2;
    lens.k[5] = 0.05;
    lens.p1 = 0.01;
    lens.p2 = -0.02;
    lens.s[0] = 0.03;
    lens.s[3] = -0.04;
    double xd, yd;
    distort_normalized(lens, 0.0, 0.0, xd, yd);
    CHECK(xd == 0.0);
    CHECK(yd == 0.0);

    const CameraIntrinsics intr{80.0, 80.0, 16.0, 16.0};
    const UVField field = brown_conrady_uv(33, 33, intr, lens);
    CHECK(field.u(16, 16) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(field.v(16, 16) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("radial-only distortion is radially symmetric") {
    LensParams lens;
    lens.k[0] = 0.08;
    lens.k[1] = -0.01;
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-0.8, 0.8);
        const double y = rng.uniform(-0.8, 0.8);
        double xd, yd;
        distort_normalized(lens, x, y, xd, yd);
        const double mag = std::hypot(xd - x, yd - y);
        // same radius at a rotated position gives the same displacement magnitude
        double xd2, yd2;
        distort_normalized(lens, -y, x, xd2, yd2);
        const double mag2 = std::hypot(xd2 + y, yd2 - x);
        CHECK(std::abs(mag - mag2) <= 1e-9);
    }
}

TEST_CASE("grf_warp alpha 0 gives a zero field") {
    const UVField field = grf_warp_uv(32, 32, 8.0, 0.0, 1, 2);
    for (double u : field.u_values()) CHECK(u == 0.0);
    for (double v : field.v_values()) CHECK(v == 0.0);
}

TEST_CASE("grf_warp is deterministic per seed") {
    const UVField a = grf_warp_uv(32, 32, 8.0, 2.0, 10, 11);
    const UVField b = grf_warp_uv(32, 32, 8.0, 2.0, 10, 11);
    CHECK(a.u_values() == b.u_values());
    CHECK(a.v_values() == b.v_values());
}

TEST_CASE("grf_warp displacement std matches alpha") {
    const double alpha = 3.0;
    double acc = 0.0;
    const int seeds = 20;
    for (uint64_t s = 0; s < seeds; ++s) {
        const UVField f = grf_warp_uv(512, 512, 32.0, alpha, 2 * s, 2 * s + 1);
        double var = 0.0;
        for (double u : f.u_values()) var += u * u;
        acc += std::sqrt(var / static_cast<double>(f.u_values().size()));
    }
    acc /= seeds;
    CHECK(acc == doctest::Approx(alpha).epsilon(0.05));
}

TEST_CASE("tps identity targets yield identity affine and zero weights") {
    TpsControlSet c = random_controls(8, 31);
    c.dst_x = c.src_x;
    c.dst_y = c.src_y;
    const TpsModel model = tps_fit(c);
    CHECK(model.affine_x(0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(model.affine_x(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(model.affine_x(2) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(model.affine_y(2) == doctest::Approx(1.0).epsilon(1e-8));
    for (int i = 0; i < 8; ++i) {
        CHECK(std::abs(model.weights_x(i)) <= 1e-8);
        CHECK(std::abs(model.weights_y(i)) <= 1e-8);
    }
}

TEST_CASE("tps pure translation is exactly affine") {
    TpsControlSet c = random_controls(6, 33);
    for (size_t i = 0; i < c.src_x.size(); ++i) {
        c.dst_x[i] = c.src_x[i] + 5.0;
        c.dst_y[i] = c.src_y[i];
    }
    const TpsModel model = tps_fit(c);
    double fx, fy;
    tps_eval(model, 37.5, 61.2, fx, fy);
    CHECK(fx == doctest::Approx(42.5).epsilon(1e-8));
    CHECK(fy == doctest::Approx(61.2).epsilon(1e-8));
}

TEST_CASE("tps interpolates random targets at control points") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        const TpsControlSet c = random_controls(4, 100 + seed);
        const TpsModel model = tps_fit(c);
        for (size_t i = 0; i < c.src_x.size(); ++i) {
            double fx, fy;
            tps_eval(model, c.src_x[i], c.src_y[i], fx, fy);
            CHECK(std::abs(fx - c.dst_x[i]) <= 1e-6);
            CHECK(std::abs(fy - c.dst_y[i]) <= 1e-6);
        }
    }
}

TEST_CASE("tps side constraints hold") {
    const TpsControlSet c = random_controls(12, 55);
    const TpsModel model = tps_fit(c);
    double sw = 0, swx = 0, swy = 0;
    for (int i = 0; i < 12; ++i) {
        sw += model.weights_x(i);
        swx += model.weights_x(i) * c.src_x[i];
        swy += model.weights_x(i) * c.src_y[i];
    }
    CHECK(std::abs(sw) <= 1e-8);
    CHECK(std::abs(swx) <= 1e-8);
    CHECK(std::abs(swy) <= 1e-8);
}

TEST_CASE("tps rejects collinear control points") {
    TpsControlSet c;
    for (int i = 0; i < 5; ++i) {
        c.src_x.push_back(static_cast<double>(i));
        c.src_y.push_back(2.0 * i);  // all on a line
        c.dst_x.push_back(static_cast<double>(i));
        c.dst_y.push_back(2.0 * i + 1.0);
    }
    CHECK_THROWS_AS(tps_fit(c), std::runtime_error);
}

TEST_CASE("tps_uv of an identity model is a zero field") {
    TpsControlSet c = random_controls(5, 77);
    c.dst_x = c.src_x;
    c.dst_y = c.src_y;
    const UVField field = tps_uv(tps_fit(c), 16, 16);
    for (double u : field.u_values()) CHECK(std::abs(u) <= 1e-7);
    for (double v : field.v_values()) CHECK(std::abs(v) <= 1e-7);
}

TEST_CASE("tps_uv of a translation model is a constant field") {
    TpsControlSet c = random_controls(5, 78);
    for (size_t i = 0; i < c.src_x.size(); ++i) {
        c.dst_x[i] = c.src_x[i] + 5.0;
        c.dst_y[i] = c.src_y[i];
    }
    const UVField field = tps_uv(tps_fit(c), 12, 12);
    for (double u : field.u_values()) CHECK(u == doctest::Approx(5.0).epsilon(1e-7));
    for (double v : field.v_values()) CHECK(std::abs(v) <= 1e-7);
}

TEST_CASE("tps field matches targets at integer control points") {
    TpsControlSet c;
    c.src_x = {3, 12, 7, 14};
    c.src_y = {4, 2, 13, 11};
    c.dst_x = {5.5, 11.0, 8.25, 13.0};
    c.dst_y = {4.0, 3.5, 12.0, 12.5};
    const UVField field = tps_uv(tps_fit(c), 16, 16);
    for (size_t i = 0; i < c.src_x.size(); ++i) {
        const int x = static_cast<int>(c.src_x[i]);
        const int y = static_cast<int>(c.src_y[i]);
        CHECK(std::abs(field.u(x, y) - (c.dst_x[i] - c.src_x[i])) <= 1e-6);
        CHECK(std::abs(field.v(x, y) - (c.dst_y[i] - c.src_y[i])) <= 1e-6);
    }
}

TEST_CASE("velocity from a constant stream function is zero") {
    const ScalarField psi(16, 16, 4.2);
    const UVField field = velocity_from_stream(psi);
    for (double u : field.u_values()) CHECK(u == 0.0);
    for (double v : field.v_values()) CHECK(v == 0.0);
}

TEST_CASE("velocity from psi = x*y gives u = x, v = -y") {
    ScalarField psi(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) psi.at(x, y) = static_cast<double>(x) * y;
    const UVField field = velocity_from_stream(psi);
    for (int y = 1; y < 15; ++y)
        for (int x = 1; x < 15; ++x) {
            CHECK(field.u(x, y) == doctest::Approx(static_cast<double>(x)).epsilon(1e-12));
            CHECK(field.v(x, y) == doctest::Approx(-static_cast<double>(y)).epsilon(1e-12));
            // discrete divergence: 1 + (-1) = 0
            const double div = 0.5 * (field.u(x + 1, y) - field.u(x - 1, y)) +
                               0.5 * (field.v(x, y + 1) - field.v(x, y - 1));
            CHECK(div == doctest::Approx(0.0).epsilon(1e-12));
        }
}

TEST_CASE("divergence_free_uv alpha 0 gives a zero field") {
    const UVField field = divergence_free_uv(32, 32, 8.0, 0.0, 3);
    for (double u : field.u_values()) CHECK(u == 0.0);
}

TEST_CASE("divergence_free_uv max magnitude equals alpha") {
    const double alpha = 2.5;
    const UVField field = divergence_free_uv(64, 64, 16.0, alpha, 5);
    double max_mag = 0.0;
    for (size_t i = 0; i < field.u_values().size(); ++i)
        max_mag = std::max(max_mag, std::hypot(field.u_values()[i], field.v_values()[i]));
    CHECK(max_mag == doctest::Approx(alpha).epsilon(1e-9));
}

TEST_CASE("divergence_free_uv interior divergence is tiny") {
    const double alpha = 3.0, ell = 16.0;
    const UVField field = divergence_free_uv(128, 128, ell, alpha, 9);
    const double bound = 1e-4 * (alpha / ell);
    for (int y = 1; y < 127; ++y)
        for (int x = 1; x < 127; ++x) {
            const double div = 0.5 * (field.u(x + 1, y) - field.u(x - 1, y)) +
                               0.5 * (field.v(x, y + 1) - field.v(x, y - 1));
            CHECK(std::abs(div) <= bound);
        }
}

TEST_CASE("invert_uv of a zero field is zero") {
    const UVField zero(16, 16);
    const UVField inv = invert_uv(zero);
    for (double u : inv.u_values()) CHECK(u == 0.0);
    for (double v : inv.v_values()) CHECK(v == 0.0);
}

TEST_CASE("invert_uv of a constant field is its negation") {
    UVField field(16, 16);
    for (auto& u : field.u_values()) u = 3.0;
    for (auto& v : field.v_values()) v = 4.0;
    const UVField inv = invert_uv(field, 30, 1e-6);
    for (double u : inv.u_values()) CHECK(u == doctest::Approx(-3.0).epsilon(1e-5));
    for (double v : inv.v_values()) CHECK(v == doctest::Approx(-4.0).epsilon(1e-5));
}

TEST_CASE("invert_uv round-trip residual on a smooth warp") {
    const UVField f = grf_warp_uv(512, 512, 64.0, 4.0, 41, 42);
    const UVField g = invert_uv(f, 50, 1e-5);
    // composed displacement g(p) + f(p + g(p)) should vanish
    double max_residual = 0.0;
    for (int y = 16; y < 496; ++y) {
        for (int x = 16; x < 496; ++x) {
            const double mx = x + g.u(x, y);
            const double my = y + g.v(x, y);
            const double fu = warpkit::detail::sample_field_bilinear(f.u_values(), 512, 512, mx, my);
            const double fv = warpkit::detail::sample_field_bilinear(f.v_values(), 512, 512, mx, my);
            max_residual = std::max(max_residual,
                                    std::hypot(g.u(x, y) + fu, g.v(x, y) + fv));
        }
    }
    CHECK(max_residual <= 0.1);
}
