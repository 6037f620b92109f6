#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <tuple>

#include "warpkit/fields.hpp"
#include "warpkit/image.hpp"
#include "warpkit/seed.hpp"

namespace warpkit {

struct FogParams {
    double k0 = 0.0375;                       // per meter; -ln(0.05)/80m
    double d_max = 160.0;                     // meters
    std::array<double, 3> atmo{220, 220, 235};  // atmospheric light, [0,255]
    double jitter = 0.05;                     // max |delta|, fraction of k0

    void validate() const {
        if (k0 < 0.0) throw std::invalid_argument("FogParams: k0 must be non-negative");
        if (d_max <= 0.0) throw std::invalid_argument("FogParams: d_max must be positive");
        if (std::abs(jitter) > 0.05) throw std::invalid_argument("FogParams: |jitter| must be <= 0.05");
        for (double a : atmo)
            if (a < 0.0 || a > 255.0) throw std::invalid_argument("FogParams: atmospheric light outside [0,255]");
    }
};

// Mean extinction for a visibility distance at the 5% contrast threshold.
inline double extinction_from_visibility(double visibility_m) {
    if (visibility_m <= 0.0) throw std::invalid_argument("extinction_from_visibility: visibility must be positive");
    return -std::log(0.05) / visibility_m;
}

// Linear top-to-bottom depth gradient: d = (1 - y/H) * d_max.
inline ScalarField depth_map(int width, int height, double d_max) {
    if (d_max <= 0.0) throw std::invalid_argument("depth_map: d_max must be positive");
    ScalarField d(width, height);
    for (int y = 0; y < height; ++y) {
        const double v = (1.0 - static_cast<double>(y) / height) * d_max;
        for (int x = 0; x < width; ++x) d.at(x, y) = v;
    }
    return d;
}

namespace detail {

// t = exp(-k d); blend toward atmospheric light; single rounding at the end.
template <typename KAt>
std::pair<ImageBuffer, ScalarField> koschmieder_blend(const ImageBuffer& img, KAt k_at,
                                                      const ScalarField& d,
                                                      const std::array<double, 3>& atmo) {
    if (img.width() != d.width() || img.height() != d.height())
        throw std::invalid_argument("apply_koschmieder: depth map size mismatch");
    ImageBuffer out(img.width(), img.height());
    ScalarField t(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double k = k_at(x, y);
            const double depth = d.at(x, y);
            if (k < 0.0) throw std::invalid_argument("apply_koschmieder: negative extinction");
            if (depth < 0.0) throw std::invalid_argument("apply_koschmieder: negative depth");
            const double trans = std::exp(-k * depth);
            t.at(x, y) = trans;
            for (int c = 0; c < 3; ++c) {
                const double clean = img.at(x, y, c);
                out.at(x, y, c) = round_u8(clean * trans + atmo[c] * (1.0 - trans));
            }
        }
    }
    return {std::move(out), std::move(t)};
}

}  // namespace detail

inline std::pair<ImageBuffer, ScalarField> apply_koschmieder(const ImageBuffer& img, double k,
                                                             const ScalarField& d,
                                                             const std::array<double, 3>& atmo) {
    return detail::koschmieder_blend(img, [k](int, int) { return k; }, d, atmo);
}

inline std::pair<ImageBuffer, ScalarField> apply_koschmieder(const ImageBuffer& img,
                                                             const ScalarField& k_map,
                                                             const ScalarField& d,
                                                             const std::array<double, 3>& atmo) {
    if (img.width() != k_map.width() || img.height() != k_map.height())
        throw std::invalid_argument("apply_koschmieder: k-map size mismatch");
    return detail::koschmieder_blend(img, [&](int x, int y) { return k_map.at(x, y); }, d, atmo);
}

struct UniformFogResult {
    ImageBuffer image;
    ScalarField transmission;
    double k = 0.0;
    double delta = 0.0;
};

// k = k0 * (1 + delta), delta ~ U(-jitter, +jitter), one draw per image.
inline UniformFogResult uniform_fog(const ImageBuffer& img, const FogParams& params, uint64_t seed) {
    params.validate();
    Rng rng(seed);
    const double delta = params.jitter == 0.0 ? 0.0 : rng.uniform(-params.jitter, params.jitter);
    const double k = params.k0 * (1.0 + delta);
    const ScalarField d = depth_map(img.width(), img.height(), params.d_max);
    auto [out, t] = apply_koschmieder(img, k, d, params.atmo);
    return {std::move(out), std::move(t), k, delta};
}

struct HeteroFogResult {
    ImageBuffer image;
    ScalarField k_map;
    ScalarField transmission;
    double delta = 0.0;
};

// Per-pixel extinction k(x,y) = k0 * P_comb / <P_comb> * (1 + delta); the mean
// of the k-map equals k0 (1 + delta) by construction.
inline HeteroFogResult hetero_fog(const ImageBuffer& img, const FogParams& params,
                                  const OctaveSpec& octaves, uint64_t seed) {
    params.validate();
    Rng rng(seed);
    const double delta = params.jitter == 0.0 ? 0.0 : rng.uniform(-params.jitter, params.jitter);
    const ScalarField p_comb = multiscale_perlin(img.width(), img.height(), octaves, rng.next_u64());
    const double mean = p_comb.mean();
    if (mean <= 0.0) throw std::invalid_argument("hetero_fog: degenerate combined noise (zero mean)");
    ScalarField k_map(img.width(), img.height());
    const double factor = params.k0 * (1.0 + delta) / mean;
    for (size_t i = 0; i < k_map.values().size(); ++i) k_map.values()[i] = factor * p_comb.values()[i];
    const ScalarField d = depth_map(img.width(), img.height(), params.d_max);
    auto [out, t] = apply_koschmieder(img, k_map, d, params.atmo);
    return {std::move(out), std::move(k_map), std::move(t), delta};
}

struct FlareParams {
    double rho = 0.3;    // radius as a fraction of the image diagonal
    double beta = 0.6;   // intensity fraction
    double cx = -1.0;    // pixels; negative means "sample from seed"
    double cy = -1.0;

    void validate() const {
        if (rho < 0.25 || rho > 0.35) throw std::invalid_argument("FlareParams: rho outside [0.25, 0.35]");
        if (beta < 0.0 || beta > 0.65 || (beta != 0.0 && beta < 0.55))
            throw std::invalid_argument("FlareParams: beta outside [0.55, 0.65]");
    }
};

// Materializes center and randomized rho/beta from the stated uniform ranges.
inline FlareParams sample_flare_params(int width, int height, uint64_t seed) {
    Rng rng(seed);
    FlareParams p;
    p.rho = rng.uniform(0.25, 0.35);
    p.beta = rng.uniform(0.55, 0.65);
    p.cx = rng.uniform(0.3 * width, 0.7 * width);
    p.cy = rng.uniform(0.0, 0.3 * height);
    return p;
}

struct FlareResult {
    ImageBuffer image;
    ScalarField mask;
    FlareParams params;
};

// Gaussian mask m = exp(-0.5 (d_f / r_flare)^2) around the flare center;
// I_out = clip(I + beta * 255 * m, 0, 255), identical on all channels.
inline FlareResult lens_flare(const ImageBuffer& img, FlareParams params, uint64_t seed) {
    if (params.cx < 0.0 || params.cy < 0.0) {
        const FlareParams sampled = sample_flare_params(img.width(), img.height(), seed);
        params.cx = sampled.cx;
        params.cy = sampled.cy;
    }
    params.validate();
    const double w = img.width(), h = img.height();
    if (params.cx < 0.3 * w || params.cx > 0.7 * w || params.cy < 0.0 || params.cy > 0.3 * h)
        throw std::invalid_argument("FlareParams: center outside the sampling region");

    const double r_flare = params.rho * std::sqrt(w * w + h * h);
    ImageBuffer out(img.width(), img.height());
    ScalarField mask(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double dx = x - params.cx;
            const double dy = y - params.cy;
            const double m = std::exp(-0.5 * (dx * dx + dy * dy) / (r_flare * r_flare));
            mask.at(x, y) = m;
            const double add = params.beta * 255.0 * m;
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = detail::round_u8(img.at(x, y, c) + add);
        }
    }
    return {std::move(out), std::move(mask), params};
}

}  // namespace warpkit
