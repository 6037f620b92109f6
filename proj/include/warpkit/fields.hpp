#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "warpkit/image.hpp"
#include "warpkit/seed.hpp"

namespace warpkit {

struct GrfParams {
    double correlation_length = 32.0;  // pixels
    double target_variance = 1.0;
};

struct OctaveSpec {
    std::vector<double> scales;   // pixels
    std::vector<double> weights;

    void validate() const {
        if (scales.empty() || scales.size() != weights.size())
            throw std::invalid_argument("OctaveSpec: scales and weights must be non-empty and equal length");
        for (double s : scales)
            if (s < 1.0) throw std::invalid_argument("OctaveSpec: scales must be >= 1");
        for (double w : weights)
            if (w <= 0.0) throw std::invalid_argument("OctaveSpec: weights must be positive");
    }

    // Multi-depth-scale defaults for heterogeneous extinction maps.
    static OctaveSpec defaults() {
        return {{4, 8, 16, 32, 64, 128}, {0.30, 0.22, 0.15, 0.11, 0.08, 0.07}};
    }
};

namespace detail {

// FFTW plan creation/destruction is not thread-safe.
inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

// Stationary zero-mean Gaussian random field approximating the exponential
// covariance exp(-d / correlation_length). Method: white Gaussian noise is
// filtered in the Fourier domain by the square root of a Matern-3/2 spectral
// density S(k) ~ (1 + rho^2 |k|^2)^(-5/2), with rho calibrated so the
// correlation at lag correlation_length equals 1/e, matching the exponential
// model there. The exact Matern-1/2 (exponential) spectrum yields
// non-differentiable fields whose warps fold at the intended displacement
// scales; the smoothed spectrum keeps the fields invertible while preserving
// the correlation-length contract. The DC bin is zeroed (exact zero mean) and
// the result is rescaled to unit empirical variance.
inline ScalarField sample_grf(int width, int height, const GrfParams& params, uint64_t seed) {
    if (params.correlation_length <= 0.0)
        throw std::invalid_argument("sample_grf: correlation_length must be positive");
    if (params.target_variance <= 0.0)
        throw std::invalid_argument("sample_grf: target_variance must be positive");

    const size_t n = static_cast<size_t>(width) * height;
    std::vector<double> noise(n);
    Rng rng(seed);
    for (double& v : noise) v = rng.normal();

    const int spec_w = width / 2 + 1;
    std::vector<std::complex<double>> spectrum(static_cast<size_t>(height) * spec_w);
    std::vector<double> out(n);

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        fwd = fftw_plan_dft_r2c_2d(height, width, noise.data(),
                                   reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(height, width,
                                   reinterpret_cast<fftw_complex*>(spectrum.data()), out.data(),
                                   FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    // correlation is (1 + r/rho) e^(-r/rho); (1 + a) e^-a = e^-1 at
    // a = 2.1461932..., so rho = ell / a puts the 1/e point at lag ell
    const double rho = 0.4659412723849929 * params.correlation_length;
    for (int ky = 0; ky < height; ++ky) {
        const double fy = (ky <= height / 2 ? ky : ky - height) / static_cast<double>(height);
        for (int kx = 0; kx < spec_w; ++kx) {
            const double fx = kx / static_cast<double>(width);
            const double k2 = (2.0 * M_PI) * (2.0 * M_PI) * (fx * fx + fy * fy);
            const double filt = std::pow(1.0 + rho * rho * k2, -1.25);
            spectrum[static_cast<size_t>(ky) * spec_w + kx] *= filt;
        }
    }
    spectrum[0] = 0.0;  // exact zero mean

    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    double var = 0.0;
    for (double v : out) var += v * v;
    var /= static_cast<double>(n);
    if (var <= 0.0) throw std::runtime_error("sample_grf: degenerate field");
    const double scale = std::sqrt(params.target_variance / var);

    ScalarField field(width, height);
    for (size_t i = 0; i < n; ++i) field.values()[i] = out[i] * scale;
    return field;
}

namespace detail {

inline uint64_t lattice_hash(uint64_t seed, int64_t ix, int64_t iy) {
    uint64_t h = mix64(seed ^ static_cast<uint64_t>(ix) * 0x9E3779B97F4A7C15ULL);
    return mix64(h ^ static_cast<uint64_t>(iy) * 0xC2B2AE3D27D4EB4FULL);
}

// quintic fade 6t^5 - 15t^4 + 10t^3
inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double grad_dot(uint64_t seed, int64_t ix, int64_t iy, double dx, double dy) {
    const uint64_t h = lattice_hash(seed, ix, iy);
    const double angle = 2.0 * M_PI * static_cast<double>(h >> 11) * 0x1.0p-53;
    return std::cos(angle) * dx + std::sin(angle) * dy;
}

}  // namespace detail

// Classic 2D gradient noise: hash-derived unit gradients on the integer
// lattice, quintic fade, zero at lattice nodes, |value| <= sqrt(2)/2.
inline double perlin2(uint64_t seed, double x, double y) {
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const int64_t ix = static_cast<int64_t>(xf);
    const int64_t iy = static_cast<int64_t>(yf);
    const double dx = x - xf;
    const double dy = y - yf;

    const double n00 = detail::grad_dot(seed, ix, iy, dx, dy);
    const double n10 = detail::grad_dot(seed, ix + 1, iy, dx - 1.0, dy);
    const double n01 = detail::grad_dot(seed, ix, iy + 1, dx, dy - 1.0);
    const double n11 = detail::grad_dot(seed, ix + 1, iy + 1, dx - 1.0, dy - 1.0);

    const double u = detail::fade(dx);
    const double v = detail::fade(dy);
    const double top = n00 + (n10 - n00) * u;
    const double bot = n01 + (n11 - n01) * u;
    return top + (bot - top) * v;
}

// Gradient noise evaluated at (x/scale, y/scale) per pixel.
inline ScalarField sample_perlin(int width, int height, double scale, uint64_t seed) {
    if (scale < 1.0) throw std::invalid_argument("sample_perlin: scale must be >= 1");
    ScalarField field(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            field.at(x, y) = perlin2(seed, x / scale, y / scale);
    return field;
}

// Affine rescale to [0,1]; min -> 0, max -> 1.
inline ScalarField normalize_01(const ScalarField& f) {
    const double lo = f.min();
    const double hi = f.max();
    if (!(hi > lo)) throw std::invalid_argument("normalize_01: degenerate range (max == min)");
    ScalarField out(f.width(), f.height());
    const double inv = 1.0 / (hi - lo);
    for (size_t i = 0; i < f.values().size(); ++i) out.values()[i] = (f.values()[i] - lo) * inv;
    return out;
}

// sum_i w_i f_i / sum_i w_i
inline ScalarField combine_weighted(const std::vector<ScalarField>& fields,
                                    const std::vector<double>& weights) {
    if (fields.empty() || fields.size() != weights.size())
        throw std::invalid_argument("combine_weighted: fields/weights size mismatch");
    ScalarField out(fields[0].width(), fields[0].height());
    double wsum = 0.0;
    for (size_t k = 0; k < fields.size(); ++k) {
        if (fields[k].width() != out.width() || fields[k].height() != out.height())
            throw std::invalid_argument("combine_weighted: field size mismatch");
        for (size_t i = 0; i < out.values().size(); ++i)
            out.values()[i] += weights[k] * fields[k].values()[i];
        wsum += weights[k];
    }
    for (double& v : out.values()) v /= wsum;
    return out;
}

// Per-scale noise normalized to [0,1], combined by weights and divided by the
// weight sum; output stays in [0,1]. Octave k draws from a sub-seed so octaves
// are independent.
inline ScalarField multiscale_perlin(int width, int height, const OctaveSpec& octaves, uint64_t seed) {
    octaves.validate();
    std::vector<ScalarField> layers;
    layers.reserve(octaves.scales.size());
    for (size_t k = 0; k < octaves.scales.size(); ++k) {
        const uint64_t sub = detail::mix64(seed ^ (k + 1));
        layers.push_back(normalize_01(sample_perlin(width, height, octaves.scales[k], sub)));
    }
    return combine_weighted(layers, octaves.weights);
}

}  // namespace warpkit
