#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "warpkit/image.hpp"

namespace warpkit {

// 10 log10(255^2 / MSE) over all channels; nullopt marks identical inputs
// (infinite PSNR) so aggregates stay honest.
inline std::optional<double> psnr(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_size(b)) throw std::invalid_argument("psnr: image size mismatch");
    double sse = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
        sse += d * d;
    }
    if (sse == 0.0) return std::nullopt;
    const double mse = sse / static_cast<double>(da.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Mean Euclidean norm of the per-pixel flow difference, in pixels.
inline double epe(const UVField& pred, const UVField& gt) {
    if (!pred.same_size(gt)) throw std::invalid_argument("epe: field size mismatch");
    double sum = 0.0;
    const size_t n = pred.u_values().size();
    for (size_t i = 0; i < n; ++i) {
        const double du = pred.u_values()[i] - gt.u_values()[i];
        const double dv = pred.v_values()[i] - gt.v_values()[i];
        sum += std::sqrt(du * du + dv * dv);
    }
    return sum / static_cast<double>(n);
}

}  // namespace warpkit
