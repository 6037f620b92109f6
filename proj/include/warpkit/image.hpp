#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpkit {

// 8-bit RGB raster, row-major, origin top-left.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height)
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height * 3, 0) {
        if (width < 2 || height < 2)
            throw std::invalid_argument("ImageBuffer: dimensions must be at least 2x2");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    uint8_t& at(int x, int y, int c) { return data_[(static_cast<size_t>(y) * width_ + x) * 3 + c]; }
    uint8_t at(int x, int y, int c) const { return data_[(static_cast<size_t>(y) * width_ + x) * 3 + c]; }

    std::vector<uint8_t>& data() { return data_; }
    const std::vector<uint8_t>& data() const { return data_; }

    bool same_size(const ImageBuffer& o) const { return width_ == o.width_ && height_ == o.height_; }
    bool operator==(const ImageBuffer& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> data_;
};

// Single-channel real-valued grid.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int width, int height, double fill = 0.0)
        : width_(width), height_(height), values_(static_cast<size_t>(width) * height, fill) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("ScalarField: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    double& at(int x, int y) { return values_[static_cast<size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }
    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

// Per-pixel displacement in pixels, backward-sampling convention:
// output(x, y) = bilinear(input, x + u(x,y), y + v(x,y)).
class UVField {
public:
    UVField() = default;
    UVField(int width, int height)
        : width_(width), height_(height),
          u_(static_cast<size_t>(width) * height, 0.0),
          v_(static_cast<size_t>(width) * height, 0.0) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("UVField: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    double& u(int x, int y) { return u_[static_cast<size_t>(y) * width_ + x]; }
    double u(int x, int y) const { return u_[static_cast<size_t>(y) * width_ + x]; }
    double& v(int x, int y) { return v_[static_cast<size_t>(y) * width_ + x]; }
    double v(int x, int y) const { return v_[static_cast<size_t>(y) * width_ + x]; }

    std::vector<double>& u_values() { return u_; }
    const std::vector<double>& u_values() const { return u_; }
    std::vector<double>& v_values() { return v_; }
    const std::vector<double>& v_values() const { return v_; }

    bool same_size(const UVField& o) const { return width_ == o.width_ && height_ == o.height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> u_;
    std::vector<double> v_;
};

enum class BorderMode { ClampToEdge, Constant };

struct BorderPolicy {
    BorderMode mode = BorderMode::ClampToEdge;
    std::array<uint8_t, 3> constant{0, 0, 0};
};

namespace detail {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline std::array<double, 3> fetch(const ImageBuffer& img, int x, int y, const BorderPolicy& border) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) {
        if (border.mode == BorderMode::Constant)
            return {static_cast<double>(border.constant[0]),
                    static_cast<double>(border.constant[1]),
                    static_cast<double>(border.constant[2])};
        x = clampi(x, 0, img.width() - 1);
        y = clampi(y, 0, img.height() - 1);
    }
    return {static_cast<double>(img.at(x, y, 0)),
            static_cast<double>(img.at(x, y, 1)),
            static_cast<double>(img.at(x, y, 2))};
}

inline uint8_t round_u8(double v) {
    double r = std::lround(v);
    return static_cast<uint8_t>(r < 0.0 ? 0.0 : (r > 255.0 ? 255.0 : r));
}

}  // namespace detail

// Bilinear blend of the four neighbors; exact at integer in-bounds coordinates.
inline std::array<double, 3> bilinear_sample(const ImageBuffer& img, double x, double y,
                                             const BorderPolicy& border = {}) {
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const int x0 = static_cast<int>(xf);
    const int y0 = static_cast<int>(yf);
    const double tx = x - xf;
    const double ty = y - yf;

    const auto c00 = detail::fetch(img, x0, y0, border);
    const auto c10 = detail::fetch(img, x0 + 1, y0, border);
    const auto c01 = detail::fetch(img, x0, y0 + 1, border);
    const auto c11 = detail::fetch(img, x0 + 1, y0 + 1, border);

    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = c00[c] + (c10[c] - c00[c]) * tx;
        const double bot = c01[c] + (c11[c] - c01[c]) * tx;
        out[c] = top + (bot - top) * ty;
    }
    return out;
}

// out(x,y) = bilinear_sample(img, x + u(x,y), y + v(x,y)).
inline ImageBuffer remap(const ImageBuffer& img, const UVField& field, const BorderPolicy& border = {}) {
    if (img.width() != field.width() || img.height() != field.height())
        throw std::invalid_argument("remap: field size " + std::to_string(field.width()) + "x" +
                                    std::to_string(field.height()) + " does not match image " +
                                    std::to_string(img.width()) + "x" + std::to_string(img.height()));
    ImageBuffer out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double sx = x + field.u(x, y);
            const double sy = y + field.v(x, y);
            if (field.u(x, y) == 0.0 && field.v(x, y) == 0.0) {
                // integer path keeps identity warps bit-exact
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, c);
                continue;
            }
            const auto rgb = bilinear_sample(img, sx, sy, border);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = detail::round_u8(rgb[c]);
        }
    }
    return out;
}

// Black/white cells, top-left cell white: white iff floor(x/cell)+floor(y/cell) is even.
inline ImageBuffer render_checkerboard(int width, int height, int cell) {
    if (cell < 1) throw std::invalid_argument("render_checkerboard: cell must be >= 1");
    ImageBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const uint8_t v = (((x / cell) + (y / cell)) % 2 == 0) ? 255 : 0;
            out.at(x, y, 0) = v;
            out.at(x, y, 1) = v;
            out.at(x, y, 2) = v;
        }
    }
    return out;
}

// red = clamp(128 + 127*u/scale), green likewise for v, blue = 0.
inline ImageBuffer visualize_uv(const UVField& field, double scale) {
    if (scale <= 0.0) throw std::invalid_argument("visualize_uv: scale must be positive");
    ImageBuffer out(field.width(), field.height());
    for (int y = 0; y < field.height(); ++y) {
        for (int x = 0; x < field.width(); ++x) {
            out.at(x, y, 0) = detail::round_u8(128.0 + 127.0 * field.u(x, y) / scale);
            out.at(x, y, 1) = detail::round_u8(128.0 + 127.0 * field.v(x, y) / scale);
            out.at(x, y, 2) = 0;
        }
    }
    return out;
}

}  // namespace warpkit
