#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "warpkit/fields.hpp"
#include "warpkit/image.hpp"
#include "warpkit/seed.hpp"

namespace warpkit {

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;  // pixels
    double cx = 0.0, cy = 0.0;  // pixels

    void validate(int width, int height) const {
        if (fx <= 0.0 || fy <= 0.0)
            throw std::invalid_argument("CameraIntrinsics: focal lengths must be positive");
        if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
            throw std::invalid_argument("CameraIntrinsics: principal point outside image");
    }
};

// Radial (k1..k6), tangential (p1, p2) and thin-prism (s1..s4) coefficients
// over normalized image coordinates.
struct LensParams {
    double k[6] = {0, 0, 0, 0, 0, 0};
    double p1 = 0.0, p2 = 0.0;
    double s[4] = {0, 0, 0, 0};

    bool is_identity() const {
        for (double v : k)
            if (v != 0.0) return false;
        for (double v : s)
            if (v != 0.0) return false;
        return p1 == 0.0 && p2 == 0.0;
    }
};

// Forward polynomial distortion of a normalized point.
inline void distort_normalized(const LensParams& lens, double x, double y, double& xd, double& yd) {
    const double r2 = x * x + y * y;
    double radial = 1.0;
    double rpow = 1.0;
    for (int i = 0; i < 6; ++i) {
        rpow *= r2;
        radial += lens.k[i] * rpow;
    }
    const double r4 = r2 * r2;
    xd = x * radial + 2.0 * lens.p1 * x * y + lens.p2 * (r2 + 2.0 * x * x) + lens.s[0] * r2 + lens.s[1] * r4;
    yd = y * radial + lens.p1 * (r2 + 2.0 * y * y) + 2.0 * lens.p2 * x * y + lens.s[2] * r2 + lens.s[3] * r4;
}

// Evaluates the forward lens model at every destination pixel and stores the
// source-minus-destination offset, so the field doubles as the ground-truth
// correction field under backward sampling.
inline UVField brown_conrady_uv(int width, int height, const CameraIntrinsics& intr, const LensParams& lens) {
    intr.validate(width, height);
    UVField field(width, height);
    if (lens.is_identity()) return field;
    for (int py = 0; py < height; ++py) {
        const double y = (py - intr.cy) / intr.fy;
        for (int px = 0; px < width; ++px) {
            const double x = (px - intr.cx) / intr.fx;
            double xd, yd;
            distort_normalized(lens, x, y, xd, yd);
            field.u(px, py) = (xd * intr.fx + intr.cx) - px;
            field.v(px, py) = (yd * intr.fy + intr.cy) - py;
        }
    }
    return field;
}

// Two independent unit-variance exponential-covariance fields scaled by alpha.
inline UVField grf_warp_uv(int width, int height, double corr_length, double alpha,
                           uint64_t seed_u, uint64_t seed_v) {
    if (alpha < 0.0) throw std::invalid_argument("grf_warp_uv: alpha must be non-negative");
    UVField field(width, height);
    if (alpha == 0.0) return field;
    const GrfParams params{corr_length, 1.0};
    const ScalarField ru = sample_grf(width, height, params, seed_u);
    const ScalarField rv = sample_grf(width, height, params, seed_v);
    for (size_t i = 0; i < ru.values().size(); ++i) {
        field.u_values()[i] = alpha * ru.values()[i];
        field.v_values()[i] = alpha * rv.values()[i];
    }
    return field;
}

struct TpsControlSet {
    std::vector<double> src_x, src_y;  // pixels
    std::vector<double> dst_x, dst_y;  // pixels

    size_t count() const { return src_x.size(); }

    void validate() const {
        const size_t n = src_x.size();
        if (n < 3 || src_y.size() != n || dst_x.size() != n || dst_y.size() != n)
            throw std::invalid_argument("TpsControlSet: need >= 3 matched point pairs");
    }
};

// Affine part plus kernel weights per axis, with the moment side constraints
// sum(w) = sum(w x) = sum(w y) = 0.
struct TpsModel {
    std::vector<double> ctrl_x, ctrl_y;
    Eigen::Vector3d affine_x, affine_y;
    Eigen::VectorXd weights_x, weights_y;
};

// r^2 ln r with the removable singularity fixed at U(0) = 0.
inline double tps_kernel(double r2) {
    if (r2 <= 0.0) return 0.0;
    return 0.5 * r2 * std::log(r2);
}

inline TpsModel tps_fit(const TpsControlSet& controls) {
    controls.validate();
    const int n = static_cast<int>(controls.count());

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n + 3, n + 3);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = controls.src_x[i] - controls.src_x[j];
            const double dy = controls.src_y[i] - controls.src_y[j];
            const double u = tps_kernel(dx * dx + dy * dy);
            L(i, j) = u;
            L(j, i) = u;
        }
        L(i, n) = 1.0;
        L(i, n + 1) = controls.src_x[i];
        L(i, n + 2) = controls.src_y[i];
        L(n, i) = 1.0;
        L(n + 1, i) = controls.src_x[i];
        L(n + 2, i) = controls.src_y[i];
    }

    Eigen::VectorXd bx = Eigen::VectorXd::Zero(n + 3);
    Eigen::VectorXd by = Eigen::VectorXd::Zero(n + 3);
    for (int i = 0; i < n; ++i) {
        bx(i) = controls.dst_x[i];
        by(i) = controls.dst_y[i];
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
    if (!lu.isInvertible())
        throw std::runtime_error("tps_fit: singular system (collinear control points?)");
    const Eigen::VectorXd sx = lu.solve(bx);
    const Eigen::VectorXd sy = lu.solve(by);

    TpsModel model;
    model.ctrl_x = controls.src_x;
    model.ctrl_y = controls.src_y;
    model.weights_x = sx.head(n);
    model.weights_y = sy.head(n);
    model.affine_x = sx.tail(3);
    model.affine_y = sy.tail(3);
    return model;
}

inline void tps_eval(const TpsModel& model, double x, double y, double& fx, double& fy) {
    fx = model.affine_x(0) + model.affine_x(1) * x + model.affine_x(2) * y;
    fy = model.affine_y(0) + model.affine_y(1) * x + model.affine_y(2) * y;
    for (size_t i = 0; i < model.ctrl_x.size(); ++i) {
        const double dx = x - model.ctrl_x[i];
        const double dy = y - model.ctrl_y[i];
        const double u = tps_kernel(dx * dx + dy * dy);
        fx += model.weights_x(static_cast<int>(i)) * u;
        fy += model.weights_y(static_cast<int>(i)) * u;
    }
}

// Displacement (f_x(x,y) - x, f_y(x,y) - y) at every pixel.
inline UVField tps_uv(const TpsModel& model, int width, int height) {
    UVField field(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double fx, fy;
            tps_eval(model, x, y, fx, fy);
            field.u(x, y) = fx - x;
            field.v(x, y) = fy - y;
        }
    }
    return field;
}

// Jittered-grid control points with Gaussian-perturbed targets.
inline TpsControlSet tps_jittered_grid(int width, int height, int grid, double jitter_sigma,
                                       double target_sigma, uint64_t seed) {
    if (grid < 2) throw std::invalid_argument("tps_jittered_grid: grid must be >= 2");
    Rng rng(seed);
    TpsControlSet controls;
    for (int gy = 0; gy < grid; ++gy) {
        for (int gx = 0; gx < grid; ++gx) {
            const double x = (gx + 0.5) * width / grid + jitter_sigma * rng.normal();
            const double y = (gy + 0.5) * height / grid + jitter_sigma * rng.normal();
            controls.src_x.push_back(x);
            controls.src_y.push_back(y);
            controls.dst_x.push_back(x + target_sigma * rng.normal());
            controls.dst_y.push_back(y + target_sigma * rng.normal());
        }
    }
    return controls;
}

// (u, v) = (d(psi)/dy, -d(psi)/dx), central differences inside, one-sided at
// the borders.
inline UVField velocity_from_stream(const ScalarField& psi) {
    const int w = psi.width();
    const int h = psi.height();
    UVField field(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double dpsy;
            if (y == 0)
                dpsy = psi.at(x, 1) - psi.at(x, 0);
            else if (y == h - 1)
                dpsy = psi.at(x, h - 1) - psi.at(x, h - 2);
            else
                dpsy = 0.5 * (psi.at(x, y + 1) - psi.at(x, y - 1));
            double dpsx;
            if (x == 0)
                dpsx = psi.at(1, y) - psi.at(0, y);
            else if (x == w - 1)
                dpsx = psi.at(w - 1, y) - psi.at(w - 2, y);
            else
                dpsx = 0.5 * (psi.at(x + 1, y) - psi.at(x - 1, y));
            field.u(x, y) = dpsy;
            field.v(x, y) = -dpsx;
        }
    }
    return field;
}

// Stream function drawn as a GRF, differentiated, then rescaled so the maximum
// displacement magnitude equals alpha.
inline UVField divergence_free_uv(int width, int height, double corr_length, double alpha, uint64_t seed) {
    if (alpha < 0.0) throw std::invalid_argument("divergence_free_uv: alpha must be non-negative");
    UVField field(width, height);
    if (alpha == 0.0) return field;
    const ScalarField psi = sample_grf(width, height, GrfParams{corr_length, 1.0}, seed);
    field = velocity_from_stream(psi);
    double max_mag = 0.0;
    for (size_t i = 0; i < field.u_values().size(); ++i) {
        const double m = std::hypot(field.u_values()[i], field.v_values()[i]);
        if (m > max_mag) max_mag = m;
    }
    if (max_mag == 0.0) return field;
    const double scale = alpha / max_mag;
    for (size_t i = 0; i < field.u_values().size(); ++i) {
        field.u_values()[i] *= scale;
        field.v_values()[i] *= scale;
    }
    return field;
}

namespace detail {

inline double sample_field_bilinear(const std::vector<double>& vals, int w, int h, double x, double y) {
    const double xc = std::min(std::max(x, 0.0), static_cast<double>(w - 1));
    const double yc = std::min(std::max(y, 0.0), static_cast<double>(h - 1));
    const int x0 = std::min(static_cast<int>(std::floor(xc)), w - 2 >= 0 ? w - 2 : 0);
    const int y0 = std::min(static_cast<int>(std::floor(yc)), h - 2 >= 0 ? h - 2 : 0);
    const double tx = xc - x0;
    const double ty = yc - y0;
    const double v00 = vals[static_cast<size_t>(y0) * w + x0];
    const double v10 = vals[static_cast<size_t>(y0) * w + x0 + 1];
    const double v01 = vals[static_cast<size_t>(y0 + 1) * w + x0];
    const double v11 = vals[static_cast<size_t>(y0 + 1) * w + x0 + 1];
    const double top = v00 + (v10 - v00) * tx;
    const double bot = v01 + (v11 - v01) * tx;
    return top + (bot - top) * ty;
}

}  // namespace detail

// Fixed-point inversion g_{k+1}(p) = -f(p + g_k(p)); contractive for small
// displacements relative to the correlation length.
inline UVField invert_uv(const UVField& field, int iterations = 30, double tol = 1e-4) {
    if (iterations < 1) throw std::invalid_argument("invert_uv: iterations must be >= 1");
    const int w = field.width();
    const int h = field.height();
    UVField inv(w, h);
    for (int it = 0; it < iterations; ++it) {
        double max_update = 0.0;
        UVField next(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double sx = x + inv.u(x, y);
                const double sy = y + inv.v(x, y);
                const double nu = -detail::sample_field_bilinear(field.u_values(), w, h, sx, sy);
                const double nv = -detail::sample_field_bilinear(field.v_values(), w, h, sx, sy);
                max_update = std::max(max_update, std::max(std::abs(nu - inv.u(x, y)),
                                                           std::abs(nv - inv.v(x, y))));
                next.u(x, y) = nu;
                next.v(x, y) = nv;
            }
        }
        inv = std::move(next);
        if (max_update < tol) break;
    }
    return inv;
}

}  // namespace warpkit
