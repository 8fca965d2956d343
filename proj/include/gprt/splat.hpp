#pragma once

#include <span>
#include <vector>

#include "gprt/camera.hpp"
#include "gprt/image.hpp"
#include "gprt/math.hpp"

namespace gprt {

struct Gaussian3D {
    Vec3 position;
    Quat rotation;               // unit
    Vec3 scale{1.0, 1.0, 1.0};   // per-axis stddev, > 0
    double opacity = 1.0;        // [0, 1]

    bool valid() const {
        return std::abs(rotation.norm() - 1.0) <= 1e-6 &&
               scale.x > 0 && scale.y > 0 && scale.z > 0 &&
               opacity >= 0.0 && opacity <= 1.0 && all_finite(position);
    }
};

// Sigma = R * diag(s^2) * R^T; symmetric positive-definite.
Mat3 covariance_from_qs(const Quat& q, const Vec3& s);

// EWA perspective projection of a Gaussian. 2D covariance carries a 0.3 px^2
// low-pass floor on the diagonal.
struct ProjectedGaussian {
    Vec2 mean_px;
    double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;
    double depth = 0.0;  // camera-space z
    bool culled = false;
};

inline constexpr double kCovLowPassFloor = 0.3;  // px^2
inline constexpr double kAlphaClamp = 0.99;
inline constexpr double kTransmittanceFloor = 1e-4;
// Gaussian exponent below this adds < 1e-13 alpha; both raster paths skip it.
inline constexpr double kExponentCutoff = -30.0;
// Tiled binning keeps every contribution with alpha >= 1e-8, so tiled vs
// reference differ by at most n_splats * 1e-8 per pixel.
inline constexpr double kTileAlphaCutoff = 1e-8;
inline constexpr int kTileSize = 16;

ProjectedGaussian project_gaussian(const Camera& cam, const Gaussian3D& g);

enum class RasterMode { kReference, kTiled };

// Front-to-back alpha compositing, global depth sort (ties by input index).
// Reference path tests every splat per pixel; tiled path bins splats into
// 16x16 tiles by conservative screen-space radius. Deterministic for any
// thread count.
RenderTarget rasterize(std::span<const Gaussian3D> gaussians,
                       std::span<const Vec3> colors, const Camera& cam,
                       RasterMode mode = RasterMode::kTiled);

// Adjoint of rasterize with respect to splat colors (geometry and opacity
// fixed): returns dL/dcolor_k given dL/dC per pixel. grad_image must be 3
// channels at the camera resolution. Accumulation is tile-ordered, so the
// result is bit-identical for any thread count.
std::vector<Vec3> rasterize_backward_colors(std::span<const Gaussian3D> gaussians,
                                            std::span<const Vec3> colors,
                                            const Camera& cam,
                                            const Image& grad_image);

}  // namespace gprt
