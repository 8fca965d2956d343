#include <algorithm>
#include <cmath>
#include <numeric>

#include "gprt/errors.hpp"
#include "gprt/parallel.hpp"
#include "gprt/splat.hpp"

namespace gprt {

namespace {

struct ScreenSplat {
    Vec2 mean;
    double conic_xx, conic_xy, conic_yy;  // inverse 2D covariance
    double opacity;
    Vec3 color;
    double radius;  // binning radius; alpha < kTileAlphaCutoff outside
    double depth;
    int source;
};

// Projects, culls, and depth-sorts (ties broken by input index).
std::vector<ScreenSplat> prepare_splats(std::span<const Gaussian3D> gaussians,
                                        std::span<const Vec3> colors,
                                        const Camera& cam) {
    if (colors.size() != gaussians.size())
        throw InvalidInput("rasterize: color count must match gaussian count");
    for (const Vec3& c : colors)
        if (!all_finite(c)) throw InvalidInput("rasterize: colors must be finite");

    std::vector<ScreenSplat> splats;
    splats.reserve(gaussians.size());
    for (size_t k = 0; k < gaussians.size(); ++k) {
        ProjectedGaussian proj = project_gaussian(cam, gaussians[k]);
        if (proj.culled) continue;
        double det = proj.cov_xx * proj.cov_yy - proj.cov_xy * proj.cov_xy;
        if (det <= 0.0) continue;  // cannot happen with the low-pass floor
        double inv_det = 1.0 / det;
        ScreenSplat s;
        s.mean = proj.mean_px;
        s.conic_xx = proj.cov_yy * inv_det;
        s.conic_xy = -proj.cov_xy * inv_det;
        s.conic_yy = proj.cov_xx * inv_det;
        s.opacity = gaussians[k].opacity;
        s.color = colors[k];
        s.depth = proj.depth;
        s.source = int(k);
        double lam_max = 0.5 * (proj.cov_xx + proj.cov_yy +
                                std::hypot(proj.cov_xx - proj.cov_yy, 2.0 * proj.cov_xy));
        double log_term = std::log(std::max(s.opacity, 1e-300) / kTileAlphaCutoff);
        s.radius = log_term > 0.0 ? std::sqrt(2.0 * lam_max * log_term) : 0.0;
        splats.push_back(s);
    }
    std::sort(splats.begin(), splats.end(), [](const ScreenSplat& a, const ScreenSplat& b) {
        return a.depth != b.depth ? a.depth < b.depth : a.source < b.source;
    });
    return splats;
}

inline double splat_alpha(const ScreenSplat& s, double px, double py) {
    double dx = px - s.mean.x;
    double dy = py - s.mean.y;
    double power = -0.5 * (s.conic_xx * dx * dx + s.conic_yy * dy * dy) - s.conic_xy * dx * dy;
    if (power < kExponentCutoff) return 0.0;
    return std::min(kAlphaClamp, s.opacity * std::exp(std::min(power, 0.0)));
}

// Tile lists hold indices into the sorted splat array, in sorted order.
struct TileGrid {
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::vector<int>> lists;
};

TileGrid build_tiles(const std::vector<ScreenSplat>& splats, int width, int height) {
    TileGrid grid;
    grid.tiles_x = (width + kTileSize - 1) / kTileSize;
    grid.tiles_y = (height + kTileSize - 1) / kTileSize;
    grid.lists.resize(size_t(grid.tiles_x) * grid.tiles_y);
    for (size_t i = 0; i < splats.size(); ++i) {
        const ScreenSplat& s = splats[i];
        if (s.radius <= 0.0) continue;
        int x0 = std::max(0, int(std::floor((s.mean.x - s.radius) / kTileSize)));
        int x1 = std::min(grid.tiles_x - 1, int(std::floor((s.mean.x + s.radius) / kTileSize)));
        int y0 = std::max(0, int(std::floor((s.mean.y - s.radius) / kTileSize)));
        int y1 = std::min(grid.tiles_y - 1, int(std::floor((s.mean.y + s.radius) / kTileSize)));
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx)
                grid.lists[size_t(ty) * grid.tiles_x + tx].push_back(int(i));
    }
    return grid;
}

template <typename SplatRange>
inline void composite_pixel(const std::vector<ScreenSplat>& splats, const SplatRange& range,
                            double px, double py, Vec3& out_color, double& out_alpha) {
    Vec3 acc;
    double transmittance = 1.0;
    for (int idx : range) {
        const ScreenSplat& s = splats[idx];
        double alpha = splat_alpha(s, px, py);
        if (alpha <= 0.0) continue;
        acc += s.color * (alpha * transmittance);
        transmittance *= 1.0 - alpha;
        if (transmittance < kTransmittanceFloor) break;
    }
    out_color = acc;
    out_alpha = 1.0 - transmittance;
}

struct IndexRange {
    int n;
    struct iterator {
        int i;
        int operator*() const { return i; }
        iterator& operator++() { ++i; return *this; }
        bool operator!=(const iterator& o) const { return i != o.i; }
    };
    iterator begin() const { return {0}; }
    iterator end() const { return {n}; }
};

}  // namespace

RenderTarget rasterize(std::span<const Gaussian3D> gaussians, std::span<const Vec3> colors,
                       const Camera& cam, RasterMode mode) {
    if (cam.width <= 0 || cam.height <= 0)
        throw InvalidInput("rasterize: target size must be positive");
    std::vector<ScreenSplat> splats = prepare_splats(gaussians, colors, cam);
    RenderTarget target(cam.width, cam.height);

    if (mode == RasterMode::kReference) {
        IndexRange all{int(splats.size())};
        parallel_for(0, cam.height, [&](std::int64_t y0, std::int64_t y1) {
            for (std::int64_t y = y0; y < y1; ++y) {
                for (int x = 0; x < cam.width; ++x) {
                    Vec3 c;
                    double a;
                    composite_pixel(splats, all, x + 0.5, y + 0.5, c, a);
                    target.color.set_rgb(x, int(y), c);
                    target.alpha.at(x, int(y), 0) = a;
                }
            }
        });
        return target;
    }

    TileGrid grid = build_tiles(splats, cam.width, cam.height);
    parallel_for(0, std::int64_t(grid.lists.size()), [&](std::int64_t t0, std::int64_t t1) {
        for (std::int64_t t = t0; t < t1; ++t) {
            const auto& list = grid.lists[t];
            int tx = int(t) % grid.tiles_x, ty = int(t) / grid.tiles_x;
            int x_end = std::min(cam.width, (tx + 1) * kTileSize);
            int y_end = std::min(cam.height, (ty + 1) * kTileSize);
            for (int y = ty * kTileSize; y < y_end; ++y) {
                for (int x = tx * kTileSize; x < x_end; ++x) {
                    Vec3 c;
                    double a;
                    composite_pixel(splats, list, x + 0.5, y + 0.5, c, a);
                    target.color.set_rgb(x, y, c);
                    target.alpha.at(x, y, 0) = a;
                }
            }
        }
    });
    return target;
}

std::vector<Vec3> rasterize_backward_colors(std::span<const Gaussian3D> gaussians,
                                            std::span<const Vec3> colors, const Camera& cam,
                                            const Image& grad_image) {
    if (cam.width <= 0 || cam.height <= 0)
        throw InvalidInput("rasterize_backward_colors: target size must be positive");
    if (grad_image.width != cam.width || grad_image.height != cam.height ||
        grad_image.channels != 3)
        throw InvalidInput("rasterize_backward_colors: gradient image shape mismatch");

    std::vector<ScreenSplat> splats = prepare_splats(gaussians, colors, cam);
    TileGrid grid = build_tiles(splats, cam.width, cam.height);

    // dC_px/dcolor_k = alpha_k * T_k at that pixel; replay the forward walk
    // per tile, then merge per-tile sums in tile order so the reduction is
    // independent of the thread count.
    std::vector<std::vector<Vec3>> tile_grads(grid.lists.size());
    parallel_for(0, std::int64_t(grid.lists.size()), [&](std::int64_t t0, std::int64_t t1) {
        for (std::int64_t t = t0; t < t1; ++t) {
            const auto& list = grid.lists[t];
            if (list.empty()) continue;
            auto& local = tile_grads[t];
            local.assign(list.size(), Vec3{});
            int tx = int(t) % grid.tiles_x, ty = int(t) / grid.tiles_x;
            int x_end = std::min(cam.width, (tx + 1) * kTileSize);
            int y_end = std::min(cam.height, (ty + 1) * kTileSize);
            for (int y = ty * kTileSize; y < y_end; ++y) {
                for (int x = tx * kTileSize; x < x_end; ++x) {
                    Vec3 upstream = grad_image.rgb(x, y);
                    double transmittance = 1.0;
                    for (size_t j = 0; j < list.size(); ++j) {
                        const ScreenSplat& s = splats[list[j]];
                        double alpha = splat_alpha(s, x + 0.5, y + 0.5);
                        if (alpha <= 0.0) continue;
                        local[j] += upstream * (alpha * transmittance);
                        transmittance *= 1.0 - alpha;
                        if (transmittance < kTransmittanceFloor) break;
                    }
                }
            }
        }
    });

    std::vector<Vec3> grads(gaussians.size());
    for (size_t t = 0; t < grid.lists.size(); ++t) {
        const auto& list = grid.lists[t];
        for (size_t j = 0; j < list.size(); ++j)
            grads[splats[list[j]].source] += tile_grads[t][j];
    }
    return grads;
}

}  // namespace gprt
