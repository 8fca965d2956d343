#pragma once

#include <filesystem>
#include <vector>

#include "gprt/math.hpp"

namespace gprt {

// Row-major, channel-interleaved image. Linear radiance unless stated.
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c) {
        data.assign(size_t(w) * h * c, 0.0);
    }

    double& at(int x, int y, int c) {
        return data[(size_t(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(size_t(y) * width + x) * channels + c];
    }
    Vec3 rgb(int x, int y) const {
        size_t i = (size_t(y) * width + x) * channels;
        return {data[i], data[i + 1], data[i + 2]};
    }
    void set_rgb(int x, int y, const Vec3& v) {
        size_t i = (size_t(y) * width + x) * channels;
        data[i] = v.x; data[i + 1] = v.y; data[i + 2] = v.z;
    }
    size_t pixel_count() const { return size_t(width) * height; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Rasterizer output: linear RGB radiance plus coverage (1 - final transmittance).
struct RenderTarget {
    Image color;  // 3 channels
    Image alpha;  // 1 channel

    RenderTarget() = default;
    RenderTarget(int w, int h) : color(w, h, 3), alpha(w, h, 1) {}
};

// PFM (little-endian float32); 1 or 3 channels. Scale header is -1.0.
Image load_pfm(const std::filesystem::path& path);
void save_pfm(const Image& img, const std::filesystem::path& path);

// 8-bit PNG, gamma 2.2 encode of radiance clamped to [0, 1].
// 3-channel input writes RGB; with `alpha` given, RGBA (alpha stored linearly).
void save_png(const Image& img, const std::filesystem::path& path,
              const Image* alpha = nullptr);

double psnr(const Image& a, const Image& b);

}  // namespace gprt
