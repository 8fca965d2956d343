#pragma once

#include <filesystem>

#include "gprt/math.hpp"

namespace gprt {

// Pinhole camera. Extrinsics map world to camera space: x_cam = rot * x + trans,
// camera looks down +z. Pixel (i, j) covers [i, i+1) x [j, j+1); its center is
// (i + 0.5, j + 0.5) in projection coordinates.
struct Camera {
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    Mat3 rot = Mat3::identity();
    Vec3 trans;
    double near_plane = 0.01, far_plane = 1e9;

    Vec3 position() const { return rot.transposed() * (trans * -1.0); }
    Vec3 world_to_cam(const Vec3& p) const { return rot * p + trans; }

    static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                          double focal_px, int width, int height);

    bool valid() const {
        return fx > 0 && fy > 0 && width > 0 && height > 0 && near_plane < far_plane;
    }
};

// JSON with fields fx, fy, cx, cy, width, height, world_to_cam (4x4 row-major),
// near, far.
Camera load_camera(const std::filesystem::path& path);
void save_camera(const Camera& cam, const std::filesystem::path& path);

}  // namespace gprt
