#pragma once

#include <cstdint>
#include <span>

#include "gprt/avatar.hpp"
#include "gprt/dataset.hpp"

namespace gprt {

// Deterministic toy relightable head: ellipsoid skull + neck tube + shoulder
// band guide mesh, n Gaussians anchored on it, ground-truth Lambertian
// diffuse transfer ((1/pi) clamped cosine about each surface normal) and
// seeded albedo/roughness/visibility. Faces +x; rest gaze is +x.
Avatar make_toy_head(int n_gaussians, std::uint64_t seed);

// Cameras on the front hemisphere looking at the head.
std::vector<Camera> default_cameras(int count, int resolution, double distance = 0.5);

// One frame per (light group, camera); single lights by default, groups of 5
// in five-light mode. The manifest light set uses `intensity` per channel.
OlatDataset make_olat_dataset(const Avatar& avatar, std::span<const Vec3> light_dirs,
                              std::span<const Camera> cameras, double intensity,
                              bool five_light_groups, std::uint64_t seed);

// Dense lat-long Riemann quadrature of the rendering integral with the exact
// (non-SH) transfer: Lambert albedo/pi plus a visibility-scaled SG lobe.
// Grid radiance is cached so many surface points can share one map.
class EnvQuadrature {
public:
    explicit EnvQuadrature(const EnvMap& env, int grid_h = 512, int grid_w = 1024);

    Vec3 shade(const Vec3& normal, const Vec3& albedo, double roughness,
               double visibility, const Vec3& wo) const;
    Vec3 integral() const;  // total incident flux

private:
    int grid_h_, grid_w_;
    std::vector<Vec3> dirs_;
    std::vector<Vec3> radiance_dw_;  // radiance * solid angle per cell
};

Vec3 quadrature_shade(const Vec3& normal, const Vec3& albedo, double roughness,
                      double visibility, const EnvMap& env, const Vec3& wo,
                      int grid_h = 512, int grid_w = 1024);

// Smooth random HDR environment: constant base plus a few SG lobes.
EnvMap make_random_envmap(std::uint64_t seed, int height = 64, int n_lobes = 3,
                          double max_sharpness = 6.0, double base = 0.2);

}  // namespace gprt
