#pragma once

#include <filesystem>
#include <vector>

#include "gprt/math.hpp"
#include "gprt/sh.hpp"

namespace gprt {

// Lat-long (equirectangular) radiance map. Row 0 is the north pole (+z);
// pixel (x, y) sees theta = pi*(y+0.5)/h, phi = 2*pi*(x+0.5)/w,
// dir = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)).
struct EnvMap {
    int width = 0, height = 0;
    std::vector<Vec3> texels;

    static EnvMap constant(int height, const Vec3& radiance);

    Vec3& at(int x, int y) { return texels[size_t(y) * width + x]; }
    const Vec3& at(int x, int y) const { return texels[size_t(y) * width + x]; }

    Vec3 texel_direction(int x, int y) const;
    double texel_solid_angle(int y) const;  // sin(theta_center) * dtheta * dphi
    // Bilinear sample in the direction `dir` (unit).
    Vec3 sample(const Vec3& dir) const;
    // Riemann total flux, sum of texel * solid angle.
    Vec3 total_flux() const;

    bool valid() const;
};

// N distant point lights. Directions are pairwise-distinct unit vectors;
// each light owns solid angle 4*pi/N.
struct PointLightSet {
    std::vector<Vec3> directions;
    std::vector<Vec3> intensities;

    size_t size() const { return directions.size(); }
    double solid_angle() const { return kFourPi / double(directions.size()); }

    bool valid() const;
};

// Spherical Fibonacci lattice; deterministic for fixed n.
std::vector<Vec3> fibonacci_directions(int n);

// Uniform lattice lights sampling the map bilinearly.
PointLightSet envmap_to_pointlights(const EnvMap& env, int n);

// c_i = sum_k intensity_k * Y_i(dir_k) * (4*pi/N), 3 channels.
SHCoeffs pointlights_to_sh(const PointLightSet& lights, int order);

// Environment-map file IO. Format chosen by extension: .hdr (Radiance RGBE)
// or .pfm (little-endian float). Both decode to linear RGB.
EnvMap load_envmap(const std::filesystem::path& path);
void save_envmap(const EnvMap& env, const std::filesystem::path& path);

}  // namespace gprt
