#pragma once

#include <vector>

#include "gprt/lighting.hpp"
#include "gprt/math.hpp"
#include "gprt/sg.hpp"
#include "gprt/sh.hpp"

namespace gprt {

// Per-Gaussian radiance-transfer parameters. Diffuse SH transfer is split
// into per-channel coefficients for bands 0-1 (d_color) and a single
// monochrome set shared across channels for bands 2..n (d_mono).
struct TransferParams {
    Vec3 albedo{0.5, 0.5, 0.5};      // [0, 1] per channel
    std::vector<Vec3> d_color;       // bands 0-1, RGB per coefficient
    std::vector<double> d_mono;      // bands 2..n
    double roughness = 1.0;          // (0, 1]
    double visibility = 0.5;         // (0, 1)
    Vec3 normal_offset;

    static TransferParams zeros(int order);

    // SH order implied by the coefficient counts.
    int order() const;
    int coeff_count() const { return int(d_color.size() + d_mono.size()); }
    // Transfer coefficient i for a channel; monochrome bands ignore ch.
    double coeff(int i, int ch) const {
        return i < int(d_color.size()) ? d_color[i][ch] : d_mono[i - d_color.size()];
    }

    bool valid() const;
};

struct ShadingOptions {
    // Multiply visibility by (1 - max(0, dot(wo, n)))^5.
    bool schlick_visibility = false;
    // Replace the discrete SG sum with intensity(nearest light to the lobe
    // axis) * sg_solid_integral; useful for sharpness beyond what 512 lights
    // resolve.
    bool sg_nearest_light = false;
};

// normalize(base_normal + normal_offset)
Vec3 composed_normal(const TransferParams& params, const Vec3& base_normal);

// View-independent diffuse term: per channel, albedo * sum_i L_i * d_i.
// May be negative pre-clamp; clamping happens in shade_gaussian.
Vec3 shade_diffuse(const TransferParams& params, const SHCoeffs& light_sh);

// Mirror reflection of the outgoing direction about the normal.
Vec3 reflect_dir(const Vec3& wo, const Vec3& n);

// View-dependent specular term: v * integral of L * SG lobe about the
// reflection vector.
Vec3 shade_specular(const TransferParams& params, const Vec3& base_normal,
                    const Vec3& wo, const PointLightSet& lights,
                    const ShadingOptions& opts = {});

// Full per-Gaussian radiance: diffuse + specular, clamped to >= 0.
// `preclamp` receives the unclamped sum when non-null.
Vec3 shade_gaussian(const TransferParams& params, const Vec3& base_normal,
                    const Vec3& wo, const SHCoeffs& light_sh,
                    const PointLightSet& lights, const ShadingOptions& opts = {},
                    Vec3* preclamp = nullptr);

}  // namespace gprt
