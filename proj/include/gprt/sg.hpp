#pragma once

#include "gprt/math.hpp"

namespace gprt {

struct PointLightSet;

// Spherical Gaussian lobe exp(sharpness * (dot(w, axis) - 1)).
struct SGLobe {
    Vec3 axis{0.0, 0.0, 1.0};
    double sharpness = 1.0;

    bool valid() const;
};

// sharpness = 1 / roughness^2; roughness in (0, 1].
double roughness_to_sharpness(double roughness);

double sg_eval(const Vec3& w, const SGLobe& lobe);

// Integral of the lobe over the sphere: (2*pi/lambda) * (1 - exp(-2*lambda)).
double sg_solid_integral(const SGLobe& lobe);

// Discrete sum over a point-light set: sum_i intensity_i * G(dir_i) * (4*pi/N).
Vec3 sg_env_integral(const PointLightSet& lights, const SGLobe& lobe);

}  // namespace gprt
