#include "gprt/sg.hpp"

#include <cmath>

#include "gprt/errors.hpp"
#include "gprt/lighting.hpp"

namespace gprt {

bool SGLobe::valid() const {
    return is_unit(axis) && sharpness > 0.0 && sharpness <= 1e6;
}

double roughness_to_sharpness(double roughness) {
    if (!(roughness > 0.0) || roughness > 1.0)
        throw InvalidInput("roughness_to_sharpness: roughness must be in (0, 1]");
    return 1.0 / (roughness * roughness);
}

double sg_eval(const Vec3& w, const SGLobe& lobe) {
    if (!lobe.valid()) throw InvalidInput("sg_eval: invalid lobe");
    if (!is_unit(w)) throw InvalidInput("sg_eval: direction must be unit length");
    return std::exp(lobe.sharpness * (dot(w, lobe.axis) - 1.0));
}

double sg_solid_integral(const SGLobe& lobe) {
    if (!lobe.valid()) throw InvalidInput("sg_solid_integral: invalid lobe");
    return kTwoPi / lobe.sharpness * (1.0 - std::exp(-2.0 * lobe.sharpness));
}

Vec3 sg_env_integral(const PointLightSet& lights, const SGLobe& lobe) {
    if (lights.directions.empty()) throw InvalidInput("sg_env_integral: empty light set");
    if (!lobe.valid()) throw InvalidInput("sg_env_integral: invalid lobe");
    const double dw = lights.solid_angle();
    Vec3 acc;
    for (size_t i = 0; i < lights.size(); ++i) {
        double g = std::exp(lobe.sharpness * (dot(lights.directions[i], lobe.axis) - 1.0));
        acc += lights.intensities[i] * (g * dw);
    }
    return acc;
}

}  // namespace gprt
