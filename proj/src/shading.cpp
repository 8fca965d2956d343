#include "gprt/shading.hpp"

#include <cmath>

#include "gprt/errors.hpp"

namespace gprt {

TransferParams TransferParams::zeros(int order) {
    TransferParams p;
    int n = SHCoeffs::coeff_count(order);
    p.d_color.assign(std::min(n, 4), Vec3{});
    p.d_mono.assign(std::max(0, n - 4), 0.0);
    return p;
}

int TransferParams::order() const {
    int n = coeff_count();
    int order = int(std::lround(std::sqrt(double(n)))) - 1;
    if (SHCoeffs::coeff_count(order) != n)
        throw InvalidInput("TransferParams: coefficient count is not a full SH order");
    return order;
}

bool TransferParams::valid() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(in01(albedo.x) && in01(albedo.y) && in01(albedo.z))) return false;
    if (!(roughness > 0.0 && roughness <= 1.0)) return false;
    if (!(visibility > 0.0 && visibility < 1.0)) return false;
    if (!all_finite(normal_offset)) return false;
    if (d_color.size() > 4) return false;
    for (const Vec3& v : d_color)
        if (!all_finite(v)) return false;
    for (double v : d_mono)
        if (!std::isfinite(v)) return false;
    int n = coeff_count();
    int order = int(std::lround(std::sqrt(double(n)))) - 1;
    return SHCoeffs::coeff_count(order) == n &&
           int(d_color.size()) == std::min(n, 4);
}

Vec3 composed_normal(const TransferParams& params, const Vec3& base_normal) {
    return normalize(base_normal + params.normal_offset);
}

Vec3 shade_diffuse(const TransferParams& params, const SHCoeffs& light_sh) {
    if (light_sh.channels != 3)
        throw InvalidInput("shade_diffuse: light SH must have 3 channels");
    const int n = params.coeff_count();
    if (light_sh.count() < n)
        throw InvalidInput("shade_diffuse: light SH order below transfer order");
    Vec3 out;
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < 3; ++ch)
            out[ch] += light_sh.at(i, ch) * params.coeff(i, ch);
    return params.albedo * out;
}

Vec3 reflect_dir(const Vec3& wo, const Vec3& n) {
    if (!is_unit(wo) || !is_unit(n))
        throw InvalidInput("reflect_dir: inputs must be unit length");
    return n * (2.0 * dot(wo, n)) - wo;
}

namespace {

double effective_visibility(const TransferParams& params, const Vec3& n, const Vec3& wo,
                            const ShadingOptions& opts) {
    double v = params.visibility;
    if (opts.schlick_visibility) {
        double f = 1.0 - std::max(0.0, dot(wo, n));
        v *= f * f * f * f * f;
    }
    return v;
}

}  // namespace

Vec3 shade_specular(const TransferParams& params, const Vec3& base_normal, const Vec3& wo,
                    const PointLightSet& lights, const ShadingOptions& opts) {
    if (!is_unit(wo)) throw InvalidInput("shade_specular: view direction must be unit length");
    Vec3 n = composed_normal(params, base_normal);
    SGLobe lobe{reflect_dir(wo, n), roughness_to_sharpness(params.roughness)};
    double v = effective_visibility(params, n, wo, opts);
    if (opts.sg_nearest_light) {
        size_t best = 0;
        double best_dot = -2.0;
        for (size_t i = 0; i < lights.size(); ++i) {
            double d = dot(lights.directions[i], lobe.axis);
            if (d > best_dot) {
                best_dot = d;
                best = i;
            }
        }
        return lights.intensities[best] * (v * sg_solid_integral(lobe));
    }
    return sg_env_integral(lights, lobe) * v;
}

Vec3 shade_gaussian(const TransferParams& params, const Vec3& base_normal, const Vec3& wo,
                    const SHCoeffs& light_sh, const PointLightSet& lights,
                    const ShadingOptions& opts, Vec3* preclamp) {
    Vec3 sum = shade_diffuse(params, light_sh) +
               shade_specular(params, base_normal, wo, lights, opts);
    if (preclamp) *preclamp = sum;
    return cwise_max(sum, 0.0);
}

}  // namespace gprt
