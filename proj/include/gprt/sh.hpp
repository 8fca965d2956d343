#pragma once

#include <span>
#include <vector>

#include "gprt/math.hpp"

namespace gprt {

inline constexpr int kMaxShOrder = 8;

// Real orthonormal SH coefficients, band-major (band l, then m = -l..l).
// Multi-channel values are interleaved per coefficient: values[i*channels + ch].
struct SHCoeffs {
    int order = 0;
    int channels = 1;
    std::vector<double> values;

    static int coeff_count(int order) { return (order + 1) * (order + 1); }
    static SHCoeffs zeros(int order, int channels) {
        SHCoeffs c;
        c.order = order;
        c.channels = channels;
        c.values.assign(size_t(coeff_count(order)) * channels, 0.0);
        return c;
    }

    int count() const { return coeff_count(order); }
    double& at(int i, int ch = 0) { return values[size_t(i) * channels + ch]; }
    double at(int i, int ch = 0) const { return values[size_t(i) * channels + ch]; }
    Vec3 rgb(int i) const { return {at(i, 0), at(i, 1), at(i, 2)}; }

    bool valid() const;
};

// Linear index of (l, m) in band-major order.
inline int sh_index(int l, int m) { return l * (l + 1) + m; }

// Real orthonormal basis, graphics convention (no Condon-Shortley sign).
// `dir` must be unit length; order <= 8.
std::vector<double> eval_sh_basis(const Vec3& dir, int order);

// In-place variant writing (order+1)^2 values into `out`.
void eval_sh_basis(const Vec3& dir, int order, std::span<double> out);

// One quadrature sample of a spherical function: direction, value, solid-angle weight.
struct SphereSample {
    Vec3 dir;
    Vec3 value;      // scalar functions replicate into all lanes used
    double weight = 0.0;
};

// c_i = sum_s w_s * f(w_s) * Y_i(w_s). Weights must sum to 4*pi within 1%.
SHCoeffs project_sphere_fn(std::span<const SphereSample> samples, int order, int channels);

// SH projection of max(0, dot(normal, w)) about `normal`; order <= 4.
// Zonal expansion rotated via c_lm = sqrt(4pi/(2l+1)) * A_l * Y_lm(normal).
SHCoeffs clamped_cosine_coeffs(const Vec3& normal, int order);

// Analytic zonal coefficients A_l of max(0, cos(theta)), l = 0..4.
double clamped_cosine_zonal(int l);

}  // namespace gprt
