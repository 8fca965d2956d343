#include "gprt/sh.hpp"

#include <cmath>

#include "gprt/errors.hpp"

namespace gprt {

bool SHCoeffs::valid() const {
    if (order < 0 || (channels != 1 && channels != 3)) return false;
    if (values.size() != size_t(coeff_count(order)) * channels) return false;
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// K_l^m = sqrt((2l+1)/(4pi) * (l-m)!/(l+m)!)
double sh_norm(int l, int m) {
    return std::sqrt((2.0 * l + 1.0) / kFourPi * factorial(l - m) / factorial(l + m));
}

}  // namespace

void eval_sh_basis(const Vec3& dir, int order, std::span<double> out) {
    if (order < 0 || order > kMaxShOrder)
        throw UnsupportedOrder("eval_sh_basis: order must be in [0, 8]");
    if (!is_unit(dir))
        throw InvalidInput("eval_sh_basis: direction must be unit length");
    const int n_coeffs = SHCoeffs::coeff_count(order);
    if (out.size() < size_t(n_coeffs))
        throw InvalidInput("eval_sh_basis: output span too small");

    const double x = dir.x, y = dir.y, z = dir.z;

    // P~_l^m(z) = P_l^m / sin(theta)^m, no Condon-Shortley sign; the sin^m
    // factor is folded into the cos/sin(m*phi) recurrences below.
    double p[kMaxShOrder + 1][kMaxShOrder + 1];
    for (int m = 0; m <= order; ++m) {
        p[m][m] = 1.0;
        for (int i = 1; i <= m; ++i) p[m][m] *= 2.0 * i - 1.0;  // (2m-1)!!
        if (m + 1 <= order) p[m + 1][m] = z * (2.0 * m + 1.0) * p[m][m];
        for (int l = m + 2; l <= order; ++l)
            p[l][m] = ((2.0 * l - 1.0) * z * p[l - 1][m] - (l + m - 1.0) * p[l - 2][m]) / (l - m);
    }

    // C_m = sin^m(theta) cos(m*phi), S_m analogous; C_1 = x, S_1 = y.
    double c_prev = 1.0, s_prev = 0.0;
    static constexpr double kSqrt2 = 1.4142135623730951;

    for (int l = 0; l <= order; ++l) out[sh_index(l, 0)] = sh_norm(l, 0) * p[l][0];
    for (int m = 1; m <= order; ++m) {
        double c_m = x * c_prev - y * s_prev;
        double s_m = x * s_prev + y * c_prev;
        for (int l = m; l <= order; ++l) {
            double k = kSqrt2 * sh_norm(l, m) * p[l][m];
            out[sh_index(l, m)] = k * c_m;
            out[sh_index(l, -m)] = k * s_m;
        }
        c_prev = c_m;
        s_prev = s_m;
    }
}

std::vector<double> eval_sh_basis(const Vec3& dir, int order) {
    std::vector<double> out(SHCoeffs::coeff_count(order));
    eval_sh_basis(dir, order, out);
    return out;
}

SHCoeffs project_sphere_fn(std::span<const SphereSample> samples, int order, int channels) {
    if (samples.empty()) throw InvalidInput("project_sphere_fn: empty sample list");
    if (channels != 1 && channels != 3)
        throw InvalidInput("project_sphere_fn: channels must be 1 or 3");
    double weight_sum = 0.0;
    for (const auto& s : samples) weight_sum += s.weight;
    if (std::abs(weight_sum - kFourPi) > 0.01 * kFourPi)
        throw InvalidInput("project_sphere_fn: weights must sum to 4*pi within 1%");

    SHCoeffs out = SHCoeffs::zeros(order, channels);
    std::vector<double> basis(SHCoeffs::coeff_count(order));
    for (const auto& s : samples) {
        eval_sh_basis(s.dir, order, basis);
        for (int i = 0; i < out.count(); ++i) {
            double wy = s.weight * basis[i];
            for (int ch = 0; ch < channels; ++ch) out.at(i, ch) += wy * s.value[ch];
        }
    }
    return out;
}

double clamped_cosine_zonal(int l) {
    // A_l = 2*pi * K_l^0 * int_0^1 z P_l(z) dz, zero for odd l > 1.
    static const double kSqrtPi = std::sqrt(kPi);
    switch (l) {
        case 0: return 0.5 * kSqrtPi;
        case 1: return std::sqrt(kPi / 3.0);
        case 2: return std::sqrt(5.0 * kPi) / 8.0;
        case 3: return 0.0;
        case 4: return -kSqrtPi / 16.0;
        default: throw UnsupportedOrder("clamped_cosine_zonal: l must be in [0, 4]");
    }
}

SHCoeffs clamped_cosine_coeffs(const Vec3& normal, int order) {
    if (order < 0 || order > 4)
        throw UnsupportedOrder("clamped_cosine_coeffs: order must be in [0, 4]");
    if (!is_unit(normal))
        throw InvalidInput("clamped_cosine_coeffs: normal must be unit length");

    std::vector<double> basis = eval_sh_basis(normal, order);
    SHCoeffs out = SHCoeffs::zeros(order, 1);
    for (int l = 0; l <= order; ++l) {
        double scale = std::sqrt(kFourPi / (2.0 * l + 1.0)) * clamped_cosine_zonal(l);
        for (int m = -l; m <= l; ++m) {
            int i = sh_index(l, m);
            out.at(i) = scale * basis[i];
        }
    }
    return out;
}

}  // namespace gprt
