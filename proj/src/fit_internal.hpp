#pragma once

#include <cmath>

namespace gprt::detail {

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    double e = std::exp(u);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Lower bound keeping sharpness = 1/sigma^2 within the SG lobe invariant.
inline constexpr double kSigmaMin = 1e-3;

inline double decode_sigma(double u) { return kSigmaMin + (1.0 - kSigmaMin) * sigmoid(u); }
inline double sigma_chain(double u) {
    double s = sigmoid(u);
    return (1.0 - kSigmaMin) * s * (1.0 - s);
}

}  // namespace gprt::detail
