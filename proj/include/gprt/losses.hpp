#pragma once

#include <span>

#include "gprt/image.hpp"
#include "gprt/math.hpp"
#include "gprt/splat.hpp"

namespace gprt {

struct LossWeights {
    double w_l1 = 0.8;
    double w_ssim = 0.2;
    double w_geom = 0.1;
    double w_scale_reg = 0.01;
    double w_negcolor = 0.01;
    double w_alpha = 1.0;

    bool valid() const {
        return w_l1 >= 0 && w_ssim >= 0 && w_geom >= 0 && w_scale_reg >= 0 &&
               w_negcolor >= 0 && w_alpha >= 0;
    }
};

// Mean absolute difference over masked pixels and channels. A null mask
// means all pixels; the mask is single-channel, nonzero = included.
double loss_l1(const Image& img, const Image& ref, const Image* mask = nullptr);
// Same, also writing dLoss/dimg.
double loss_l1_grad(const Image& img, const Image& ref, const Image* mask, Image& grad);

// 1 - mean local SSIM. 11x11 Gaussian window (sigma 1.5), k1 = 0.01,
// k2 = 0.03, dynamic range 1; windows fully inside the image; channels
// averaged. Images smaller than the window are an error.
double loss_ssim(const Image& img, const Image& ref);
double loss_ssim_grad(const Image& img, const Image& ref, Image& grad);

// Mean squared Euclidean distance between corresponding vertices.
double loss_geometry(std::span<const Vec3> pred, std::span<const Vec3> tracked);

// Mean absolute difference of coverage vs matte (single channel).
double loss_alpha(const Image& alpha, const Image& matte);

struct ScaleBounds {
    double s_min = 1e-4;
    double s_max = 1.0;
};

// Median nearest-neighbor distance between gaussian centers; the scale
// regularizer upper bound defaults to 10x this.
double median_nn_spacing(std::span<const Vec3> positions);

// w_scale * sum over axes of quadratic overshoot outside [s_min, s_max]
// plus w_negcolor * sum of squared negative pre-clamp color.
double reg_terms(std::span<const Gaussian3D> gaussians, std::span<const Vec3> preclamp,
                 const LossWeights& weights, const ScaleBounds& bounds);

// Adds d(reg)/d(preclamp color) into grad.
void reg_negcolor_grad(std::span<const Vec3> preclamp, double w_negcolor,
                       std::span<Vec3> grad);

}  // namespace gprt
