#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gprt/avatar.hpp"
#include "gprt/dataset.hpp"
#include "gprt/losses.hpp"

namespace gprt {

struct FitConfig {
    double learning_rate = 0.01;
    int iterations = 3000;
    std::uint64_t seed = 1;
    double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    bool project_nonneg = true;   // clamp light intensities at 0 each step
    bool deterministic = true;    // fixed-order reductions (CI default)
    int batch_size = 8;           // frames per transfer step
    double light_init = 0.5;      // uniform initial light intensity

    bool valid() const {
        return learning_rate > 0.0 && iterations >= 0 && batch_size >= 1 &&
               beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 &&
               epsilon > 0.0 && light_init >= 0.0;
    }
};

class Adam {
public:
    Adam(size_t n, const FitConfig& cfg)
        : lr_(cfg.learning_rate), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.epsilon),
          m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<const double> grad, std::span<double> params);

private:
    double lr_, b1_, b2_, eps_;
    int t_ = 0;
    std::vector<double> m_, v_;
};

struct FitReport {
    std::vector<double> loss_history;  // objective at the start of each step
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    bool ill_posed = false;  // transfer fit saw a single lighting condition
};

// One observation for light fitting: the avatar seen from `cam` under the
// unknown illumination.
struct FitView {
    Camera cam;
    Image target;
    Image mask;  // single channel; empty = all pixels

    const Image* mask_ptr() const { return mask.width > 0 ? &mask : nullptr; }
};

// Masked-L1 objective in the light intensities, with the avatar frozen.
// Shading is linear in the intensities, so the per-view specular basis and
// the SH projection of the lattice are precomputed once.
class LightProblem {
public:
    LightProblem(const Avatar& avatar, const RigPose& pose, std::span<const FitView> views,
                 int n_lights, const ShadingOptions& opts = {});

    size_t param_count() const { return 3 * directions_.size(); }
    std::vector<double> initial_params(double intensity) const;
    // Objective (mean over views); fills dLoss/dintensity when grad nonempty.
    double eval(std::span<const double> intensities, std::span<double> grad) const;
    PointLightSet decode(std::span<const double> intensities) const;

private:
    struct ViewData {
        const FitView* view;
        std::vector<Gaussian3D> gaussians;
        std::vector<Vec3> albedo;
        std::vector<double> spec_basis;  // K x N: v_k * G_k(w_i) * dw
    };

    int sh_order_;
    std::vector<Vec3> directions_;
    std::vector<double> lattice_sh_;  // N x coeff_count basis table
    std::vector<ViewData> views_;
    const Avatar* avatar_;
};

struct LightFitResult {
    PointLightSet lights;
    FitReport report;
};

// Environment-light intensity fitting against rendered targets; Adam with
// projection to >= 0 each step. Deterministic for a fixed seed.
LightFitResult fit_lights(const Avatar& avatar, const RigPose& pose,
                          std::span<const FitView> views, int n_lights,
                          const FitConfig& config);

// Per-Gaussian transfer fitting from frames with known lights. Optimizes
// albedo, d_color, d_mono, roughness and visibility (albedo/visibility via
// logistic, roughness via scaled logistic into (0, 1]); geometry, opacity
// and anchors stay frozen.
class TransferProblem {
public:
    struct ParamLayout {
        size_t albedo = 0;   // 3 logits
        size_t d_color = 3;  // dc x 3 raw
        size_t d_mono = 0;   // dm raw
        size_t sigma = 0;    // 1 logit
        size_t vis = 0;      // 1 logit
        size_t per_gaussian = 0;
        int dc = 0, dm = 0;
    };

    TransferProblem(const Avatar& base, const OlatDataset& data, const LossWeights& weights,
                    const ShadingOptions& opts = {});

    ParamLayout layout() const { return layout_; }
    size_t param_count() const { return layout_.per_gaussian * base_->size(); }
    std::vector<double> initial_params() const;
    // Objective over the given frame subset (mean) plus regularizers.
    double eval(std::span<const double> params, std::span<double> grad,
                std::span<const int> frames) const;
    std::vector<TransferParams> decode(std::span<const double> params) const;

private:
    const Avatar* base_;
    const OlatDataset* data_;
    LossWeights weights_;
    ScaleBounds bounds_;
    ParamLayout layout_;
    std::vector<SHCoeffs> frame_sh_;            // per frame light SH
    std::vector<std::vector<Vec3>> cam_wo_;     // per camera, per gaussian
    double scale_reg_ = 0.0;                    // constant: geometry is frozen
};

struct TransferFitResult {
    std::vector<TransferParams> transfer;
    FitReport report;
};

TransferFitResult fit_transfer(const Avatar& base, const OlatDataset& data,
                               const FitConfig& config, const LossWeights& weights);

}  // namespace gprt
