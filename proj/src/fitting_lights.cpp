#include <cmath>

#include "gprt/errors.hpp"
#include "gprt/fitting.hpp"
#include "gprt/parallel.hpp"

namespace gprt {

void Adam::step(std::span<const double> grad, std::span<double> params) {
    if (grad.size() != m_.size() || params.size() != m_.size())
        throw InvalidInput("Adam::step: size mismatch");
    ++t_;
    double c1 = 1.0 - std::pow(b1_, t_);
    double c2 = 1.0 - std::pow(b2_, t_);
    for (size_t i = 0; i < m_.size(); ++i) {
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

LightProblem::LightProblem(const Avatar& avatar, const RigPose& pose,
                           std::span<const FitView> views, int n_lights,
                           const ShadingOptions& opts)
    : sh_order_(avatar.sh_order), avatar_(&avatar) {
    if (!avatar.valid()) throw InvalidInput("LightProblem: invalid avatar");
    if (views.empty()) throw InvalidInput("LightProblem: need at least one view");
    directions_ = fibonacci_directions(n_lights);

    const int nc = SHCoeffs::coeff_count(sh_order_);
    lattice_sh_.resize(size_t(n_lights) * nc);
    for (int i = 0; i < n_lights; ++i)
        eval_sh_basis(directions_[i], sh_order_,
                      std::span<double>(lattice_sh_.data() + size_t(i) * nc, nc));

    PosedAvatar posed = pose_avatar(avatar, pose);
    const double dw = kFourPi / n_lights;
    for (const FitView& view : views) {
        if (view.target.channels != 3 || view.target.width != view.cam.width ||
            view.target.height != view.cam.height)
            throw InvalidInput("LightProblem: target must be RGB at camera resolution");
        ViewData data;
        data.view = &view;
        data.gaussians = posed.gaussians;
        data.albedo.resize(avatar.size());
        data.spec_basis.resize(avatar.size() * size_t(n_lights));
        const Vec3 eye = view.cam.position();
        parallel_for(0, std::int64_t(avatar.size()), [&](std::int64_t k0, std::int64_t k1) {
            for (std::int64_t k = k0; k < k1; ++k) {
                const TransferParams& t = avatar.transfer[k];
                data.albedo[k] = t.albedo;
                Vec3 wo = normalize(eye - posed.gaussians[k].position);
                Vec3 n = composed_normal(t, posed.normals[k]);
                Vec3 axis = reflect_dir(wo, n);
                double lam = roughness_to_sharpness(t.roughness);
                double v = t.visibility;
                if (opts.schlick_visibility) {
                    double f = 1.0 - std::max(0.0, dot(wo, n));
                    v *= f * f * f * f * f;
                }
                for (int i = 0; i < n_lights; ++i) {
                    double g = std::exp(lam * (dot(directions_[i], axis) - 1.0));
                    data.spec_basis[size_t(k) * n_lights + i] = v * g * dw;
                }
            }
        });
        views_.push_back(std::move(data));
    }
}

std::vector<double> LightProblem::initial_params(double intensity) const {
    return std::vector<double>(param_count(), intensity);
}

PointLightSet LightProblem::decode(std::span<const double> intensities) const {
    if (intensities.size() != param_count())
        throw InvalidInput("LightProblem::decode: size mismatch");
    PointLightSet lights;
    lights.directions = directions_;
    lights.intensities.resize(directions_.size());
    for (size_t i = 0; i < directions_.size(); ++i)
        lights.intensities[i] = {intensities[i * 3], intensities[i * 3 + 1],
                                 intensities[i * 3 + 2]};
    return lights;
}

double LightProblem::eval(std::span<const double> intensities, std::span<double> grad) const {
    if (intensities.size() != param_count())
        throw InvalidInput("LightProblem::eval: parameter size mismatch");
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != param_count())
        throw InvalidInput("LightProblem::eval: gradient size mismatch");
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    const int n_lights = int(directions_.size());
    const int nc = SHCoeffs::coeff_count(sh_order_);
    const double dw = kFourPi / n_lights;
    const size_t n_gaussians = avatar_->size();

    // L_sh[j][ch] = sum_i I[i][ch] * Y_j(w_i) * dw
    SHCoeffs light_sh = SHCoeffs::zeros(sh_order_, 3);
    for (int i = 0; i < n_lights; ++i)
        for (int j = 0; j < nc; ++j) {
            double y = lattice_sh_[size_t(i) * nc + j] * dw;
            for (int ch = 0; ch < 3; ++ch)
                light_sh.at(j, ch) += intensities[size_t(i) * 3 + ch] * y;
        }

    double total = 0.0;
    const double view_scale = 1.0 / double(views_.size());
    std::vector<Vec3> preclamp(n_gaussians), colors(n_gaussians);

    for (const ViewData& vd : views_) {
        parallel_for(0, std::int64_t(n_gaussians), [&](std::int64_t k0, std::int64_t k1) {
            for (std::int64_t k = k0; k < k1; ++k) {
                const TransferParams& t = avatar_->transfer[k];
                Vec3 c;
                for (int j = 0; j < nc; ++j)
                    for (int ch = 0; ch < 3; ++ch)
                        c[ch] += light_sh.at(j, ch) * t.coeff(j, ch);
                c = t.albedo * c;
                const double* basis = &vd.spec_basis[size_t(k) * n_lights];
                Vec3 s;
                for (int i = 0; i < n_lights; ++i) {
                    double b = basis[i];
                    s.x += intensities[size_t(i) * 3] * b;
                    s.y += intensities[size_t(i) * 3 + 1] * b;
                    s.z += intensities[size_t(i) * 3 + 2] * b;
                }
                preclamp[k] = c + s;
                colors[k] = cwise_max(preclamp[k], 0.0);
            }
        });

        RenderTarget rt = rasterize(vd.gaussians, colors, vd.view->cam, RasterMode::kTiled);
        if (!want_grad) {
            total += view_scale * loss_l1(rt.color, vd.view->target, vd.view->mask_ptr());
            continue;
        }
        Image dldc_img;
        total += view_scale *
                 loss_l1_grad(rt.color, vd.view->target, vd.view->mask_ptr(), dldc_img);
        for (double& v : dldc_img.data) v *= view_scale;
        std::vector<Vec3> q =
            rasterize_backward_colors(vd.gaussians, colors, vd.view->cam, dldc_img);
        for (size_t k = 0; k < n_gaussians; ++k)
            for (int ch = 0; ch < 3; ++ch)
                if (preclamp[k][ch] <= 0.0) q[k][ch] = 0.0;

        // diffuse adjoint through the SH projection of the lattice
        SHCoeffs g_sh = SHCoeffs::zeros(sh_order_, 3);
        for (size_t k = 0; k < n_gaussians; ++k) {
            const TransferParams& t = avatar_->transfer[k];
            for (int j = 0; j < nc; ++j)
                for (int ch = 0; ch < 3; ++ch)
                    g_sh.at(j, ch) += q[k][ch] * t.albedo[ch] * t.coeff(j, ch);
        }
        parallel_for(0, n_lights, [&](std::int64_t i0, std::int64_t i1) {
            for (std::int64_t i = i0; i < i1; ++i) {
                Vec3 gi;
                for (int j = 0; j < nc; ++j) {
                    double y = lattice_sh_[size_t(i) * nc + j] * dw;
                    gi.x += g_sh.at(j, 0) * y;
                    gi.y += g_sh.at(j, 1) * y;
                    gi.z += g_sh.at(j, 2) * y;
                }
                for (size_t k = 0; k < n_gaussians; ++k) {
                    double b = vd.spec_basis[size_t(k) * n_lights + i];
                    gi += q[k] * b;
                }
                grad[size_t(i) * 3] += gi.x;
                grad[size_t(i) * 3 + 1] += gi.y;
                grad[size_t(i) * 3 + 2] += gi.z;
            }
        });
    }
    return total;
}

LightFitResult fit_lights(const Avatar& avatar, const RigPose& pose,
                          std::span<const FitView> views, int n_lights,
                          const FitConfig& config) {
    if (!config.valid()) throw InvalidInput("fit_lights: invalid config");
    LightProblem problem(avatar, pose, views, n_lights, {});

    std::vector<double> params = problem.initial_params(config.light_init);
    std::vector<double> grad(params.size());
    Adam adam(params.size(), config);

    LightFitResult result;
    result.report.seed = config.seed;
    result.report.iterations = config.iterations;
    result.report.loss_history.reserve(config.iterations);

    for (int it = 0; it < config.iterations; ++it) {
        double loss = problem.eval(params, grad);
        if (!std::isfinite(loss))
            throw Divergence("fit_lights: non-finite loss at iteration " + std::to_string(it));
        result.report.loss_history.push_back(loss);
        adam.step(grad, params);
        if (config.project_nonneg)
            for (double& p : params) p = std::max(0.0, p);
    }
    result.report.initial_loss =
        result.report.loss_history.empty() ? problem.eval(params, {})
                                           : result.report.loss_history.front();
    result.report.final_loss = problem.eval(params, {});
    result.lights = problem.decode(params);
    return result;
}

}  // namespace gprt
