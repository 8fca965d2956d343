#include <cmath>
#include <set>

#include "fit_internal.hpp"
#include "gprt/errors.hpp"
#include "gprt/fitting.hpp"
#include "gprt/parallel.hpp"

namespace gprt {

using detail::decode_sigma;
using detail::logit;
using detail::sigma_chain;
using detail::sigmoid;

TransferProblem::TransferProblem(const Avatar& base, const OlatDataset& data,
                                 const LossWeights& weights, const ShadingOptions& opts)
    : base_(&base), data_(&data), weights_(weights) {
    if (!base.valid()) throw InvalidInput("TransferProblem: invalid avatar");
    if (!data.valid()) throw InvalidInput("TransferProblem: invalid dataset");
    for (const OlatFrame& f : data.frames)
        if (!f.has_lights())
            throw InvalidInput("TransferProblem: every frame needs a known light set");

    const int nc = SHCoeffs::coeff_count(base.sh_order);
    layout_.dc = std::min(nc, 4);
    layout_.dm = std::max(0, nc - 4);
    layout_.albedo = 0;
    layout_.d_color = 3;
    layout_.d_mono = layout_.d_color + size_t(layout_.dc) * 3;
    layout_.sigma = layout_.d_mono + size_t(layout_.dm);
    layout_.vis = layout_.sigma + 1;
    layout_.per_gaussian = layout_.vis + 1;

    frame_sh_.reserve(data.frames.size());
    for (const OlatFrame& f : data.frames)
        frame_sh_.push_back(pointlights_to_sh(f.lights, base.sh_order));

    cam_wo_.resize(data.cameras.size());
    for (size_t c = 0; c < data.cameras.size(); ++c) {
        const Vec3 eye = data.cameras[c].position();
        cam_wo_[c].resize(base.size());
        for (size_t k = 0; k < base.size(); ++k)
            cam_wo_[c][k] = normalize(eye - base.gaussians[k].position);
    }
    (void)opts;  // schlick/nearest-light options not used by the fit path

    std::vector<Vec3> positions(base.size());
    for (size_t k = 0; k < base.size(); ++k) positions[k] = base.gaussians[k].position;
    bounds_.s_max = 10.0 * median_nn_spacing(positions);
    scale_reg_ = reg_terms(base.gaussians, {}, weights_, bounds_);
}

std::vector<double> TransferProblem::initial_params() const {
    std::vector<double> params(param_count(), 0.0);
    for (size_t k = 0; k < base_->size(); ++k) {
        double* p = params.data() + k * layout_.per_gaussian;
        // albedo logits at 0 (rho = 0.5); flat positive band-0 transfer;
        // sigma logit 0 (sigma ~ 0.5); visibility starts low so the diffuse
        // term explains the data first
        p[layout_.d_color] = p[layout_.d_color + 1] = p[layout_.d_color + 2] = 0.3;
        p[layout_.vis] = logit(0.1);
    }
    return params;
}

std::vector<TransferParams> TransferProblem::decode(std::span<const double> params) const {
    if (params.size() != param_count())
        throw InvalidInput("TransferProblem::decode: size mismatch");
    std::vector<TransferParams> out(base_->size());
    for (size_t k = 0; k < base_->size(); ++k) {
        const double* p = params.data() + k * layout_.per_gaussian;
        TransferParams& t = out[k];
        t.albedo = {sigmoid(p[0]), sigmoid(p[1]), sigmoid(p[2])};
        t.d_color.resize(layout_.dc);
        for (int j = 0; j < layout_.dc; ++j)
            t.d_color[j] = {p[layout_.d_color + size_t(j) * 3],
                            p[layout_.d_color + size_t(j) * 3 + 1],
                            p[layout_.d_color + size_t(j) * 3 + 2]};
        t.d_mono.assign(p + layout_.d_mono, p + layout_.d_mono + layout_.dm);
        t.roughness = decode_sigma(p[layout_.sigma]);
        t.visibility = sigmoid(p[layout_.vis]);
        t.normal_offset = base_->transfer[k].normal_offset;
    }
    return out;
}

double TransferProblem::eval(std::span<const double> params, std::span<double> grad,
                             std::span<const int> frames) const {
    if (params.size() != param_count())
        throw InvalidInput("TransferProblem::eval: parameter size mismatch");
    if (frames.empty()) throw InvalidInput("TransferProblem::eval: empty frame subset");
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != param_count())
        throw InvalidInput("TransferProblem::eval: gradient size mismatch");
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    const size_t n_gaussians = base_->size();
    const int nc = SHCoeffs::coeff_count(base_->sh_order);
    const double frame_scale = 1.0 / double(frames.size());

    std::vector<TransferParams> transfer = decode(params);
    double total = scale_reg_;

    std::vector<Vec3> preclamp(n_gaussians), colors(n_gaussians);
    for (int fi : frames) {
        if (fi < 0 || size_t(fi) >= data_->frames.size())
            throw InvalidInput("TransferProblem::eval: frame index out of range");
        const OlatFrame& frame = data_->frames[fi];
        const Camera& cam = data_->cameras[frame.camera];
        const SHCoeffs& light_sh = frame_sh_[fi];
        const PointLightSet& lights = frame.lights;
        const double dw = lights.solid_angle();
        const auto& wo = cam_wo_[frame.camera];

        parallel_for(0, std::int64_t(n_gaussians), [&](std::int64_t k0, std::int64_t k1) {
            for (std::int64_t k = k0; k < k1; ++k) {
                const TransferParams& t = transfer[k];
                Vec3 c = shade_diffuse(t, light_sh);
                Vec3 n = composed_normal(t, base_->normals[k]);
                Vec3 axis = reflect_dir(wo[k], n);
                double lam = 1.0 / (t.roughness * t.roughness);
                Vec3 b;
                for (size_t i = 0; i < lights.size(); ++i) {
                    double e = std::exp(lam * (dot(lights.directions[i], axis) - 1.0));
                    b += lights.intensities[i] * (e * dw);
                }
                preclamp[k] = c + b * t.visibility;
                colors[k] = cwise_max(preclamp[k], 0.0);
            }
        });

        RenderTarget rt = rasterize(base_->gaussians, colors, cam, RasterMode::kTiled);
        const Image* mask = frame.has_mask() ? &frame.mask : nullptr;

        double frame_loss;
        std::vector<Vec3> dpre(n_gaussians);
        if (!want_grad) {
            frame_loss = weights_.w_l1 * loss_l1(rt.color, frame.target, mask) +
                         weights_.w_ssim * loss_ssim(rt.color, frame.target);
        } else {
            Image g_l1, g_ssim;
            double l1 = loss_l1_grad(rt.color, frame.target, mask, g_l1);
            double ssim = loss_ssim_grad(rt.color, frame.target, g_ssim);
            frame_loss = weights_.w_l1 * l1 + weights_.w_ssim * ssim;
            Image dldc(rt.color.width, rt.color.height, 3);
            const double s1 = weights_.w_l1 * frame_scale;
            const double s2 = weights_.w_ssim * frame_scale;
            for (size_t i = 0; i < dldc.data.size(); ++i)
                dldc.data[i] = s1 * g_l1.data[i] + s2 * g_ssim.data[i];
            std::vector<Vec3> q =
                rasterize_backward_colors(base_->gaussians, colors, cam, dldc);
            for (size_t k = 0; k < n_gaussians; ++k)
                for (int ch = 0; ch < 3; ++ch)
                    dpre[k][ch] = preclamp[k][ch] > 0.0 ? q[k][ch] : 0.0;
            reg_negcolor_grad(preclamp, weights_.w_negcolor * frame_scale, dpre);
        }
        total += frame_scale *
                 (frame_loss + reg_terms({}, preclamp, weights_, bounds_));
        if (!want_grad) continue;

        parallel_for(0, std::int64_t(n_gaussians), [&](std::int64_t k0, std::int64_t k1) {
            for (std::int64_t k = k0; k < k1; ++k) {
                const Vec3& up = dpre[k];
                if (up.x == 0.0 && up.y == 0.0 && up.z == 0.0) continue;
                const TransferParams& t = transfer[k];
                const double* p = params.data() + size_t(k) * layout_.per_gaussian;
                double* g = grad.data() + size_t(k) * layout_.per_gaussian;

                // diffuse: pre_ch += rho_ch * sum_j L[j,ch] d(j,ch)
                for (int ch = 0; ch < 3; ++ch) {
                    double diff = 0.0;
                    for (int j = 0; j < nc; ++j) diff += light_sh.at(j, ch) * t.coeff(j, ch);
                    double rho = t.albedo[ch];
                    g[layout_.albedo + ch] += up[ch] * diff * rho * (1.0 - rho);
                    for (int j = 0; j < layout_.dc; ++j)
                        g[layout_.d_color + size_t(j) * 3 + ch] +=
                            up[ch] * rho * light_sh.at(j, ch);
                    for (int j = 0; j < layout_.dm; ++j)
                        g[layout_.d_mono + j] +=
                            up[ch] * rho * light_sh.at(layout_.dc + j, ch);
                }

                // specular: pre_ch += v * B_ch(lambda)
                Vec3 n = composed_normal(t, base_->normals[k]);
                Vec3 axis = reflect_dir(wo[k], n);
                double sigma = t.roughness;
                double lam = 1.0 / (sigma * sigma);
                Vec3 b, db_dlam;
                for (size_t i = 0; i < lights.size(); ++i) {
                    double d = dot(lights.directions[i], axis);
                    double e = std::exp(lam * (d - 1.0));
                    b += lights.intensities[i] * (e * dw);
                    db_dlam += lights.intensities[i] * (e * (d - 1.0) * dw);
                }
                double v = t.visibility;
                double up_dot_b = dot(up, b);
                double up_dot_db = dot(up, db_dlam);
                double u_vis = p[layout_.vis];
                double sv = sigmoid(u_vis);
                g[layout_.vis] += up_dot_b * sv * (1.0 - sv);
                double dlam_dsigma = -2.0 / (sigma * sigma * sigma);
                g[layout_.sigma] +=
                    up_dot_db * v * dlam_dsigma * sigma_chain(p[layout_.sigma]);
            }
        });
    }
    return total;
}

TransferFitResult fit_transfer(const Avatar& base, const OlatDataset& data,
                               const FitConfig& config, const LossWeights& weights) {
    if (!config.valid()) throw InvalidInput("fit_transfer: invalid config");
    TransferProblem problem(base, data, weights);

    TransferFitResult result;
    result.report.seed = config.seed;
    result.report.iterations = config.iterations;

    // single lighting condition -> ill-posed warning, still runs
    std::set<std::vector<double>> distinct;
    for (const OlatFrame& f : data.frames) {
        std::vector<double> key;
        for (const Vec3& d : f.lights.directions) { key.push_back(d.x); key.push_back(d.y); key.push_back(d.z); }
        for (const Vec3& c : f.lights.intensities) { key.push_back(c.x); key.push_back(c.y); key.push_back(c.z); }
        distinct.insert(std::move(key));
    }
    result.report.ill_posed = distinct.size() < 2;

    std::vector<double> params = problem.initial_params();
    std::vector<double> grad(params.size());
    Adam adam(params.size(), config);
    Rng rng(config.seed);

    std::vector<int> order(data.frames.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    const int batch = std::min<int>(config.batch_size, int(order.size()));
    size_t cursor = order.size();  // trigger shuffle on first use

    result.report.loss_history.reserve(config.iterations);
    for (int it = 0; it < config.iterations; ++it) {
        if (cursor + batch > order.size()) {
            for (size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[size_t(rng.next_u64() % i)]);
            cursor = 0;
        }
        std::span<const int> subset(order.data() + cursor, size_t(batch));
        cursor += size_t(batch);

        double loss = problem.eval(params, grad, subset);
        if (!std::isfinite(loss))
            throw Divergence("fit_transfer: non-finite loss at iteration " +
                             std::to_string(it));
        result.report.loss_history.push_back(loss);
        adam.step(grad, params);
    }

    std::vector<int> all(data.frames.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = int(i);
    result.report.final_loss = problem.eval(params, {}, all);
    result.report.initial_loss = result.report.loss_history.empty()
                                     ? result.report.final_loss
                                     : result.report.loss_history.front();
    result.transfer = problem.decode(params);
    return result;
}

}  // namespace gprt
