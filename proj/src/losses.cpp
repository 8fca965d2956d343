#include "gprt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gprt/errors.hpp"

namespace gprt {

namespace {

// Counts mask-included pixels; null mask includes everything.
size_t masked_pixels(const Image& img, const Image* mask) {
    if (!mask) return img.pixel_count();
    if (mask->width != img.width || mask->height != img.height || mask->channels != 1)
        throw InvalidInput("loss: mask shape mismatch");
    size_t n = 0;
    for (double m : mask->data) n += m != 0.0;
    return n;
}

}  // namespace

double loss_l1(const Image& img, const Image& ref, const Image* mask) {
    if (!img.same_shape(ref)) throw InvalidInput("loss_l1: shape mismatch");
    size_t n = masked_pixels(img, mask);
    if (n == 0) throw InvalidInput("loss_l1: empty mask");
    double acc = 0.0;
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        if (mask && mask->data[p] == 0.0) continue;
        for (int c = 0; c < img.channels; ++c) {
            size_t i = p * img.channels + c;
            acc += std::abs(img.data[i] - ref.data[i]);
        }
    }
    return acc / (double(n) * img.channels);
}

double loss_l1_grad(const Image& img, const Image& ref, const Image* mask, Image& grad) {
    if (!img.same_shape(ref)) throw InvalidInput("loss_l1_grad: shape mismatch");
    size_t n = masked_pixels(img, mask);
    if (n == 0) throw InvalidInput("loss_l1_grad: empty mask");
    grad = Image(img.width, img.height, img.channels);
    const double scale = 1.0 / (double(n) * img.channels);
    double acc = 0.0;
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        if (mask && mask->data[p] == 0.0) continue;
        for (int c = 0; c < img.channels; ++c) {
            size_t i = p * img.channels + c;
            double d = img.data[i] - ref.data[i];
            acc += std::abs(d);
            grad.data[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
        }
    }
    return acc * scale;
}

namespace {

constexpr int kSsimWindow = 11;
constexpr int kSsimHalf = kSsimWindow / 2;
constexpr double kSsimC1 = 0.01 * 0.01;  // (k1 * L)^2, L = 1
constexpr double kSsimC2 = 0.03 * 0.03;

const std::vector<double>& ssim_kernel_1d() {
    static const std::vector<double> k = [] {
        std::vector<double> v(kSsimWindow);
        double sum = 0.0;
        for (int i = 0; i < kSsimWindow; ++i) {
            double d = i - kSsimHalf;
            v[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += v[i];
        }
        for (double& x : v) x /= sum;
        return v;
    }();
    return k;
}

// Separable valid-mode Gaussian filter of a single channel.
// Output is (h - 10) x (w - 10), indexed by window center minus kSsimHalf.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h) {
    const auto& k = ssim_kernel_1d();
    const int vw = w - kSsimWindow + 1;
    const int vh = h - kSsimWindow + 1;
    std::vector<double> horiz(size_t(vw) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * in[size_t(y) * w + x + i];
            horiz[size_t(y) * vw + x] = acc;
        }
    std::vector<double> out(size_t(vw) * vh);
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * horiz[size_t(y + i) * vw + x];
            out[size_t(y) * vw + x] = acc;
        }
    return out;
}

std::vector<double> extract_channel(const Image& img, int c) {
    std::vector<double> v(img.pixel_count());
    for (size_t p = 0; p < v.size(); ++p) v[p] = img.data[p * img.channels + c];
    return v;
}

struct SsimFields {
    int vw, vh;
    std::vector<double> mu1, mu2, s1, s2, s12;  // filtered moments per window
};

SsimFields ssim_moments(const std::vector<double>& x, const std::vector<double>& y,
                        int w, int h) {
    SsimFields f;
    f.vw = w - kSsimWindow + 1;
    f.vh = h - kSsimWindow + 1;
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    f.mu1 = filter_valid(x, w, h);
    f.mu2 = filter_valid(y, w, h);
    f.s1 = filter_valid(xx, w, h);
    f.s2 = filter_valid(yy, w, h);
    f.s12 = filter_valid(xy, w, h);
    return f;
}

}  // namespace

double loss_ssim(const Image& img, const Image& ref) {
    if (!img.same_shape(ref)) throw InvalidInput("loss_ssim: shape mismatch");
    if (img.width < kSsimWindow || img.height < kSsimWindow)
        throw InvalidInput("loss_ssim: image smaller than the SSIM window");
    double total = 0.0;
    for (int c = 0; c < img.channels; ++c) {
        auto x = extract_channel(img, c);
        auto y = extract_channel(ref, c);
        SsimFields f = ssim_moments(x, y, img.width, img.height);
        double acc = 0.0;
        for (size_t i = 0; i < f.mu1.size(); ++i) {
            double var1 = f.s1[i] - f.mu1[i] * f.mu1[i];
            double var2 = f.s2[i] - f.mu2[i] * f.mu2[i];
            double cov = f.s12[i] - f.mu1[i] * f.mu2[i];
            double a1 = 2.0 * f.mu1[i] * f.mu2[i] + kSsimC1;
            double a2 = 2.0 * cov + kSsimC2;
            double b1 = f.mu1[i] * f.mu1[i] + f.mu2[i] * f.mu2[i] + kSsimC1;
            double b2 = var1 + var2 + kSsimC2;
            acc += (a1 * a2) / (b1 * b2);
        }
        total += acc / double(f.mu1.size());
    }
    return 1.0 - total / img.channels;
}

double loss_ssim_grad(const Image& img, const Image& ref, Image& grad) {
    if (!img.same_shape(ref)) throw InvalidInput("loss_ssim_grad: shape mismatch");
    if (img.width < kSsimWindow || img.height < kSsimWindow)
        throw InvalidInput("loss_ssim_grad: image smaller than the SSIM window");
    grad = Image(img.width, img.height, img.channels);
    const auto& k = ssim_kernel_1d();
    double total = 0.0;
    for (int c = 0; c < img.channels; ++c) {
        auto x = extract_channel(img, c);
        auto y = extract_channel(ref, c);
        SsimFields f = ssim_moments(x, y, img.width, img.height);
        const double norm = 1.0 / (double(f.mu1.size()) * img.channels);

        // Per-window partials of SSIM with respect to mu1, E[x^2], E[xy];
        // the E[.] paths carry the product-rule terms from var1 and cov.
        std::vector<double> g_mu1(f.mu1.size()), g_s1(f.mu1.size()), g_s12(f.mu1.size());
        double acc = 0.0;
        for (size_t i = 0; i < f.mu1.size(); ++i) {
            double mu1 = f.mu1[i], mu2 = f.mu2[i];
            double var1 = f.s1[i] - mu1 * mu1;
            double var2 = f.s2[i] - mu2 * mu2;
            double cov = f.s12[i] - mu1 * mu2;
            double a1 = 2.0 * mu1 * mu2 + kSsimC1;
            double a2 = 2.0 * cov + kSsimC2;
            double b1 = mu1 * mu1 + mu2 * mu2 + kSsimC1;
            double b2 = var1 + var2 + kSsimC2;
            double inv_b1b2 = 1.0 / (b1 * b2);
            acc += (a1 * a2) * inv_b1b2;

            double ds_dvar1 = -a1 * a2 * inv_b1b2 / b2;
            double ds_dcov = 2.0 * a1 * inv_b1b2;
            double ds_dmu1_direct =
                (2.0 * mu2 * a2 - a1 * a2 * 2.0 * mu1 / b1) * inv_b1b2;
            // var1 = E[x^2] - mu1^2, cov = E[xy] - mu1*mu2
            g_mu1[i] = ds_dmu1_direct - 2.0 * mu1 * ds_dvar1 - mu2 * ds_dcov;
            g_s1[i] = ds_dvar1;
            g_s12[i] = ds_dcov;
        }
        total += acc / double(f.mu1.size());

        // Adjoint of the valid filter: scatter each window's field value
        // through the kernel. loss = 1 - mean SSIM flips the sign.
        for (int wy = 0; wy < f.vh; ++wy) {
            for (int wx = 0; wx < f.vw; ++wx) {
                size_t i = size_t(wy) * f.vw + wx;
                double gm = g_mu1[i], gs1 = g_s1[i], gs12 = g_s12[i];
                for (int dy = 0; dy < kSsimWindow; ++dy) {
                    for (int dx = 0; dx < kSsimWindow; ++dx) {
                        double kw = k[dy] * k[dx];
                        size_t p = size_t(wy + dy) * img.width + (wx + dx);
                        double dxdp = gm + 2.0 * x[p] * gs1 + y[p] * gs12;
                        grad.data[p * img.channels + c] += -norm * kw * dxdp;
                    }
                }
            }
        }
    }
    return 1.0 - total / img.channels;
}

double loss_geometry(std::span<const Vec3> pred, std::span<const Vec3> tracked) {
    if (pred.size() != tracked.size()) throw InvalidInput("loss_geometry: count mismatch");
    if (pred.empty()) throw InvalidInput("loss_geometry: empty inputs");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) acc += length_sq(pred[i] - tracked[i]);
    return acc / double(pred.size());
}

double loss_alpha(const Image& alpha, const Image& matte) {
    if (!alpha.same_shape(matte)) throw InvalidInput("loss_alpha: shape mismatch");
    if (alpha.data.empty()) throw InvalidInput("loss_alpha: empty images");
    double acc = 0.0;
    for (size_t i = 0; i < alpha.data.size(); ++i)
        acc += std::abs(alpha.data[i] - matte.data[i]);
    return acc / double(alpha.data.size());
}

double median_nn_spacing(std::span<const Vec3> positions) {
    if (positions.size() < 2) throw InvalidInput("median_nn_spacing: need >= 2 positions");
    std::vector<double> nn(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < positions.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, length_sq(positions[i] - positions[j]));
        }
        nn[i] = std::sqrt(best);
    }
    size_t mid = nn.size() / 2;
    std::nth_element(nn.begin(), nn.begin() + mid, nn.end());
    return nn[mid];
}

double reg_terms(std::span<const Gaussian3D> gaussians, std::span<const Vec3> preclamp,
                 const LossWeights& weights, const ScaleBounds& bounds) {
    double scale_term = 0.0;
    for (const auto& g : gaussians) {
        for (int a = 0; a < 3; ++a) {
            double over = std::max(0.0, g.scale[a] - bounds.s_max);
            double under = std::max(0.0, bounds.s_min - g.scale[a]);
            scale_term += over * over + under * under;
        }
    }
    double neg_term = 0.0;
    for (const Vec3& c : preclamp)
        for (int ch = 0; ch < 3; ++ch) {
            double neg = std::max(0.0, -c[ch]);
            neg_term += neg * neg;
        }
    return weights.w_scale_reg * scale_term + weights.w_negcolor * neg_term;
}

void reg_negcolor_grad(std::span<const Vec3> preclamp, double w_negcolor,
                       std::span<Vec3> grad) {
    if (grad.size() != preclamp.size())
        throw InvalidInput("reg_negcolor_grad: size mismatch");
    for (size_t k = 0; k < preclamp.size(); ++k)
        for (int ch = 0; ch < 3; ++ch)
            if (preclamp[k][ch] < 0.0) grad[k][ch] += 2.0 * w_negcolor * preclamp[k][ch];
}

}  // namespace gprt
