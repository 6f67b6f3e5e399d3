#include "relight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "relight/errors.hpp"

namespace relight {

void LossWeights::validate() const {
    if (gamma_R < 0.0 || gamma_L < 0.0 || gamma_rec < 0.0 || eta_L < 0.0 || eta_R < 0.0 ||
        eta_lbs < 0.0 || eta_en < 0.0) {
        throw ConfigError("loss weights must be non-negative");
    }
    if (!(eps_grad > 0.0)) {
        throw ConfigError("eps_grad must be positive");
    }
}

double loss_reflectance_consistency(const ColorImage& R_l, const ColorImage& R_h) {
    if (!R_l.channel(0).same_shape(R_h.channel(0))) {
        throw InvalidArgumentError("loss_reflectance_consistency: dimensions differ");
    }
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& a = R_l.channel(c).data();
        const auto& b = R_h.channel(c).data();
        for (std::size_t p = 0; p < a.size(); ++p) {
            const double d = a[p] - b[p];
            acc += d * d;
        }
    }
    return acc / static_cast<double>(R_l.channel(0).size());
}

double loss_illumination_smooth(const ImagePlane& L_l, const ImagePlane& L_h,
                                const ColorImage& I_l, const LossWeights& w) {
    w.validate();
    if (!L_l.same_shape(L_h) || !L_l.same_shape(I_l.channel(0))) {
        throw InvalidArgumentError("loss_illumination_smooth: dimensions differ");
    }
    double acc = 0.0;
    for (DiffAxis axis : {DiffAxis::vertical, DiffAxis::horizontal}) {
        // Channel-max gradient magnitude of the low-light image on this axis.
        ImagePlane denom(L_l.height(), L_l.width(), 0.0);
        for (int c = 0; c < 3; ++c) {
            const ImagePlane g = diff_conv(I_l.channel(c), axis);
            for (std::size_t p = 0; p < denom.size(); ++p) {
                denom.data()[p] = std::max(denom.data()[p], std::abs(g.data()[p]));
            }
        }
        const ImagePlane gl = diff_conv(L_l, axis);
        const ImagePlane gh = diff_conv(L_h, axis);
        for (std::size_t p = 0; p < denom.size(); ++p) {
            const double d = std::max(denom.data()[p], w.eps_grad);
            acc += (std::abs(gl.data()[p]) + std::abs(gh.data()[p])) / d;
        }
    }
    return acc / static_cast<double>(L_l.size());
}

double loss_reconstruction(const ColorImage& R, const ImagePlane& L, const ColorImage& I) {
    if (!R.channel(0).same_shape(L) || !L.same_shape(I.channel(0))) {
        throw InvalidArgumentError("loss_reconstruction: dimensions differ");
    }
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& r = R.channel(c).data();
        const auto& i = I.channel(c).data();
        const auto& l = L.data();
        for (std::size_t p = 0; p < l.size(); ++p) {
            const double d = i[p] - r[p] * l[p];
            acc += d * d;
        }
    }
    return acc / static_cast<double>(L.size());
}

double loss_color_angle(const ColorImage& a, const ColorImage& b) {
    if (!a.channel(0).same_shape(b.channel(0))) {
        throw InvalidArgumentError("loss_color_angle: dimensions differ");
    }
    double acc = 0.0;
    const std::size_t n = a.channel(0).size();
    for (std::size_t p = 0; p < n; ++p) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double va = a.channel(c).data()[p];
            const double vb = b.channel(c).data()[p];
            dot += va * vb;
            na += va * va;
            nb += vb * vb;
        }
        if (na == 0.0 || nb == 0.0) continue;
        acc += std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0));
    }
    return acc / static_cast<double>(n);
}

double loss_enhancement(const ColorImage& en, const ColorImage& gt) {
    if (!en.channel(0).same_shape(gt.channel(0))) {
        throw InvalidArgumentError("loss_enhancement: dimensions differ");
    }
    double mse = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& a = en.channel(c).data();
        const auto& b = gt.channel(c).data();
        for (std::size_t p = 0; p < a.size(); ++p) {
            const double d = a[p] - b[p];
            mse += d * d;
        }
    }
    return mse / static_cast<double>(en.channel(0).size()) + loss_color_angle(en, gt);
}

namespace {

constexpr int kSsimRadius = 5; // 11x11 window

std::vector<double> ssim_kernel() {
    std::vector<double> k(2 * kSsimRadius + 1);
    double sum = 0.0;
    for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (1.5 * 1.5));
        k[static_cast<std::size_t>(i + kSsimRadius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable Gaussian filter evaluated only where the full window fits; the
// returned plane has the input's shape with undefined values in the border
// band (callers only read the valid interior).
ImagePlane ssim_filter(const ImagePlane& in, const std::vector<double>& k) {
    const int h = in.height();
    const int w = in.width();
    ImagePlane tmp(h, w, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = kSsimRadius; c < w - kSsimRadius; ++c) {
            double acc = 0.0;
            for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
                acc += k[static_cast<std::size_t>(i + kSsimRadius)] * in.at(r, c + i);
            }
            tmp.at(r, c) = acc;
        }
    }
    ImagePlane out(h, w, 0.0);
    for (int r = kSsimRadius; r < h - kSsimRadius; ++r) {
        for (int c = kSsimRadius; c < w - kSsimRadius; ++c) {
            double acc = 0.0;
            for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
                acc += k[static_cast<std::size_t>(i + kSsimRadius)] * tmp.at(r + i, c);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

double ssim_plane(const ImagePlane& x, const ImagePlane& y) {
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    const std::vector<double> k = ssim_kernel();

    ImagePlane xx = x, yy = y, xy = x;
    for (std::size_t p = 0; p < x.size(); ++p) {
        xx.data()[p] = x.data()[p] * x.data()[p];
        yy.data()[p] = y.data()[p] * y.data()[p];
        xy.data()[p] = x.data()[p] * y.data()[p];
    }
    const ImagePlane mx = ssim_filter(x, k);
    const ImagePlane my = ssim_filter(y, k);
    const ImagePlane mxx = ssim_filter(xx, k);
    const ImagePlane myy = ssim_filter(yy, k);
    const ImagePlane mxy = ssim_filter(xy, k);

    double acc = 0.0;
    std::size_t count = 0;
    for (int r = kSsimRadius; r < x.height() - kSsimRadius; ++r) {
        for (int c = kSsimRadius; c < x.width() - kSsimRadius; ++c) {
            const double ux = mx.at(r, c);
            const double uy = my.at(r, c);
            const double vx = mxx.at(r, c) - ux * ux;
            const double vy = myy.at(r, c) - uy * uy;
            const double cov = mxy.at(r, c) - ux * uy;
            const double num = (2.0 * ux * uy + c1) * (2.0 * cov + c2);
            const double den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
            acc += num / den;
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

} // namespace

double ssim(const ColorImage& a, const ColorImage& b) {
    if (!a.channel(0).same_shape(b.channel(0))) {
        throw InvalidArgumentError("ssim: dimensions differ");
    }
    if (a.height() < 11 || a.width() < 11) {
        throw InvalidArgumentError("ssim: images must be at least 11x11");
    }
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        acc += ssim_plane(a.channel(c), b.channel(c));
    }
    return acc / 3.0;
}

double psnr(const ColorImage& a, const ColorImage& b) {
    if (!a.channel(0).same_shape(b.channel(0))) {
        throw InvalidArgumentError("psnr: dimensions differ");
    }
    double mse = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& x = a.channel(c).data();
        const auto& y = b.channel(c).data();
        for (std::size_t p = 0; p < x.size(); ++p) {
            const double d = x[p] - y[p];
            mse += d * d;
        }
    }
    mse /= 3.0 * static_cast<double>(a.channel(0).size());
    if (mse <= 0.0) return 99.0;
    return std::min(10.0 * std::log10(1.0 / mse), 99.0);
}

namespace {

// Per-pixel channel max, nearest-neighbor resampled so neither side
// exceeds 50 pixels.
ImagePlane loe_lightness(const ColorImage& img) {
    const ImagePlane full = channel_max(img);
    const int h = full.height();
    const int w = full.width();
    const int oh = std::min(h, 50);
    const int ow = std::min(w, 50);
    if (oh == h && ow == w) return full;
    ImagePlane out(oh, ow);
    for (int r = 0; r < oh; ++r) {
        const int sr = std::min(static_cast<int>((r + 0.5) * h / oh), h - 1);
        for (int c = 0; c < ow; ++c) {
            const int sc = std::min(static_cast<int>((c + 0.5) * w / ow), w - 1);
            out.at(r, c) = full.at(sr, sc);
        }
    }
    return out;
}

} // namespace

double loe(const ColorImage& enhanced, const ColorImage& reference) {
    if (!enhanced.channel(0).same_shape(reference.channel(0))) {
        throw InvalidArgumentError("loe: dimensions differ");
    }
    const ImagePlane le = loe_lightness(enhanced);
    const ImagePlane lr = loe_lightness(reference);
    const std::size_t n = le.size();
    std::size_t mismatches = 0;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            const bool oe = le.data()[x] >= le.data()[y];
            const bool orr = lr.data()[x] >= lr.data()[y];
            if (oe != orr) ++mismatches;
        }
    }
    return 1000.0 * static_cast<double>(mismatches) / (static_cast<double>(n) * n);
}

} // namespace relight
