#include "relight/adjust.hpp"

#include <algorithm>
#include <cmath>

#include "relight/errors.hpp"

namespace relight {

namespace {

constexpr double kEpsDiv = 1e-4;

} // namespace

void AdjustmentParams::validate() const {
    if (alpha < 0.0 || alpha > 1.0) {
        throw ConfigError("adjustment: alpha must lie in [0, 1]");
    }
    if (!(illum_gamma_floor > 0.0) || illum_gamma_floor > 1.0) {
        throw ConfigError("adjustment: illum_gamma_floor must lie in (0, 1]");
    }
    if (refl_gain < 0.0) {
        throw ConfigError("adjustment: refl_gain must be non-negative");
    }
    for (double g : per_channel_gain) {
        if (g < 0.25 || g > 4.0) {
            throw ConfigError("adjustment: per-channel gains must lie in [0.25, 4]");
        }
    }
}

double estimate_alpha(const ColorImage& I_l, const ColorImage& I_h) {
    const ImagePlane gl = to_gray(I_l);
    const ImagePlane gh = to_gray(I_h);
    if (!gl.same_shape(gh)) {
        throw InvalidArgumentError("estimate_alpha: image dimensions differ");
    }
    double acc = 0.0;
    for (std::size_t p = 0; p < gl.size(); ++p) {
        acc += std::abs(gh.data()[p] - gl.data()[p]) / std::max(gh.data()[p], kEpsDiv);
    }
    return std::clamp(acc / static_cast<double>(gl.size()), 0.0, 1.0);
}

LbsMap lbs_target(const ColorImage& I_l, const ColorImage& I_h) {
    const ImagePlane gl = to_gray(I_l);
    const ImagePlane gh = to_gray(I_h);
    if (!gl.same_shape(gh)) {
        throw InvalidArgumentError("lbs_target: image dimensions differ");
    }
    ImagePlane out(gl.height(), gl.width());
    for (std::size_t p = 0; p < gl.size(); ++p) {
        const double v = (gh.data()[p] - gl.data()[p]) / std::max(gh.data()[p], kEpsDiv);
        out.data()[p] = std::clamp(v, 0.0, 1.0 - 1e-6);
    }
    return LbsMap{std::move(out)};
}

LbsMap lbs_predict(const ColorImage& I_l, const ColorImage& guide) {
    return lbs_target(I_l, guide);
}

ImagePlane adjust_illumination(const ImagePlane& L, const AdjustmentParams& p) {
    p.validate();
    const double e = std::max(1.0 - p.alpha, p.illum_gamma_floor);
    ImagePlane out = clamp_non_negative(L);
    for (double& v : out.data()) v = std::pow(v, e);
    return out;
}

ColorImage adjust_reflectance(const ColorImage& R, const LbsMap& lbs,
                              const AdjustmentParams& p) {
    p.validate();
    if (!R.channel(0).same_shape(lbs.plane)) {
        throw InvalidArgumentError("adjust_reflectance: deficit map dimensions differ");
    }
    ColorImage out = R;
    for (int c = 0; c < 3; ++c) {
        auto& d = out.channel(c).data();
        const auto& m = lbs.plane.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = std::clamp(p.per_channel_gain[c] * d[i] * (1.0 + p.refl_gain * m[i]), 0.0, 1.0);
        }
    }
    return out;
}

ColorImage recompose(const ColorImage& R_adj, const ImagePlane& L_adj) {
    ColorImage out = R_adj;
    for (int c = 0; c < 3; ++c) {
        out.channel(c) = clamp_unit(ewise(R_adj.channel(c), L_adj, EwiseOp::mul));
    }
    return out;
}

ColorImage gamma_correct(const ColorImage& I, double g) {
    if (!(g > 0.0)) {
        throw InvalidArgumentError("gamma_correct: exponent must be positive");
    }
    ColorImage out = I;
    const double inv = 1.0 / g;
    for (int c = 0; c < 3; ++c) {
        for (double& v : out.channel(c).data()) {
            v = std::pow(std::clamp(v, 0.0, 1.0), inv);
        }
    }
    return out;
}

double auto_gc_exponent(const ColorImage& I) {
    const double target = 0.5;
    auto mean_luma_at = [&](double g) { return mean(to_gray(gamma_correct(I, g))); };
    double lo = 0.2, hi = 5.0;
    // Mean luminance grows with g (v^(1/g) is increasing in g on [0,1]), so a
    // plain bisection on the bracket suffices; saturated images pin a bound.
    if (mean_luma_at(lo) >= target) return lo;
    if (mean_luma_at(hi) <= target) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_luma_at(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace relight
