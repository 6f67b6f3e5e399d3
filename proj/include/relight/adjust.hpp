#pragma once

#include "relight/image.hpp"

namespace relight {

// Knobs for the post-decomposition adjustment stage.
struct AdjustmentParams {
    // Global brightness amount in [0, 1]; 0 leaves illumination untouched.
    double alpha = 0.5;
    // Floor for the alpha -> exponent map, keeping the power map bounded away
    // from the degenerate "raise everything to zero" limit.
    double illum_gamma_floor = 0.1;
    // Mixing strength for the brightness-deficit map on reflectance.
    double refl_gain = 0.0;
    // Fine-tunable color balance, one multiplicative gain per channel.
    double per_channel_gain[3] = {1.0, 1.0, 1.0};

    void validate() const;
};

// Per-pixel relative brightness deficit, values in [0, 1).
struct LbsMap {
    ImagePlane plane;
};

// Mean relative luminance deficit of I_l against the reference I_h,
// clamped to [0, 1]. Zero exactly when the two gray images agree.
double estimate_alpha(const ColorImage& I_l, const ColorImage& I_h);

// Per-pixel relative luminance deficit (gray(I_h) - gray(I_l)) / gray(I_h)
// with the usual guarded division, clamped to [0, 1 - 1e-6].
LbsMap lbs_target(const ColorImage& I_l, const ColorImage& I_h);

// Deficit of I_l against an arbitrary brightness reference; identical to
// lbs_target with the guide standing in for the reference image.
LbsMap lbs_predict(const ColorImage& I_l, const ColorImage& guide);

// Brightens illumination with the power map L^e, e = max(1 - alpha,
// illum_gamma_floor). Identity at alpha = 0; monotone per pixel.
ImagePlane adjust_illumination(const ImagePlane& L, const AdjustmentParams& p);

// Applies the deficit-weighted gain per channel:
// clip_[0,1](gain_c * R * (1 + refl_gain * lbs)).
ColorImage adjust_reflectance(const ColorImage& R, const LbsMap& lbs, const AdjustmentParams& p);

// Element-wise product of reflectance and illumination, clipped to [0, 1].
ColorImage recompose(const ColorImage& R_adj, const ImagePlane& L_adj);

// Standard gamma correction v -> v^(1/g), clipped to [0, 1]. Throws
// InvalidArgumentError when g <= 0.
ColorImage gamma_correct(const ColorImage& I, double g);

// Picks the gamma-correction exponent that brings mean gray luminance to 0.5,
// by bisection over [0.2, 5]. Returns the bound when the target is out of
// reach (already-bright or pitch-black images).
double auto_gc_exponent(const ColorImage& I);

} // namespace relight
