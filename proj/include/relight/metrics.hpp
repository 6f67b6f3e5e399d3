#pragma once

#include <map>
#include <string>

#include "relight/image.hpp"

namespace relight {

// Weights for the evaluation objectives. Decomposition weights follow the
// reference operating point (0.1, 1, 1000); adjustment weights follow
// (0.05, 0.05, 0.1, 20).
struct LossWeights {
    double gamma_R = 0.1;
    double gamma_L = 1.0;
    double gamma_rec = 1000.0;
    double eta_L = 0.05;
    double eta_R = 0.05;
    double eta_lbs = 0.1;
    double eta_en = 20.0;
    // Guard for gradient-domain denominators in the smoothness loss.
    double eps_grad = 0.01;

    void validate() const;
};

// Flat bundle of quality numbers for one image.
struct MetricsReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double loe = 0.0;
    double loe_ref = 0.0;
    std::map<std::string, double> losses;
};

// Mean squared distance between two reflectance maps, summed over channels,
// normalized by pixel count.
double loss_reflectance_consistency(const ColorImage& R_l, const ColorImage& R_h);

// Gradient-domain smoothness of both illumination maps, each gradient
// magnitude divided by the (guarded) channel-max gradient magnitude of the
// low-light image, L1-accumulated over both difference axes.
double loss_illumination_smooth(const ImagePlane& L_l, const ImagePlane& L_h,
                                const ColorImage& I_l, const LossWeights& w);

// Mean squared reconstruction residual of I against R * L, summed over
// channels, normalized by pixel count.
double loss_reconstruction(const ColorImage& R, const ImagePlane& L, const ColorImage& I);

// Mean per-pixel angle between the RGB vectors of the two images; pixels
// where either vector is zero contribute 0.
double loss_color_angle(const ColorImage& a, const ColorImage& b);

// Enhancement objective: per-pixel MSE (channel-summed) plus the color-angle
// term.
double loss_enhancement(const ColorImage& en, const ColorImage& gt);

// Mean structural similarity over valid 11x11 Gaussian windows
// (sigma = 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1), averaged over the
// three channels. Throws InvalidArgumentError for images smaller than 11x11.
double ssim(const ColorImage& a, const ColorImage& b);

// Peak signal-to-noise ratio in dB over all channels and pixels, capped at
// 99.0 (the sentinel for identical images).
double psnr(const ColorImage& a, const ColorImage& b);

// Lightness-order error between the enhanced image and an order reference,
// scaled by 1000. Lightness is the per-pixel channel max; both maps are
// nearest-neighbor downsampled to at most 50x50 before the all-pairs
// comparison. Asymmetric by construction: the second argument is the
// reference ordering.
double loe(const ColorImage& enhanced, const ColorImage& reference);

} // namespace relight
