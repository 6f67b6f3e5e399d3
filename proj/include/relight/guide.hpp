#pragma once

#include "relight/image.hpp"

namespace relight {

// Settings for pseudo-reference synthesis.
struct GuideConfig {
    // Mean gray level the global brightness step aims for.
    double target_mean_luma = 0.5;
    // Tile count per axis for local contrast equalization.
    int clahe_tiles = 8;
    // Histogram clip limit as a multiple of the uniform bin height.
    double clahe_clip = 2.0;
    // Window radius of the edge-preserving denoiser; 0 disables it.
    int denoise_radius = 2;

    void validate() const;
};

// Contrast-limited adaptive histogram equalization on the gray channel with
// bilinear blending between tile mappings; chroma is rescaled by the
// luma ratio. 256-bin histograms, values clipped to [0, 1].
ColorImage clahe(const ColorImage& img, int tiles, double clip_limit);

// Edge-preserving smoother: two passes of a self-guided box filter of the
// given radius. Exact identity on constant planes and for radius 0.
ImagePlane guided_smooth(const ImagePlane& plane, int radius);
ColorImage guided_smooth(const ColorImage& img, int radius);

// Builds the pseudo normal-light reference: global brightness scaling to the
// target mean, local contrast equalization, then denoising. Output in [0,1].
ColorImage synthesize_guide(const ColorImage& I_l, const GuideConfig& cfg);

} // namespace relight
