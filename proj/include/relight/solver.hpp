#pragma once

#include "relight/image.hpp"

#include <vector>

namespace relight {

enum class ProxKind { identity, gaussian_smooth, weighted_smooth };

// Explicit proximal operator for the staged solver. gaussian_smooth blurs
// with a separable Gaussian of the given width; weighted_smooth runs one
// Jacobi step of edge-weighted diffusion with weights exp(-|grad|/strength)
// frozen from the input plane. Every kind projects onto values >= 0.
struct ProxChoice {
    ProxKind kind = ProxKind::identity;
    double width = 1.0;    // gaussian_smooth standard deviation, pixels
    double strength = 0.1; // weighted_smooth edge falloff

    void validate() const;
};

// All scalars of the decomposition model and its staged solver.
struct SolverConfig {
    double gamma = 0.1;   // structure prior weight
    double lambda = 10.0; // gradient amplification strength
    double sigma = 0.1;   // amplification falloff
    double eta1 = 1.0;    // illumination step size
    double eta2 = 1.0;    // reflectance step size
    int stages = 17;
    double eps_div = 1e-4;
    ProxChoice prox_l;
    ProxChoice prox_r;
    bool safeguard = true;

    void validate() const;
};

// Per-axis amplified gradients of the input image, one ColorImage per axis.
struct AmplifiedGradient {
    ColorImage gx; // vertical-axis differences
    ColorImage gy; // horizontal-axis differences
};

// One point of the solver trajectory. L is shared across channels.
struct DecompositionState {
    int stage = 0;
    ImagePlane L;
    ColorImage R;
    double objective = 0.0;
    // Set when the safeguard ran out of halvings; the sub-step then keeps its
    // previous iterate so the objective trace stays non-increasing.
    bool safeguard_exhausted = false;
};

// G_i = (1 + lambda * exp(-|d_i (x) I| / sigma)) .* (d_i (x) I), per channel.
AmplifiedGradient amplified_gradient(const ColorImage& I, double lambda, double sigma);

// Newton direction for the illumination sub-problem on a single plane:
// (R .* (R .* L - I)) ./ (R .* R).
ImagePlane newton_dir_L_plane(const ImagePlane& R, const ImagePlane& L, const ImagePlane& I,
                              double eps_div = 1e-4);

// Channel mean of the per-channel illumination directions.
ImagePlane newton_dir_L(const ColorImage& R, const ImagePlane& L, const ColorImage& I,
                        double eps_div = 1e-4);

// Quasi-Newton direction for one reflectance channel:
// ((R .* L - I) .* L + (gamma/2) * sum_i d_i^T (x) (d_i (x) R - G_i))
//   ./ (L .* L + 4 gamma).
ImagePlane newton_dir_R_plane(const ImagePlane& R, const ImagePlane& L, const ImagePlane& I,
                              const ImagePlane& gx, const ImagePlane& gy, double gamma,
                              double eps_div = 1e-4);

ColorImage newton_dir_R(const ColorImage& R, const ImagePlane& L, const ColorImage& I,
                        const AmplifiedGradient& G, double gamma, double eps_div = 1e-4);

ImagePlane apply_prox(const ImagePlane& plane, const ProxChoice& choice);
ColorImage apply_prox(const ColorImage& img, const ProxChoice& choice);

// Explicit part of the decomposition objective:
// 1/2 ||I - R .* L||_F^2 + (gamma/4) sum_i ||d_i (x) R - G_i||_F^2,
// summed over channels.
double objective(const ColorImage& R, const ImagePlane& L, const ColorImage& I,
                 const AmplifiedGradient& G, const SolverConfig& cfg);

// Runs the full staged alternating solver and returns the trajectory,
// including the initialization, so the result has cfg.stages + 1 entries.
// Throws NumericError (with the stage index) if the objective goes
// non-finite.
std::vector<DecompositionState> decompose(const ColorImage& I, const SolverConfig& cfg);

} // namespace relight
