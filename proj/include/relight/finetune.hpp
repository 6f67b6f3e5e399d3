#pragma once

#include <vector>

#include "relight/adjust.hpp"
#include "relight/image.hpp"
#include "relight/solver.hpp"

namespace relight {

// Outcome of the per-image parameter search.
struct FinetuneResult {
    AdjustmentParams params;
    // Objective value before the first iteration and after each one;
    // non-increasing by construction.
    std::vector<double> loss_trace;
    int iterations = 0;
};

// Mean squared distance between the enhanced image and the pseudo reference,
// channel-summed, normalized by pixel count.
double finetune_loss(const ColorImage& en, const ColorImage& guide);

// Coordinate-descent search over AdjustmentParams against the reference:
// per iteration, a golden-section refinement of alpha on [0, 1], a
// closed-form per-channel gain update (guide/enhanced channel-mean ratio,
// clamped to [0.25, 4]), and a bounded search of refl_gain on [0, 4] — each
// move accepted only when it strictly lowers the loss, so an already-optimal
// start returns the initial parameters unchanged. The decomposition (R, L)
// is read-only throughout. Throws NumericError (with the iteration index)
// if the loss turns non-finite.
FinetuneResult finetune(const DecompositionState& decomp, const ColorImage& I_l,
                        const ColorImage& guide, const AdjustmentParams& init, int iters);

} // namespace relight
