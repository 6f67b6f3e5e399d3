#include "relight/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/errors.hpp"

namespace relight {

double finetune_loss(const ColorImage& en, const ColorImage& guide) {
    if (!en.channel(0).same_shape(guide.channel(0))) {
        throw InvalidArgumentError("finetune_loss: dimensions differ");
    }
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& a = en.channel(c).data();
        const auto& b = guide.channel(c).data();
        for (std::size_t p = 0; p < a.size(); ++p) {
            const double d = a[p] - b[p];
            acc += d * d;
        }
    }
    return acc / static_cast<double>(en.channel(0).size());
}

namespace {

constexpr double kEpsDiv = 1e-4;
constexpr int kGoldenIters = 32;

// Golden-section minimizer on [lo, hi] with a fixed iteration budget; returns
// the midpoint of the final bracket. Deterministic by construction.
template <typename F>
double golden_min(double lo, double hi, F f) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < kGoldenIters; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

FinetuneResult finetune(const DecompositionState& decomp, const ColorImage& I_l,
                        const ColorImage& guide, const AdjustmentParams& init, int iters) {
    if (iters < 1) {
        throw InvalidArgumentError("finetune: iters must be at least 1");
    }
    init.validate();
    // The brightness-deficit map depends only on the inputs, not on the
    // parameters being searched, so it is computed once.
    const LbsMap lbs = lbs_predict(I_l, guide);

    auto evaluate = [&](const AdjustmentParams& p) {
        const ImagePlane L_adj = adjust_illumination(decomp.L, p);
        const ColorImage R_adj = adjust_reflectance(decomp.R, lbs, p);
        return finetune_loss(recompose(R_adj, L_adj), guide);
    };

    AdjustmentParams params = init;
    double loss = evaluate(params);
    if (!std::isfinite(loss)) {
        throw NumericError("finetune: non-finite loss at initialization", 0);
    }
    FinetuneResult result;
    result.loss_trace.push_back(loss);

    for (int it = 1; it <= iters; ++it) {
        // Global brightness: refine alpha, keep the move only if it strictly
        // helps — ties leave the parameters untouched.
        {
            AdjustmentParams trial = params;
            trial.alpha = golden_min(0.0, 1.0, [&](double a) {
                trial.alpha = a;
                return evaluate(trial);
            });
            const double trial_loss = evaluate(trial);
            if (trial_loss < loss) {
                params = trial;
                loss = trial_loss;
            }
        }

        // Color balance: match per-channel means to the reference, clamped to
        // the allowed gain box, reverted when the joint move does not help.
        {
            const ImagePlane L_adj = adjust_illumination(decomp.L, params);
            const ColorImage en = recompose(adjust_reflectance(decomp.R, lbs, params), L_adj);
            AdjustmentParams trial = params;
            for (int c = 0; c < 3; ++c) {
                const double ratio = mean(guide.channel(c)) / std::max(mean(en.channel(c)), kEpsDiv);
                trial.per_channel_gain[c] =
                    std::clamp(params.per_channel_gain[c] * ratio, 0.25, 4.0);
            }
            const double trial_loss = evaluate(trial);
            if (trial_loss < loss) {
                params = trial;
                loss = trial_loss;
            }
        }

        // Deficit mixing strength: bounded search, same acceptance rule.
        {
            AdjustmentParams trial = params;
            trial.refl_gain = golden_min(0.0, 4.0, [&](double g) {
                trial.refl_gain = g;
                return evaluate(trial);
            });
            const double trial_loss = evaluate(trial);
            if (trial_loss < loss) {
                params = trial;
                loss = trial_loss;
            }
        }

        if (!std::isfinite(loss)) {
            throw NumericError("finetune: non-finite loss at iteration " + std::to_string(it),
                               it);
        }
        result.loss_trace.push_back(loss);
    }

    result.params = params;
    result.iterations = iters;
    return result;
}

} // namespace relight
