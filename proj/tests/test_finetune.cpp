// Unit tests for pseudo-reference synthesis and the per-image parameter
// search.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "relight/adjust.hpp"
#include "relight/errors.hpp"
#include "relight/finetune.hpp"
#include "relight/guide.hpp"
#include "relight/image.hpp"
#include "relight/solver.hpp"

using namespace relight;

namespace {

ImagePlane random_plane(int h, int w, std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unif(lo, hi);
    ImagePlane p(h, w);
    for (double& v : p.data()) v = unif(rng);
    return p;
}

ColorImage random_color(int h, int w, std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unif(lo, hi);
    ColorImage img(h, w);
    for (int c = 0; c < 3; ++c) {
        for (double& v : img.channel(c).data()) v = unif(rng);
    }
    return img;
}

double region_std(const ImagePlane& p, int c0, int c1) {
    double m = 0.0;
    int n = 0;
    for (int r = 0; r < p.height(); ++r) {
        for (int c = c0; c < c1; ++c, ++n) m += p.at(r, c);
    }
    m /= n;
    double var = 0.0;
    for (int r = 0; r < p.height(); ++r) {
        for (int c = c0; c < c1; ++c) {
            const double d = p.at(r, c) - m;
            var += d * d;
        }
    }
    return std::sqrt(var / n);
}

} // namespace

TEST_CASE("guide config validation") {
    GuideConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.target_mean_luma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GuideConfig{};
    cfg.target_mean_luma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GuideConfig{};
    cfg.clahe_tiles = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GuideConfig{};
    cfg.clahe_clip = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GuideConfig{};
    cfg.denoise_radius = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("guide synthesis") {
    SUBCASE("constant input at the target brightness is essentially fixed") {
        const ColorImage I(16, 16, 0.5);
        const ColorImage out = synthesize_guide(I, GuideConfig{});
        for (int c = 0; c < 3; ++c) {
            double lo = 1.0, hi = 0.0;
            for (double v : out.channel(c).data()) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                CHECK(std::abs(v - 0.5) <= 0.005);
            }
            // Spatially constant: every tile mapping agrees.
            CHECK(hi - lo <= 1e-12);
        }
    }
    SUBCASE("a dark input is pulled to the target mean") {
        std::mt19937 rng(307);
        const ColorImage I = random_color(24, 24, rng, 0.05, 0.15); // mean luma ~0.1
        const ColorImage out = synthesize_guide(I, GuideConfig{});
        const double m = mean(to_gray(out));
        CHECK(m >= 0.4);
        CHECK(m <= 0.6);
    }
    SUBCASE("local equalization stretches the dark half of a test card") {
        std::mt19937 rng(311);
        ColorImage card(32, 32, 0.0);
        for (int r = 0; r < 32; ++r) {
            for (int c = 0; c < 32; ++c) {
                std::uniform_real_distribution<double> unif(c < 16 ? 0.10 : 0.70,
                                                            c < 16 ? 0.15 : 0.75);
                const double v = unif(rng);
                for (int ch = 0; ch < 3; ++ch) card.channel(ch).at(r, c) = v;
            }
        }
        const ColorImage eq = clahe(card, 2, 10.0);
        const double before = region_std(to_gray(card), 0, 16);
        const double after = region_std(to_gray(eq), 0, 16);
        CHECK(after > before);
    }
    SUBCASE("output always lands in [0,1]") {
        std::mt19937 rng(313);
        const ColorImage I = random_color(20, 20, rng, 0.0, 1.0);
        const ColorImage out = synthesize_guide(I, GuideConfig{});
        for (int c = 0; c < 3; ++c) {
            for (double v : out.channel(c).data()) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("edge-preserving smoother") {
    std::mt19937 rng(317);
    SUBCASE("radius zero is the identity") {
        const ImagePlane p = random_plane(6, 6, rng, 0.0, 1.0);
        const ImagePlane out = guided_smooth(p, 0);
        for (std::size_t q = 0; q < p.size(); ++q) {
            CHECK(out.data()[q] == p.data()[q]);
        }
    }
    SUBCASE("constants are exact fixed points") {
        const ImagePlane out = guided_smooth(ImagePlane(9, 9, 0.37), 2);
        for (double v : out.data()) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
    }
    SUBCASE("noise variance shrinks") {
        const ImagePlane p = random_plane(16, 16, rng, 0.0, 1.0);
        const ImagePlane out = guided_smooth(p, 2);
        auto variance = [](const ImagePlane& x) {
            const double m = mean(x);
            double acc = 0.0;
            for (double v : x.data()) acc += (v - m) * (v - m);
            return acc / static_cast<double>(x.size());
        };
        CHECK(variance(out) < variance(p));
    }
}

TEST_CASE("finetune loss") {
    std::mt19937 rng(331);
    SUBCASE("zero for identical images") {
        const ColorImage a = random_color(5, 5, rng, 0.0, 1.0);
        CHECK(finetune_loss(a, a) == 0.0);
    }
    SUBCASE("uniform difference 0.2 scores 0.04 per channel") {
        const ColorImage a(4, 4, 0.3);
        const ColorImage b(4, 4, 0.5);
        CHECK(finetune_loss(a, b) == doctest::Approx(0.12));
    }
    SUBCASE("never negative") {
        const ColorImage a = random_color(5, 5, rng, 0.0, 1.0);
        const ColorImage b = random_color(5, 5, rng, 0.0, 1.0);
        CHECK(finetune_loss(a, b) >= 0.0);
    }
}

TEST_CASE("parameter search") {
    SUBCASE("iteration budget below one is rejected") {
        const DecompositionState state{0, ImagePlane(4, 4, 0.5), ColorImage(4, 4, 0.5), 0.0,
                                       false};
        CHECK_THROWS_AS(finetune(state, ColorImage(4, 4, 0.25), ColorImage(4, 4, 0.25),
                                 AdjustmentParams{}, 0),
                        InvalidArgumentError);
    }

    SUBCASE("an already-optimal start is returned bit-for-bit") {
        // Channel ratios that are exact binary fractions make the max-channel
        // initialization reproduce the input with zero rounding error, so the
        // initial loss is exactly zero and no move can strictly improve it.
        std::mt19937 rng(337);
        const ImagePlane B = random_plane(12, 12, rng, 0.2, 0.9);
        ColorImage I(12, 12, 0.0);
        for (std::size_t p = 0; p < B.size(); ++p) {
            I.channel(0).data()[p] = 0.5 * B.data()[p];
            I.channel(1).data()[p] = 0.25 * B.data()[p];
            I.channel(2).data()[p] = B.data()[p];
        }
        SolverConfig cfg;
        cfg.gamma = 0.0;
        cfg.stages = 1;
        const DecompositionState last = decompose(I, cfg).back();

        AdjustmentParams init;
        init.alpha = 0.0;
        init.refl_gain = 0.0;
        const FinetuneResult res = finetune(last, I, I, init, 5);
        CHECK(res.iterations == 5);
        CHECK(res.loss_trace.size() == 6);
        for (double v : res.loss_trace) CHECK(v == 0.0);
        CHECK(res.params.alpha == 0.0);
        CHECK(res.params.refl_gain == 0.0);
        for (double g : res.params.per_channel_gain) CHECK(g == 1.0);
    }

    SUBCASE("recovers the brightening amount of a synthetic pair") {
        // Constant illumination 0.25 against a guide built at 0.5 = 0.25^0.5:
        // the deficit estimate and the optimal exponent coincide at 0.5.
        std::mt19937 rng(347);
        const int n = 16;
        ColorImage R(n, n, 0.0);
        for (std::size_t p = 0; p < R.channel(0).size(); ++p) {
            std::uniform_real_distribution<double> unif(0.0, 0.2);
            R.channel(0).data()[p] = 1.0 - unif(rng);
            R.channel(1).data()[p] = 1.0 - unif(rng);
            R.channel(2).data()[p] = 1.0;
        }
        ColorImage I_l = R, guide = R;
        for (int c = 0; c < 3; ++c) {
            for (double& v : I_l.channel(c).data()) v *= 0.25;
            for (double& v : guide.channel(c).data()) v *= 0.5;
        }
        SolverConfig cfg;
        cfg.gamma = 0.0;
        cfg.stages = 1;
        const DecompositionState last = decompose(I_l, cfg).back();

        const double alpha_ref = estimate_alpha(I_l, guide);
        CHECK(alpha_ref == doctest::Approx(0.5));

        AdjustmentParams init;
        init.alpha = 0.0;
        init.refl_gain = 0.0;
        const FinetuneResult res = finetune(last, I_l, guide, init, 30);
        CHECK(std::abs(res.params.alpha - alpha_ref) <= 0.05);
        CHECK(res.loss_trace.back() <= 1e-10);
    }

    SUBCASE("trace is monotone and longer budgets never lose") {
        std::mt19937 rng(349);
        const ColorImage I = random_color(16, 16, rng, 0.02, 0.3);
        SolverConfig cfg;
        cfg.stages = 5;
        const DecompositionState last = decompose(I, cfg).back();
        const ColorImage guide = synthesize_guide(I, GuideConfig{});

        const ImagePlane L_before = last.L;
        const ColorImage R_before = last.R;

        const FinetuneResult long_run = finetune(last, I, guide, AdjustmentParams{}, 30);
        CHECK(long_run.loss_trace.size() == 31);
        for (std::size_t k = 1; k < long_run.loss_trace.size(); ++k) {
            CHECK(long_run.loss_trace[k] <= long_run.loss_trace[k - 1]);
        }
        CHECK(long_run.loss_trace.back() <= long_run.loss_trace.front() + 1e-12);

        const FinetuneResult short_run = finetune(last, I, guide, AdjustmentParams{}, 1);
        CHECK(long_run.loss_trace.back() <= short_run.loss_trace.back());

        // The decomposition is read-only for the search.
        for (std::size_t p = 0; p < L_before.size(); ++p) {
            CHECK(last.L.data()[p] == L_before.data()[p]);
        }
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < R_before.channel(c).size(); ++p) {
                CHECK(last.R.channel(c).data()[p] == R_before.channel(c).data()[p]);
            }
        }

        // Searched parameters respect their boxes.
        CHECK(long_run.params.alpha >= 0.0);
        CHECK(long_run.params.alpha <= 1.0);
        CHECK(long_run.params.refl_gain >= 0.0);
        CHECK(long_run.params.refl_gain <= 4.0);
        for (double g : long_run.params.per_channel_gain) {
            CHECK(g >= 0.25);
            CHECK(g <= 4.0);
        }
    }

    SUBCASE("non-finite losses surface with the iteration index") {
        const DecompositionState state{0, ImagePlane(4, 4, 0.5), ColorImage(4, 4, 0.5), 0.0,
                                       false};
        ColorImage guide(4, 4, 0.5);
        guide.channel(0).at(1, 1) = std::numeric_limits<double>::quiet_NaN();
        try {
            finetune(state, ColorImage(4, 4, 0.25), guide, AdjustmentParams{}, 3);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(e.stage() == 0);
        }
    }
}
