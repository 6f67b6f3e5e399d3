// Unit tests for the adjustment stage: brightness estimation, the deficit
// map, the two adjustment operators, recomposition, and gamma correction.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "relight/adjust.hpp"
#include "relight/errors.hpp"
#include "relight/guide.hpp"
#include "relight/image.hpp"
#include "relight/solver.hpp"

using namespace relight;

namespace {

ColorImage random_color(int h, int w, std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unif(lo, hi);
    ColorImage img(h, w);
    for (int c = 0; c < 3; ++c) {
        for (double& v : img.channel(c).data()) v = unif(rng);
    }
    return img;
}

} // namespace

TEST_CASE("parameter validation enforces the documented boxes") {
    AdjustmentParams p;
    CHECK_NOTHROW(p.validate());
    p.alpha = -0.01;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdjustmentParams{};
    p.alpha = 1.01;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdjustmentParams{};
    p.illum_gamma_floor = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdjustmentParams{};
    p.refl_gain = -0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdjustmentParams{};
    p.per_channel_gain[1] = 0.2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdjustmentParams{};
    p.per_channel_gain[2] = 4.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("estimate_alpha measures the mean relative deficit") {
    SUBCASE("identical images give zero") {
        std::mt19937 rng(101);
        const ColorImage I = random_color(6, 6, rng, 0.0, 1.0);
        CHECK(estimate_alpha(I, I) == doctest::Approx(0.0));
    }
    SUBCASE("constant grays 0.2 against 0.8 give 0.75") {
        const ColorImage low(4, 4, 0.2);
        const ColorImage high(4, 4, 0.8);
        CHECK(estimate_alpha(low, high) == doctest::Approx(0.75));
    }
    SUBCASE("black against anything bright saturates at 1") {
        const ColorImage low(4, 4, 0.0);
        const ColorImage high(4, 4, 0.6);
        CHECK(estimate_alpha(low, high) == doctest::Approx(1.0));
    }
    SUBCASE("zero exactly when the gray images agree") {
        // Different colors, same luma: swapping channel energy keeps gray
        // fixed, so the estimate stays zero.
        ColorImage a(2, 2, 0.0), b(2, 2, 0.0);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                a.channel(0).at(r, c) = 0.587;
                b.channel(1).at(r, c) = 0.299;
            }
        }
        // gray(a) = 0.299*0.587, gray(b) = 0.587*0.299.
        CHECK(estimate_alpha(a, b) == doctest::Approx(0.0));
        CHECK(estimate_alpha(a, scale(a, 0.5)) > 0.0);
    }
    SUBCASE("mismatched shapes are rejected") {
        CHECK_THROWS_AS(estimate_alpha(ColorImage(2, 2, 0.5), ColorImage(3, 2, 0.5)),
                        InvalidArgumentError);
    }
}

TEST_CASE("lbs maps encode the per-pixel relative deficit") {
    SUBCASE("identical images give the zero map") {
        std::mt19937 rng(103);
        const ColorImage I = random_color(5, 5, rng, 0.1, 1.0);
        const LbsMap m = lbs_target(I, I);
        for (double v : m.plane.data()) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("grays 0.1 against 0.5 give 0.8") {
        const LbsMap m = lbs_target(ColorImage(2, 2, 0.1), ColorImage(2, 2, 0.5));
        for (double v : m.plane.data()) CHECK(v == doctest::Approx(0.8));
    }
    SUBCASE("black pixels in both images hit the guard and give 0") {
        const LbsMap m = lbs_target(ColorImage(2, 2, 0.0), ColorImage(2, 2, 0.0));
        for (double v : m.plane.data()) CHECK(v == 0.0);
    }
    SUBCASE("values never reach 1") {
        const LbsMap m = lbs_target(ColorImage(2, 2, 0.0), ColorImage(2, 2, 0.5));
        for (double v : m.plane.data()) {
            CHECK(v < 1.0);
            CHECK(v == doctest::Approx(1.0 - 1e-6));
        }
    }
    SUBCASE("predict equals target when the guide is the reference") {
        std::mt19937 rng(107);
        const ColorImage low = random_color(5, 5, rng, 0.0, 0.5);
        const ColorImage high = random_color(5, 5, rng, 0.3, 1.0);
        const LbsMap a = lbs_target(low, high);
        const LbsMap b = lbs_predict(low, high);
        for (std::size_t p = 0; p < a.plane.size(); ++p) {
            CHECK(a.plane.data()[p] == b.plane.data()[p]);
        }
    }
    SUBCASE("predict against the image itself is the zero map") {
        std::mt19937 rng(109);
        const ColorImage low = random_color(5, 5, rng, 0.1, 1.0);
        const LbsMap m = lbs_predict(low, low);
        for (double v : m.plane.data()) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("a synthesized guide flags the dark region harder") {
        // Mostly-dark test card with a bright strip on the right; the
        // brightness-scaled, contrast-equalized guide lifts the dark side
        // proportionally more, so its deficit values dominate.
        ColorImage card(16, 16, 0.05);
        for (int r = 0; r < 16; ++r) {
            for (int c = 12; c < 16; ++c) {
                for (int ch = 0; ch < 3; ++ch) card.channel(ch).at(r, c) = 0.8;
            }
        }
        const ColorImage guide = synthesize_guide(card, GuideConfig{});
        const LbsMap m = lbs_predict(card, guide);
        double dark = 0.0, bright = 0.0;
        int dark_n = 0, bright_n = 0;
        for (int r = 0; r < 16; ++r) {
            for (int c = 0; c < 10; ++c, ++dark_n) dark += m.plane.at(r, c);
            for (int c = 13; c < 16; ++c, ++bright_n) bright += m.plane.at(r, c);
        }
        CHECK(dark / dark_n > bright / bright_n);
    }
}

TEST_CASE("illumination adjustment is the floored power map") {
    SUBCASE("alpha = 0 is the identity") {
        std::mt19937 rng(113);
        std::uniform_real_distribution<double> unif(0.0, 1.5);
        ImagePlane L(4, 4);
        for (double& v : L.data()) v = unif(rng);
        AdjustmentParams p;
        p.alpha = 0.0;
        const ImagePlane out = adjust_illumination(L, p);
        for (std::size_t q = 0; q < L.size(); ++q) {
            CHECK(out.data()[q] == doctest::Approx(L.data()[q]).epsilon(1e-12));
        }
    }
    SUBCASE("alpha = 0.5 sends 0.25 to 0.5") {
        AdjustmentParams p;
        p.alpha = 0.5;
        const ImagePlane out = adjust_illumination(ImagePlane(1, 1, 0.25), p);
        CHECK(out.at(0, 0) == doctest::Approx(0.5));
    }
    SUBCASE("alpha = 1 bottoms out at the exponent floor") {
        AdjustmentParams p;
        p.alpha = 1.0;
        p.illum_gamma_floor = 0.1;
        const ImagePlane out = adjust_illumination(ImagePlane(1, 1, 0.5), p);
        CHECK(out.at(0, 0) == doctest::Approx(std::pow(0.5, 0.1)));
    }
    SUBCASE("pixel ordering is preserved for any alpha") {
        std::mt19937 rng(127);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        ImagePlane L(1, 10);
        for (double& v : L.data()) v = unif(rng);
        for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
            AdjustmentParams p;
            p.alpha = alpha;
            const ImagePlane out = adjust_illumination(L, p);
            for (int i = 0; i < 10; ++i) {
                for (int j = 0; j < 10; ++j) {
                    if (L.at(0, i) <= L.at(0, j)) {
                        CHECK(out.at(0, i) <= out.at(0, j));
                    }
                }
            }
        }
    }
    SUBCASE("brightening grows with alpha below the saturation point") {
        const double v = 0.3;
        double prev = 0.0;
        for (double alpha : {0.0, 0.25, 0.5, 0.75}) {
            AdjustmentParams p;
            p.alpha = alpha;
            const double cur = adjust_illumination(ImagePlane(1, 1, v), p).at(0, 0);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
    SUBCASE("negative inputs are projected to zero first") {
        AdjustmentParams p;
        p.alpha = 0.5;
        const ImagePlane out = adjust_illumination(ImagePlane(1, 1, -0.3), p);
        CHECK(out.at(0, 0) == 0.0);
    }
}

TEST_CASE("reflectance adjustment applies the deficit-weighted gains") {
    SUBCASE("neutral parameters leave in-range input unchanged") {
        std::mt19937 rng(131);
        const ColorImage R = random_color(4, 4, rng, 0.0, 1.0);
        const LbsMap zero{ImagePlane(4, 4, 0.0)};
        const ColorImage out = adjust_reflectance(R, zero, AdjustmentParams{});
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < R.channel(c).size(); ++p) {
                CHECK(out.channel(c).data()[p] == doctest::Approx(R.channel(c).data()[p]));
            }
        }
    }
    SUBCASE("scalar instance R=0.4, deficit 0.5, mixing 1 gives 0.6") {
        AdjustmentParams p;
        p.refl_gain = 1.0;
        const LbsMap m{ImagePlane(1, 1, 0.5)};
        const ColorImage out = adjust_reflectance(ColorImage(1, 1, 0.4), m, p);
        for (int c = 0; c < 3; ++c) CHECK(out.channel(c).at(0, 0) == doctest::Approx(0.6));
    }
    SUBCASE("output is always within [0,1]") {
        std::mt19937 rng(137);
        const ColorImage R = random_color(4, 4, rng, 0.0, 2.0);
        AdjustmentParams p;
        p.refl_gain = 3.0;
        p.per_channel_gain[0] = 4.0;
        p.per_channel_gain[1] = 0.25;
        p.per_channel_gain[2] = 2.0;
        const LbsMap m{ImagePlane(4, 4, 0.9)};
        const ColorImage out = adjust_reflectance(R, m, p);
        for (int c = 0; c < 3; ++c) {
            for (double v : out.channel(c).data()) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
    SUBCASE("per-channel gains act on their own channel only") {
        AdjustmentParams p;
        p.per_channel_gain[0] = 2.0;
        const LbsMap zero{ImagePlane(1, 1, 0.0)};
        const ColorImage out = adjust_reflectance(ColorImage(1, 1, 0.3), zero, p);
        CHECK(out.r().at(0, 0) == doctest::Approx(0.6));
        CHECK(out.g().at(0, 0) == doctest::Approx(0.3));
        CHECK(out.b().at(0, 0) == doctest::Approx(0.3));
    }
}

TEST_CASE("recompose multiplies and clips") {
    SUBCASE("unit illumination returns the reflectance") {
        std::mt19937 rng(139);
        const ColorImage R = random_color(3, 3, rng, 0.0, 1.0);
        const ColorImage out = recompose(R, ImagePlane(3, 3, 1.0));
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < R.channel(c).size(); ++p) {
                CHECK(out.channel(c).data()[p] == doctest::Approx(R.channel(c).data()[p]));
            }
        }
    }
    SUBCASE("a zero factor forces a zero pixel") {
        ColorImage R(2, 2, 0.7);
        ImagePlane L(2, 2, 0.9);
        R.channel(1).at(0, 1) = 0.0;
        L.at(1, 0) = 0.0;
        const ColorImage out = recompose(R, L);
        CHECK(out.channel(1).at(0, 1) == 0.0);
        for (int c = 0; c < 3; ++c) CHECK(out.channel(c).at(1, 0) == 0.0);
    }
    SUBCASE("an exact in-range factorization reproduces the image") {
        std::mt19937 rng(149);
        const ColorImage R = random_color(4, 4, rng, 0.1, 1.0);
        std::uniform_real_distribution<double> unif(0.1, 1.0);
        ImagePlane L(4, 4);
        for (double& v : L.data()) v = unif(rng);
        ColorImage I = R;
        for (int c = 0; c < 3; ++c) I.channel(c) = ewise(R.channel(c), L, EwiseOp::mul);
        const ColorImage out = recompose(R, L);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < I.channel(c).size(); ++p) {
                CHECK(out.channel(c).data()[p] == I.channel(c).data()[p]);
            }
        }
    }
    SUBCASE("round trip through the solver reproduces the input") {
        std::mt19937 rng(151);
        const ColorImage I = random_color(8, 8, rng, 0.05, 1.0);
        SolverConfig cfg;
        cfg.gamma = 0.0; // pure data-fit: the initialization factors exactly
        const auto trace = decompose(I, cfg);
        const ColorImage out = recompose(trace.back().R, trace.back().L);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < I.channel(c).size(); ++p) {
                CHECK(std::abs(out.channel(c).data()[p] - I.channel(c).data()[p]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("gamma correction") {
    SUBCASE("exponent 1 is the identity") {
        std::mt19937 rng(157);
        const ColorImage I = random_color(3, 3, rng, 0.0, 1.0);
        const ColorImage out = gamma_correct(I, 1.0);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < I.channel(c).size(); ++p) {
                CHECK(out.channel(c).data()[p] ==
                      doctest::Approx(I.channel(c).data()[p]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("0.25 at g=2 becomes 0.5") {
        const ColorImage out = gamma_correct(ColorImage(1, 1, 0.25), 2.0);
        CHECK(out.r().at(0, 0) == doctest::Approx(0.5));
    }
    SUBCASE("endpoints are fixed for any exponent") {
        ColorImage I(1, 2, 0.0);
        for (int c = 0; c < 3; ++c) I.channel(c).at(0, 1) = 1.0;
        for (double g : {0.3, 1.0, 3.0}) {
            const ColorImage out = gamma_correct(I, g);
            CHECK(out.r().at(0, 0) == 0.0);
            CHECK(out.r().at(0, 1) == doctest::Approx(1.0));
        }
    }
    SUBCASE("g and 1/g invert each other on interior values") {
        std::mt19937 rng(163);
        const ColorImage I = random_color(4, 4, rng, 0.05, 0.95);
        const ColorImage out = gamma_correct(gamma_correct(I, 2.2), 1.0 / 2.2);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < I.channel(c).size(); ++p) {
                CHECK(std::abs(out.channel(c).data()[p] - I.channel(c).data()[p]) <= 1e-9);
            }
        }
    }
    SUBCASE("non-positive exponents are rejected") {
        CHECK_THROWS_AS(gamma_correct(ColorImage(1, 1, 0.5), 0.0), InvalidArgumentError);
        CHECK_THROWS_AS(gamma_correct(ColorImage(1, 1, 0.5), -2.0), InvalidArgumentError);
    }
}

TEST_CASE("automatic gamma exponent balances mean luminance") {
    SUBCASE("a dark image gets an exponent that lands near the target") {
        const ColorImage I(8, 8, 0.1);
        const double g = auto_gc_exponent(I);
        const double m = mean(to_gray(gamma_correct(I, g)));
        CHECK(std::abs(m - 0.5) <= 1e-6);
        CHECK(g > 1.0);
    }
    SUBCASE("a bright image is dimmed with an exponent below 1") {
        const ColorImage I(8, 8, 0.75);
        const double g = auto_gc_exponent(I);
        CHECK(g < 1.0);
        CHECK(std::abs(mean(to_gray(gamma_correct(I, g))) - 0.5) <= 1e-6);
    }
    SUBCASE("an unreachable target returns the search bound") {
        const ColorImage black(8, 8, 0.0);
        const double g = auto_gc_exponent(black);
        CHECK(g == doctest::Approx(5.0));
    }
}
