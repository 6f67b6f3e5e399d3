#include "relight/guide.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "relight/errors.hpp"

namespace relight {

namespace {

constexpr double kEpsDiv = 1e-4;
constexpr int kHistBins = 256;
constexpr int kGuidedPasses = 2;
constexpr double kGuidedEps = 1e-2;

} // namespace

void GuideConfig::validate() const {
    if (!(target_mean_luma > 0.0) || target_mean_luma >= 1.0) {
        throw ConfigError("guide: target_mean_luma must lie in (0, 1)");
    }
    if (clahe_tiles < 1) {
        throw ConfigError("guide: clahe_tiles must be at least 1");
    }
    if (!(clahe_clip > 1.0)) {
        throw ConfigError("guide: clahe_clip must exceed 1");
    }
    if (denoise_radius < 0) {
        throw ConfigError("guide: denoise_radius must be non-negative");
    }
}

namespace {

// One tile's clipped histogram, kept as the raw bin counts after uniform
// redistribution of the clipped excess, plus the running prefix sums needed
// to evaluate the equalization map.
struct TileMap {
    std::vector<double> hist;   // clipped + redistributed counts
    std::vector<double> prefix; // prefix[b] = sum of hist[0..b-1]
    double total = 0.0;

    // Piecewise-linear CDF evaluation: mass inside a bin is spread uniformly,
    // so constant inputs land near their own value instead of a bin edge.
    double map(double v) const {
        const double pos = std::clamp(v, 0.0, 1.0) * kHistBins;
        const int b = std::min(static_cast<int>(pos), kHistBins - 1);
        const double frac = pos - b;
        return (prefix[static_cast<std::size_t>(b)] +
                frac * hist[static_cast<std::size_t>(b)]) /
               total;
    }
};

TileMap build_tile_map(const ImagePlane& luma, int r0, int r1, int c0, int c1,
                       double clip_limit) {
    TileMap t;
    t.hist.assign(kHistBins, 0.0);
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            const double pos = std::clamp(luma.at(r, c), 0.0, 1.0) * kHistBins;
            const int b = std::min(static_cast<int>(pos), kHistBins - 1);
            t.hist[static_cast<std::size_t>(b)] += 1.0;
        }
    }
    t.total = static_cast<double>((r1 - r0) * (c1 - c0));

    const double clip = clip_limit * t.total / kHistBins;
    double excess = 0.0;
    for (double& h : t.hist) {
        if (h > clip) {
            excess += h - clip;
            h = clip;
        }
    }
    const double share = excess / kHistBins;
    for (double& h : t.hist) h += share;

    t.prefix.assign(kHistBins, 0.0);
    double acc = 0.0;
    for (int b = 0; b < kHistBins; ++b) {
        t.prefix[static_cast<std::size_t>(b)] = acc;
        acc += t.hist[static_cast<std::size_t>(b)];
    }
    return t;
}

} // namespace

ColorImage clahe(const ColorImage& img, int tiles, double clip_limit) {
    if (tiles < 1 || !(clip_limit > 1.0)) {
        throw InvalidArgumentError("clahe: tiles >= 1 and clip_limit > 1 required");
    }
    const int h = img.height();
    const int w = img.width();
    const int th = std::min(tiles, h);
    const int tw = std::min(tiles, w);

    const ImagePlane luma = to_gray(img);
    std::vector<TileMap> maps(static_cast<std::size_t>(th) * tw);
    auto tile_bound = [](int index, int count, int extent) {
        return (extent * index) / count;
    };
    for (int ti = 0; ti < th; ++ti) {
        for (int tj = 0; tj < tw; ++tj) {
            maps[static_cast<std::size_t>(ti) * tw + tj] = build_tile_map(
                luma, tile_bound(ti, th, h), tile_bound(ti + 1, th, h),
                tile_bound(tj, tw, w), tile_bound(tj + 1, tw, w), clip_limit);
        }
    }

    // Bilinear blend between the four surrounding tile mappings, anchored at
    // tile centers; clamped at the image border.
    auto blend = [&](int r, int c, double v) {
        const double u = (static_cast<double>(r) + 0.5) * th / h - 0.5;
        const double q = (static_cast<double>(c) + 0.5) * tw / w - 0.5;
        const int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, th - 1);
        const int j0 = std::clamp(static_cast<int>(std::floor(q)), 0, tw - 1);
        const int i1 = std::min(i0 + 1, th - 1);
        const int j1 = std::min(j0 + 1, tw - 1);
        const double fu = std::clamp(u - std::floor(u), 0.0, 1.0);
        const double fq = std::clamp(q - std::floor(q), 0.0, 1.0);
        const double m00 = maps[static_cast<std::size_t>(i0) * tw + j0].map(v);
        const double m01 = maps[static_cast<std::size_t>(i0) * tw + j1].map(v);
        const double m10 = maps[static_cast<std::size_t>(i1) * tw + j0].map(v);
        const double m11 = maps[static_cast<std::size_t>(i1) * tw + j1].map(v);
        return (1.0 - fu) * ((1.0 - fq) * m00 + fq * m01) + fu * ((1.0 - fq) * m10 + fq * m11);
    };

    ColorImage out = img;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double y_old = luma.at(r, c);
            const double y_new = blend(r, c, y_old);
            const double ratio = y_new / std::max(y_old, kEpsDiv);
            for (int ch = 0; ch < 3; ++ch) {
                out.channel(ch).at(r, c) =
                    std::clamp(img.channel(ch).at(r, c) * ratio, 0.0, 1.0);
            }
        }
    }
    return out;
}

namespace {

// Box mean of the given radius with clamped (shrinking) windows at borders,
// computed exactly via a summed-area table.
ImagePlane box_mean(const ImagePlane& in, int radius) {
    const int h = in.height();
    const int w = in.width();
    std::vector<double> sat(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    auto at = [&](int r, int c) -> double& {
        return sat[static_cast<std::size_t>(r) * (w + 1) + c];
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            at(r + 1, c + 1) = in.at(r, c) + at(r, c + 1) + at(r + 1, c) - at(r, c);
        }
    }
    ImagePlane out(h, w);
    for (int r = 0; r < h; ++r) {
        const int r0 = std::max(0, r - radius);
        const int r1 = std::min(h - 1, r + radius);
        for (int c = 0; c < w; ++c) {
            const int c0 = std::max(0, c - radius);
            const int c1 = std::min(w - 1, c + radius);
            const double sum = at(r1 + 1, c1 + 1) - at(r0, c1 + 1) - at(r1 + 1, c0) + at(r0, c0);
            out.at(r, c) = sum / ((r1 - r0 + 1) * (c1 - c0 + 1));
        }
    }
    return out;
}

ImagePlane guided_pass(const ImagePlane& p, int radius) {
    const ImagePlane m = box_mean(p, radius);
    ImagePlane sq = p;
    for (std::size_t i = 0; i < sq.size(); ++i) sq.data()[i] = p.data()[i] * p.data()[i];
    const ImagePlane msq = box_mean(sq, radius);

    ImagePlane a(p.height(), p.width());
    ImagePlane b(p.height(), p.width());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double var = std::max(msq.data()[i] - m.data()[i] * m.data()[i], 0.0);
        a.data()[i] = var / (var + kGuidedEps);
        b.data()[i] = (1.0 - a.data()[i]) * m.data()[i];
    }
    const ImagePlane ma = box_mean(a, radius);
    const ImagePlane mb = box_mean(b, radius);
    ImagePlane out(p.height(), p.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = ma.data()[i] * p.data()[i] + mb.data()[i];
    }
    return out;
}

} // namespace

ImagePlane guided_smooth(const ImagePlane& plane, int radius) {
    if (radius < 0) {
        throw InvalidArgumentError("guided_smooth: radius must be non-negative");
    }
    if (radius == 0) return plane;
    ImagePlane out = plane;
    for (int pass = 0; pass < kGuidedPasses; ++pass) {
        out = guided_pass(out, radius);
    }
    return out;
}

ColorImage guided_smooth(const ColorImage& img, int radius) {
    return ColorImage(guided_smooth(img.channel(0), radius),
                      guided_smooth(img.channel(1), radius),
                      guided_smooth(img.channel(2), radius));
}

ColorImage synthesize_guide(const ColorImage& I_l, const GuideConfig& cfg) {
    cfg.validate();
    const double luma = mean(to_gray(I_l));
    const double scale_factor = cfg.target_mean_luma / std::max(luma, kEpsDiv);
    ColorImage bright = clamp_unit(scale(I_l, scale_factor));
    ColorImage contrasted = clahe(bright, cfg.clahe_tiles, cfg.clahe_clip);
    return clamp_unit(guided_smooth(contrasted, cfg.denoise_radius));
}

} // namespace relight
