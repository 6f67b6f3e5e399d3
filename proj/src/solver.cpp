#include "relight/solver.hpp"

#include "relight/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace relight {

void ProxChoice::validate() const {
    if (kind == ProxKind::gaussian_smooth && !(width > 0.0)) {
        throw ConfigError("prox: gaussian_smooth width must be positive");
    }
    if (kind == ProxKind::weighted_smooth && !(strength > 0.0)) {
        throw ConfigError("prox: weighted_smooth strength must be positive");
    }
}

void SolverConfig::validate() const {
    if (gamma < 0.0 || lambda < 0.0) {
        throw ConfigError("solver: gamma and lambda must be non-negative");
    }
    if (!(sigma > 0.0) || !(eta1 > 0.0) || !(eta2 > 0.0) || !(eps_div > 0.0)) {
        throw ConfigError("solver: sigma, eta1, eta2 and eps_div must be positive");
    }
    if (stages < 1) {
        throw ConfigError("solver: stages must be at least 1");
    }
    prox_l.validate();
    prox_r.validate();
}

AmplifiedGradient amplified_gradient(const ColorImage& I, double lambda, double sigma) {
    if (lambda < 0.0 || !(sigma > 0.0)) {
        throw InvalidArgumentError("amplified_gradient: lambda >= 0 and sigma > 0 required");
    }
    auto amplify = [&](const ImagePlane& raw) {
        ImagePlane out = raw;
        for (double& v : out.data()) {
            v *= 1.0 + lambda * std::exp(-std::abs(v) / sigma);
        }
        return out;
    };
    AmplifiedGradient g;
    for (int c = 0; c < 3; ++c) {
        g.gx.channel(c) = amplify(diff_conv(I.channel(c), DiffAxis::vertical));
        g.gy.channel(c) = amplify(diff_conv(I.channel(c), DiffAxis::horizontal));
    }
    return g;
}

ImagePlane newton_dir_L_plane(const ImagePlane& R, const ImagePlane& L, const ImagePlane& I,
                              double eps_div) {
    ImagePlane out(L.height(), L.width());
    const auto& r = R.data();
    const auto& l = L.data();
    const auto& i = I.data();
    auto& d = out.data();
    for (std::size_t p = 0; p < d.size(); ++p) {
        d[p] = r[p] * (r[p] * l[p] - i[p]) / std::max(r[p] * r[p], eps_div);
    }
    return out;
}

ImagePlane newton_dir_L(const ColorImage& R, const ImagePlane& L, const ColorImage& I,
                        double eps_div) {
    ImagePlane acc(L.height(), L.width(), 0.0);
    for (int c = 0; c < 3; ++c) {
        const ImagePlane d = newton_dir_L_plane(R.channel(c), L, I.channel(c), eps_div);
        for (std::size_t p = 0; p < acc.size(); ++p) acc.data()[p] += d.data()[p];
    }
    for (double& v : acc.data()) v /= 3.0;
    return acc;
}

ImagePlane newton_dir_R_plane(const ImagePlane& R, const ImagePlane& L, const ImagePlane& I,
                              const ImagePlane& gx, const ImagePlane& gy, double gamma,
                              double eps_div) {
    ImagePlane prior(L.height(), L.width(), 0.0);
    if (gamma > 0.0) {
        ImagePlane rx = diff_conv(R, DiffAxis::vertical);
        ImagePlane ry = diff_conv(R, DiffAxis::horizontal);
        for (std::size_t p = 0; p < rx.size(); ++p) {
            rx.data()[p] -= gx.data()[p];
            ry.data()[p] -= gy.data()[p];
        }
        const ImagePlane ax = diff_conv_transpose(rx, DiffAxis::vertical);
        const ImagePlane ay = diff_conv_transpose(ry, DiffAxis::horizontal);
        for (std::size_t p = 0; p < prior.size(); ++p) {
            prior.data()[p] = 0.5 * gamma * (ax.data()[p] + ay.data()[p]);
        }
    }
    ImagePlane out(L.height(), L.width());
    const auto& r = R.data();
    const auto& l = L.data();
    const auto& i = I.data();
    auto& d = out.data();
    for (std::size_t p = 0; p < d.size(); ++p) {
        const double numer = (r[p] * l[p] - i[p]) * l[p] + prior.data()[p];
        d[p] = numer / std::max(l[p] * l[p] + 4.0 * gamma, eps_div);
    }
    return out;
}

ColorImage newton_dir_R(const ColorImage& R, const ImagePlane& L, const ColorImage& I,
                        const AmplifiedGradient& G, double gamma, double eps_div) {
    ColorImage out;
    for (int c = 0; c < 3; ++c) {
        out.channel(c) = newton_dir_R_plane(R.channel(c), L, I.channel(c), G.gx.channel(c),
                                            G.gy.channel(c), gamma, eps_div);
    }
    return out;
}

namespace {

ImagePlane gaussian_smooth(const ImagePlane& in, double width) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * width)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (width * width));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    const int h = in.height();
    const int w = in.width();
    ImagePlane tmp(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       in.at(r, std::clamp(c + i, 0, w - 1));
            }
            tmp.at(r, c) = acc;
        }
    }
    ImagePlane out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       tmp.at(std::clamp(r + i, 0, h - 1), c);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

// One Jacobi relaxation of edge-weighted diffusion over the 4-neighborhood.
// Weights are computed from the input once and held fixed for the step.
ImagePlane weighted_smooth(const ImagePlane& in, double strength) {
    const int h = in.height();
    const int w = in.width();
    ImagePlane out(h, w);
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double center = in.at(r, c);
            double acc = center;
            double wsum = 1.0;
            for (int n = 0; n < 4; ++n) {
                const int rr = r + dr[n];
                const int cc = c + dc[n];
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                const double v = in.at(rr, cc);
                const double wgt = std::exp(-std::abs(center - v) / strength);
                acc += wgt * v;
                wsum += wgt;
            }
            out.at(r, c) = acc / wsum;
        }
    }
    return out;
}

} // namespace

ImagePlane apply_prox(const ImagePlane& plane, const ProxChoice& choice) {
    choice.validate();
    switch (choice.kind) {
    case ProxKind::identity:
        return clamp_non_negative(plane);
    case ProxKind::gaussian_smooth:
        return clamp_non_negative(gaussian_smooth(plane, choice.width));
    case ProxKind::weighted_smooth:
        return clamp_non_negative(weighted_smooth(plane, choice.strength));
    }
    throw InvalidArgumentError("apply_prox: unknown prox kind");
}

ColorImage apply_prox(const ColorImage& img, const ProxChoice& choice) {
    return ColorImage(apply_prox(img.channel(0), choice), apply_prox(img.channel(1), choice),
                      apply_prox(img.channel(2), choice));
}

double objective(const ColorImage& R, const ImagePlane& L, const ColorImage& I,
                 const AmplifiedGradient& G, const SolverConfig& cfg) {
    double value = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& r = R.channel(c).data();
        const auto& i = I.channel(c).data();
        const auto& l = L.data();
        for (std::size_t p = 0; p < l.size(); ++p) {
            const double res = i[p] - r[p] * l[p];
            value += 0.5 * res * res;
        }
        if (cfg.gamma > 0.0) {
            const ImagePlane rx = diff_conv(R.channel(c), DiffAxis::vertical);
            const ImagePlane ry = diff_conv(R.channel(c), DiffAxis::horizontal);
            const auto& gx = G.gx.channel(c).data();
            const auto& gy = G.gy.channel(c).data();
            for (std::size_t p = 0; p < l.size(); ++p) {
                const double ex = rx.data()[p] - gx[p];
                const double ey = ry.data()[p] - gy[p];
                value += 0.25 * cfg.gamma * (ex * ex + ey * ey);
            }
        }
    }
    return value;
}

namespace {

constexpr int kMaxHalvings = 8;

struct PlaneStep {
    ImagePlane value;
    double objective;
    bool exhausted;
};

} // namespace

std::vector<DecompositionState> decompose(const ColorImage& I, const SolverConfig& cfg) {
    cfg.validate();
    const AmplifiedGradient G = amplified_gradient(I, cfg.lambda, cfg.sigma);

    ImagePlane L = clamp_non_negative(channel_max(I));
    ColorImage R;
    for (int c = 0; c < 3; ++c) {
        R.channel(c) = clamp_non_negative(ewise(I.channel(c), L, EwiseOp::div, cfg.eps_div));
    }

    std::vector<DecompositionState> trace;
    trace.reserve(static_cast<std::size_t>(cfg.stages) + 1);
    double obj = objective(R, L, I, G, cfg);
    if (!std::isfinite(obj)) {
        throw NumericError("decompose: non-finite objective at initialization", 0);
    }
    trace.push_back({0, L, R, obj, false});

    for (int k = 1; k <= cfg.stages; ++k) {
        bool exhausted = false;

        // Illumination step.
        {
            const ImagePlane dL = newton_dir_L(R, L, I, cfg.eps_div);
            double eta = cfg.eta1;
            PlaneStep best{L, obj, false};
            for (int t = 0;; ++t) {
                ImagePlane cand(L.height(), L.width());
                for (std::size_t p = 0; p < cand.size(); ++p) {
                    cand.data()[p] = L.data()[p] - eta * dL.data()[p];
                }
                cand = apply_prox(cand, cfg.prox_l);
                const double cand_obj = objective(R, cand, I, G, cfg);
                if (!cfg.safeguard || cand_obj <= obj) {
                    best = {std::move(cand), cand_obj, false};
                    break;
                }
                if (t == kMaxHalvings) {
                    // No step length descended: keep the iterate so the trace
                    // stays monotone, and record that the search ran out.
                    best = {L, obj, true};
                    break;
                }
                eta *= 0.5;
            }
            L = std::move(best.value);
            obj = best.objective;
            exhausted = exhausted || best.exhausted;
        }

        // Reflectance step.
        {
            const ColorImage dR = newton_dir_R(R, L, I, G, cfg.gamma, cfg.eps_div);
            double eta = cfg.eta2;
            ColorImage best = R;
            double best_obj = obj;
            bool step_exhausted = false;
            for (int t = 0;; ++t) {
                ColorImage cand;
                for (int c = 0; c < 3; ++c) {
                    ImagePlane plane(L.height(), L.width());
                    for (std::size_t p = 0; p < plane.size(); ++p) {
                        plane.data()[p] = R.channel(c).data()[p] - eta * dR.channel(c).data()[p];
                    }
                    cand.channel(c) = std::move(plane);
                }
                cand = apply_prox(cand, cfg.prox_r);
                const double cand_obj = objective(cand, L, I, G, cfg);
                if (!cfg.safeguard || cand_obj <= obj) {
                    best = std::move(cand);
                    best_obj = cand_obj;
                    break;
                }
                if (t == kMaxHalvings) {
                    // Same policy as the illumination step: a failed search
                    // leaves R untouched rather than forcing an uphill move.
                    step_exhausted = true;
                    break;
                }
                eta *= 0.5;
            }
            R = std::move(best);
            obj = best_obj;
            exhausted = exhausted || step_exhausted;
        }

        if (!std::isfinite(obj)) {
            throw NumericError("decompose: non-finite objective at stage " + std::to_string(k), k);
        }
        trace.push_back({k, L, R, obj, exhausted});
    }
    return trace;
}

} // namespace relight
