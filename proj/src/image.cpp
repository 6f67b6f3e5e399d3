#include "relight/image.hpp"

#include "relight/errors.hpp"

#include <algorithm>
#include <cmath>

namespace relight {

namespace {

void require_same_shape(const ImagePlane& a, const ImagePlane& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InvalidArgumentError(std::string(what) + ": dimension mismatch (" +
                                   std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                                   std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
    }
}

} // namespace

namespace {

// Validates before the vector allocation happens; a negative extent cast to
// size_t would otherwise ask the allocator for an absurd length first.
std::size_t checked_extent(int height, int width) {
    if (height <= 0 || width <= 0) {
        throw InvalidArgumentError("ImagePlane: dimensions must be positive");
    }
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
}

} // namespace

ImagePlane::ImagePlane(int height, int width, double fill)
    : height_(height), width_(width), data_(checked_extent(height, width), fill) {}

ImagePlane::ImagePlane(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    if (height <= 0 || width <= 0) {
        throw InvalidArgumentError("ImagePlane: dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw InvalidArgumentError("ImagePlane: data length does not match height*width");
    }
}

ColorImage::ColorImage(ImagePlane r, ImagePlane g, ImagePlane b)
    : planes_{std::move(r), std::move(g), std::move(b)} {
    if (!planes_[0].same_shape(planes_[1]) || !planes_[0].same_shape(planes_[2])) {
        throw InvalidArgumentError("ColorImage: channels must share dimensions");
    }
}

ColorImage::ColorImage(int height, int width, double fill)
    : planes_{ImagePlane(height, width, fill), ImagePlane(height, width, fill),
              ImagePlane(height, width, fill)} {}

ImagePlane ewise(const ImagePlane& a, const ImagePlane& b, EwiseOp op, double eps_div) {
    require_same_shape(a, b, "ewise");
    ImagePlane out(a.height(), a.width());
    const auto& da = a.data();
    const auto& db = b.data();
    auto& dst = out.data();
    switch (op) {
    case EwiseOp::mul:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = da[i] * db[i];
        break;
    case EwiseOp::div:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = da[i] / std::max(db[i], eps_div);
        break;
    case EwiseOp::add:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = da[i] + db[i];
        break;
    case EwiseOp::sub:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = da[i] - db[i];
        break;
    }
    return out;
}

ColorImage ewise(const ColorImage& a, const ColorImage& b, EwiseOp op, double eps_div) {
    return ColorImage(ewise(a.channel(0), b.channel(0), op, eps_div),
                      ewise(a.channel(1), b.channel(1), op, eps_div),
                      ewise(a.channel(2), b.channel(2), op, eps_div));
}

ImagePlane diff_conv(const ImagePlane& img, DiffAxis axis) {
    const int h = img.height();
    const int w = img.width();
    const int extent = (axis == DiffAxis::vertical) ? h : w;
    if (extent < 3) {
        throw InvalidArgumentError("diff_conv: axis extent must be at least 3");
    }
    ImagePlane out(h, w);
    if (axis == DiffAxis::horizontal) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const int left = std::max(c - 1, 0);
                const int right = std::min(c + 1, w - 1);
                out.at(r, c) = img.at(r, left) - img.at(r, right);
            }
        }
    } else {
        for (int r = 0; r < h; ++r) {
            const int up = std::max(r - 1, 0);
            const int down = std::min(r + 1, h - 1);
            for (int c = 0; c < w; ++c) {
                out.at(r, c) = img.at(up, c) - img.at(down, c);
            }
        }
    }
    return out;
}

// Scatter form of the transpose: forward output p reads +1 from clamp(p-1)
// and -1 from clamp(p+1), so the adjoint accumulates u(p) at those indices.
ImagePlane diff_conv_transpose(const ImagePlane& img, DiffAxis axis) {
    const int h = img.height();
    const int w = img.width();
    const int extent = (axis == DiffAxis::vertical) ? h : w;
    if (extent < 3) {
        throw InvalidArgumentError("diff_conv_transpose: axis extent must be at least 3");
    }
    ImagePlane out(h, w, 0.0);
    if (axis == DiffAxis::horizontal) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const double v = img.at(r, c);
                out.at(r, std::max(c - 1, 0)) += v;
                out.at(r, std::min(c + 1, w - 1)) -= v;
            }
        }
    } else {
        for (int r = 0; r < h; ++r) {
            const int up = std::max(r - 1, 0);
            const int down = std::min(r + 1, h - 1);
            for (int c = 0; c < w; ++c) {
                const double v = img.at(r, c);
                out.at(up, c) += v;
                out.at(down, c) -= v;
            }
        }
    }
    return out;
}

ImagePlane to_gray(const ColorImage& img) {
    ImagePlane out(img.height(), img.width());
    const auto& r = img.channel(0).data();
    const auto& g = img.channel(1).data();
    const auto& b = img.channel(2).data();
    auto& dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    }
    return out;
}

ImagePlane scale(const ImagePlane& a, double factor) {
    ImagePlane out = a;
    for (double& v : out.data()) v *= factor;
    return out;
}

ColorImage scale(const ColorImage& a, double factor) {
    return ColorImage(scale(a.channel(0), factor), scale(a.channel(1), factor),
                      scale(a.channel(2), factor));
}

ImagePlane offset(const ImagePlane& a, double value) {
    ImagePlane out = a;
    for (double& v : out.data()) v += value;
    return out;
}

ImagePlane clamp_non_negative(const ImagePlane& a) {
    ImagePlane out = a;
    for (double& v : out.data()) v = std::max(v, 0.0);
    return out;
}

ImagePlane clamp_unit(const ImagePlane& a) {
    ImagePlane out = a;
    for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
    return out;
}

ColorImage clamp_unit(const ColorImage& a) {
    return ColorImage(clamp_unit(a.channel(0)), clamp_unit(a.channel(1)), clamp_unit(a.channel(2)));
}

ImagePlane channel_max(const ColorImage& img) {
    ImagePlane out(img.height(), img.width());
    const auto& r = img.channel(0).data();
    const auto& g = img.channel(1).data();
    const auto& b = img.channel(2).data();
    auto& dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = std::max(r[i], std::max(g[i], b[i]));
    }
    return out;
}

double mean(const ImagePlane& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v;
    return sum / static_cast<double>(a.size());
}

} // namespace relight
