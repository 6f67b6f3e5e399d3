#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace relight {

// Dense row-major plane of double intensities. Nominal range is [0,1] but the
// type does not clamp; operations in this module keep values finite.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int height, int width, double fill = 0.0);
    ImagePlane(int height, int width, std::vector<double> data);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }

    double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const ImagePlane& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

// Three planes of identical shape, r/g/b order.
class ColorImage {
public:
    ColorImage() = default;
    ColorImage(ImagePlane r, ImagePlane g, ImagePlane b);
    ColorImage(int height, int width, double fill = 0.0);

    int height() const { return planes_[0].height(); }
    int width() const { return planes_[0].width(); }

    const ImagePlane& channel(int c) const { return planes_[static_cast<std::size_t>(c)]; }
    ImagePlane& channel(int c) { return planes_[static_cast<std::size_t>(c)]; }

    const ImagePlane& r() const { return planes_[0]; }
    const ImagePlane& g() const { return planes_[1]; }
    const ImagePlane& b() const { return planes_[2]; }

    bool same_shape(const ColorImage& other) const {
        return planes_[0].same_shape(other.planes_[0]);
    }

private:
    std::array<ImagePlane, 3> planes_;
};

enum class EwiseOp { mul, div, add, sub };

// The two fixed 3-tap difference kernels [1, 0, -1]. Vertical differences
// along rows (top neighbor minus bottom neighbor), horizontal along columns.
enum class DiffAxis { vertical, horizontal };

// Element-wise arithmetic. div divides by max(b, eps_div) so the result is
// finite for any finite inputs.
ImagePlane ewise(const ImagePlane& a, const ImagePlane& b, EwiseOp op, double eps_div = 1e-4);
ColorImage ewise(const ColorImage& a, const ColorImage& b, EwiseOp op, double eps_div = 1e-4);

// Same-size correlation with taps [1, 0, -1] along the axis, replicate
// padding: output(p) = img(p-1) - img(p+1) with clamped indices.
ImagePlane diff_conv(const ImagePlane& img, DiffAxis axis);

// Exact adjoint of diff_conv under the Frobenius inner product.
ImagePlane diff_conv_transpose(const ImagePlane& img, DiffAxis axis);

// BT.601 luma: 0.299 r + 0.587 g + 0.114 b.
ImagePlane to_gray(const ColorImage& img);

// Convenience element-wise helpers used throughout the solver.
ImagePlane scale(const ImagePlane& a, double factor);
ColorImage scale(const ColorImage& a, double factor);
ImagePlane offset(const ImagePlane& a, double value);
ImagePlane clamp_non_negative(const ImagePlane& a);
ImagePlane clamp_unit(const ImagePlane& a);
ColorImage clamp_unit(const ColorImage& a);
ImagePlane channel_max(const ColorImage& img);
double mean(const ImagePlane& a);

} // namespace relight
