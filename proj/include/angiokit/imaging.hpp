#pragma once

#include <vector>

#include "angiokit/raster.hpp"

namespace angiokit::imaging {

/// Discrete disk: offset (dx, dy) belongs to the element iff dx² + dy² ≤ r².
class StructuringElement {
public:
    static StructuringElement disk(int radius);

    int radius() const noexcept { return radius_; }
    // Half-width of the horizontal chord at row offset dy, |dy| ≤ radius.
    int half_width(int dy) const noexcept { return half_widths_[static_cast<std::size_t>(dy + radius_)]; }
    std::vector<Point> offsets() const;

private:
    explicit StructuringElement(int radius);

    int radius_;
    std::vector<int> half_widths_;
};

enum class MorphOp { erode, dilate, open, close, black_tophat, white_tophat };

// Neighbourhood reads outside the raster either replicate the nearest edge
// pixel (default) or see a constant.
struct Border {
    enum class Mode { replicate, constant } mode = Mode::replicate;
    double value = 0.0;

    static Border replicate() { return {}; }
    static Border constant(double v) { return {Mode::constant, v}; }
};

GrayImage morphology(const GrayImage& img, const StructuringElement& se, MorphOp op,
                     Border border = Border::replicate());
BinaryMask morphology(const BinaryMask& mask, const StructuringElement& se, MorphOp op,
                      Border border = Border::replicate());

/// Separable Gaussian blur; kernel truncated at ⌈3σ⌉ and renormalised,
/// borders replicated.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

std::vector<double> gaussian_kernel(double sigma);

struct CannyParams {
    double sigma = 1.0;
    double low_frac = 0.1;   // of the maximum gradient magnitude
    double high_frac = 0.3;
};

/// Gaussian smoothing, Sobel gradient, non-maximum suppression and
/// hysteresis (8-connected). Returns a thin edge mask.
BinaryMask canny(const GrayImage& img, const CannyParams& params);

/// Linear rescale to [0, 1]; constant input maps to all zeros.
GrayImage rescale_unit(const GrayImage& img);

GrayImage invert(const GrayImage& img);

}  // namespace angiokit::imaging
