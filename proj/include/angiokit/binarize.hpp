#pragma once

#include <cstdint>
#include <span>

#include "angiokit/preprocess.hpp"
#include "angiokit/raster.hpp"

namespace angiokit::binarize {

struct OtsuResult {
    double threshold = 0.0;  // values in a bin at or above this boundary are foreground
    int split_bin = 0;       // first foreground bin
    int bins = 256;
    double between_class_variance = 0.0;
    bool degenerate = false;  // histogram has a single occupied bin
};

// Bin index for a value in [0, 1]; 1.0 falls into the last bin.
int bin_of(double v, int bins) noexcept;

/// Otsu's threshold over `bins` equal bins of [0, 1]. The split maximises the
/// between-class variance; ties go to the lowest split. A single-valued
/// input is reported as degenerate with the threshold equal to that value.
OtsuResult otsu_threshold(std::span<const double> values, int bins = 256);

inline OtsuResult otsu_threshold(const GrayImage& img, int bins = 256) {
    return otsu_threshold(img.pixels(), bins);
}
inline OtsuResult otsu_threshold(const ProbabilityMap& prob, int bins = 256) {
    return otsu_threshold(prob.pixels(), bins);
}

// Labels pixels using a previously computed split. Degenerate results label
// nothing.
BinaryMask apply_threshold(const ProbabilityMap& prob, const OtsuResult& otsu);

BinaryMask global_otsu(const ProbabilityMap& prob, int bins = 256);

/// Otsu per window of the grid; a pixel is foreground iff any covering
/// window labels it foreground.
BinaryMask patched_otsu(const ProbabilityMap& prob, const preprocess::PatchGrid& grid, int bins = 256);

enum class Connectivity { four = 4, eight = 8 };

/// Component labels (0 = background, 1.. in order of first row-major pixel).
struct Components {
    std::vector<int> labels;
    std::vector<std::size_t> sizes;  // sizes[k] for label k + 1
};

Components label_components(const BinaryMask& mask, Connectivity conn = Connectivity::eight);

/// Keeps only the largest connected component; ties go to the component with
/// the smallest row-major pixel index.
BinaryMask largest_component(const BinaryMask& mask, Connectivity conn = Connectivity::eight);

}  // namespace angiokit::binarize
