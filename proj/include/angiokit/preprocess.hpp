#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "angiokit/imaging.hpp"
#include "angiokit/raster.hpp"

namespace angiokit::preprocess {

struct EnhanceParams {
    int se_radius = 15;     // top-hat disk radius, px
    double bg_sigma = 64.0;  // background estimate for bias correction, px
};

/// Invert, white top-hat, divide by a blurred background estimate, rescale
/// to [0, 1]. A constant image yields all zeros.
GrayImage enhance(const GrayImage& img, const EnhanceParams& params = {});

/// Sliding-window layout. Origins step by `stride` along each axis; when the
/// last regular step falls short of the far border an extra origin flush
/// with the border is appended, so every pixel is covered.
class PatchGrid {
public:
    PatchGrid(int image_width, int image_height, int patch_size = 384, int stride = 32);

    int image_width() const noexcept { return width_; }
    int image_height() const noexcept { return height_; }
    int patch_size() const noexcept { return patch_size_; }
    int stride() const noexcept { return stride_; }
    const std::vector<int>& x_origins() const noexcept { return xs_; }
    const std::vector<int>& y_origins() const noexcept { return ys_; }
    // Row-major by origin: y outer, x inner.
    std::vector<Point> origins() const;

    static std::vector<int> axis_origins(int extent, int patch_size, int stride);

private:
    int width_;
    int height_;
    int patch_size_;
    int stride_;
    std::vector<int> xs_;
    std::vector<int> ys_;
};

template <typename R>
struct Patch {
    R raster;
    Point origin;
};

template <typename R>
std::vector<Patch<R>> extract_patches(const R& img, const PatchGrid& grid) {
    require(img.same_shape(grid.image_width(), grid.image_height()), ErrorCode::InvalidParameter,
            "patch grid was built for different image dimensions");
    std::vector<Patch<R>> out;
    const int n = grid.patch_size();
    for (const Point o : grid.origins()) {
        R patch(n, n);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) patch(x, y) = img(o.x + x, o.y + y);
        patch.set_pixel_size_mm(img.pixel_size_mm());
        out.push_back({std::move(patch), o});
    }
    return out;
}

// A stitched pixel is 1 iff any covering patch labels it 1. Every target
// pixel must be covered by at least one patch (Coverage error otherwise).
BinaryMask stitch_or(const std::vector<Patch<BinaryMask>>& patches, int width, int height);

// Arithmetic mean over the covering patches.
ProbabilityMap stitch_average(const std::vector<Patch<ProbabilityMap>>& patches, int width, int height);
GrayImage stitch_average(const std::vector<Patch<GrayImage>>& patches, int width, int height);

struct AugmentParams {
    bool flip_horizontal = false;
    bool flip_vertical = false;
    double angle_deg = 0.0;  // counter-clockwise, about the image centre
};

/// Draws the random transform for a seed: independent fair coins for the two
/// flips and a uniform angle in [-30, 30] degrees.
AugmentParams draw_augment_params(std::uint64_t seed);

/// Same geometric transform on both rasters. The image is resampled
/// bilinearly (edge replication), the mask by nearest neighbour (outside = 0).
std::pair<GrayImage, BinaryMask> apply_augment(const GrayImage& img, const BinaryMask& mask,
                                               const AugmentParams& params);

std::pair<GrayImage, BinaryMask> augment(const GrayImage& img, const BinaryMask& mask, std::uint64_t seed);

struct EdgeMapParams {
    imaging::CannyParams canny{};
    double denoise_sigma = 1.5;
};

GrayImage edge_map(const GrayImage& img, const EdgeMapParams& params = {});

enum class StackKind { stage1, stage2 };

/// Three co-registered planes. stage1 repeats the enhanced image; stage2 is
/// (image, probability, edge) in that order.
class ChannelStack {
public:
    ChannelStack(StackKind kind, std::array<GrayImage, 3> channels);

    StackKind kind() const noexcept { return kind_; }
    int width() const noexcept { return channels_[0].width(); }
    int height() const noexcept { return channels_[0].height(); }
    const GrayImage& channel(std::size_t i) const { return channels_.at(i); }
    const std::array<GrayImage, 3>& channels() const noexcept { return channels_; }

private:
    StackKind kind_;
    std::array<GrayImage, 3> channels_;
};

ChannelStack stack_channels(const GrayImage& img, const std::optional<ProbabilityMap>& prob = std::nullopt,
                            const std::optional<GrayImage>& edge = std::nullopt);

}  // namespace angiokit::preprocess
