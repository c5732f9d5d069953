#include "angiokit/preprocess.hpp"

#include <cmath>
#include <random>

#include "rng.hpp"

namespace angiokit::preprocess {

GrayImage enhance(const GrayImage& img, const EnhanceParams& params) {
    require(!img.empty(), ErrorCode::InvalidInput, "enhance requires a non-empty image");
    constexpr double kEps = 1e-3;

    const GrayImage inverted = imaging::invert(img);
    const GrayImage tophat = imaging::morphology(inverted, imaging::StructuringElement::disk(params.se_radius),
                                                 imaging::MorphOp::white_tophat);
    GrayImage shifted = tophat;
    for (double& v : shifted.pixels()) v += kEps;
    const GrayImage background = imaging::gaussian_blur(shifted, params.bg_sigma);

    GrayImage corrected = tophat;
    for (std::size_t i = 0; i < corrected.size(); ++i) corrected[i] = tophat[i] / background[i];
    return imaging::rescale_unit(corrected);
}

std::vector<int> PatchGrid::axis_origins(int extent, int patch_size, int stride) {
    std::vector<int> out;
    for (int o = 0; o + patch_size <= extent; o += stride) out.push_back(o);
    if (out.back() + patch_size < extent) out.push_back(extent - patch_size);
    return out;
}

PatchGrid::PatchGrid(int image_width, int image_height, int patch_size, int stride)
    : width_(image_width), height_(image_height), patch_size_(patch_size), stride_(stride) {
    require(patch_size >= 1 && stride >= 1, ErrorCode::InvalidParameter, "patch size and stride must be >= 1");
    require(image_width >= 1 && image_height >= 1, ErrorCode::InvalidInput, "patch grid requires a non-empty image");
    require(patch_size <= std::min(image_width, image_height), ErrorCode::InvalidParameter,
            "patch size exceeds the image dimensions");
    require(stride <= patch_size, ErrorCode::InvalidParameter, "stride larger than the patch leaves gaps");
    xs_ = axis_origins(image_width, patch_size, stride);
    ys_ = axis_origins(image_height, patch_size, stride);
}

std::vector<Point> PatchGrid::origins() const {
    std::vector<Point> out;
    out.reserve(xs_.size() * ys_.size());
    for (const int y : ys_)
        for (const int x : xs_) out.push_back({x, y});
    return out;
}

namespace {

template <typename R>
std::vector<int> coverage_counts(const std::vector<Patch<R>>& patches, int width, int height) {
    std::vector<int> counts(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
    for (const auto& p : patches) {
        for (int y = 0; y < p.raster.height(); ++y) {
            const int ty = p.origin.y + y;
            if (ty < 0 || ty >= height) continue;
            for (int x = 0; x < p.raster.width(); ++x) {
                const int tx = p.origin.x + x;
                if (tx < 0 || tx >= width) continue;
                ++counts[static_cast<std::size_t>(ty) * width + tx];
            }
        }
    }
    for (const int c : counts)
        if (c == 0) fail(ErrorCode::Coverage, "stitch: patches do not cover every target pixel");
    return counts;
}

template <typename R>
R stitch_mean(const std::vector<Patch<R>>& patches, int width, int height) {
    coverage_counts(patches, width, height);
    // Running mean: identical contributions reproduce the value bit for bit.
    R out(width, height, 0.0);
    std::vector<int> seen(out.size(), 0);
    for (const auto& p : patches) {
        for (int y = 0; y < p.raster.height(); ++y) {
            const int ty = p.origin.y + y;
            if (ty < 0 || ty >= height) continue;
            for (int x = 0; x < p.raster.width(); ++x) {
                const int tx = p.origin.x + x;
                if (tx < 0 || tx >= width) continue;
                const std::size_t i = out.index(tx, ty);
                out[i] += (p.raster(x, y) - out[i]) / ++seen[i];
            }
        }
    }
    if (!patches.empty()) out.set_pixel_size_mm(patches.front().raster.pixel_size_mm());
    return out;
}

}  // namespace

BinaryMask stitch_or(const std::vector<Patch<BinaryMask>>& patches, int width, int height) {
    coverage_counts(patches, width, height);
    BinaryMask out(width, height);
    for (const auto& p : patches) {
        for (int y = 0; y < p.raster.height(); ++y) {
            const int ty = p.origin.y + y;
            if (ty < 0 || ty >= height) continue;
            for (int x = 0; x < p.raster.width(); ++x) {
                const int tx = p.origin.x + x;
                if (tx >= 0 && tx < width && p.raster(x, y)) out(tx, ty) = 1;
            }
        }
    }
    if (!patches.empty()) out.set_pixel_size_mm(patches.front().raster.pixel_size_mm());
    return out;
}

ProbabilityMap stitch_average(const std::vector<Patch<ProbabilityMap>>& patches, int width, int height) {
    return stitch_mean(patches, width, height);
}

GrayImage stitch_average(const std::vector<Patch<GrayImage>>& patches, int width, int height) {
    return stitch_mean(patches, width, height);
}

AugmentParams draw_augment_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AugmentParams p;
    p.flip_horizontal = (rng() >> 63) != 0;
    p.flip_vertical = (rng() >> 63) != 0;
    p.angle_deg = -30.0 + 60.0 * detail::unit_double(rng);
    return p;
}

std::pair<GrayImage, BinaryMask> apply_augment(const GrayImage& img, const BinaryMask& mask,
                                               const AugmentParams& params) {
    require(img.same_shape(mask), ErrorCode::InvalidInput, "augment: image and mask must be co-registered");
    const int w = img.width();
    const int h = img.height();
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    const double theta = params.angle_deg * M_PI / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    GrayImage out_img(w, h);
    BinaryMask out_mask(w, h);
    out_img.set_pixel_size_mm(img.pixel_size_mm());
    out_mask.set_pixel_size_mm(mask.pixel_size_mm());

    // Forward map: flip, then rotate about the centre. Each output pixel is
    // pulled back through the inverse. With y pointing down, a positive angle
    // appears counter-clockwise on screen.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            double sx = c * dx - s * dy + cx;
            double sy = s * dx + c * dy + cy;
            if (params.flip_horizontal) sx = (w - 1) - sx;
            if (params.flip_vertical) sy = (h - 1) - sy;

            const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int y0 = static_cast<int>(std::floor(fy));
            const double ax = fx - x0;
            const double ay = fy - y0;
            const double v00 = img.clamped(x0, y0);
            const double v10 = img.clamped(x0 + 1, y0);
            const double v01 = img.clamped(x0, y0 + 1);
            const double v11 = img.clamped(x0 + 1, y0 + 1);
            const double top = ax == 0.0 ? v00 : v00 + ax * (v10 - v00);
            const double bottom = ax == 0.0 ? v01 : v01 + ax * (v11 - v01);
            out_img(x, y) = std::clamp(ay == 0.0 ? top : top + ay * (bottom - top), 0.0, 1.0);

            const int nx = static_cast<int>(std::lround(sx));
            const int ny = static_cast<int>(std::lround(sy));
            out_mask(x, y) = mask.contains(nx, ny) && mask(nx, ny) ? 1 : 0;
        }
    }
    return {std::move(out_img), std::move(out_mask)};
}

std::pair<GrayImage, BinaryMask> augment(const GrayImage& img, const BinaryMask& mask, std::uint64_t seed) {
    return apply_augment(img, mask, draw_augment_params(seed));
}

GrayImage edge_map(const GrayImage& img, const EdgeMapParams& params) {
    require(params.denoise_sigma > 0.0, ErrorCode::InvalidParameter, "edge map denoise sigma must be > 0");
    const BinaryMask edges = imaging::canny(img, params.canny);
    const GrayImage blurred = imaging::gaussian_blur(retag<GrayImage>(edges), params.denoise_sigma);
    return imaging::rescale_unit(blurred);
}

ChannelStack::ChannelStack(StackKind kind, std::array<GrayImage, 3> channels)
    : kind_(kind), channels_(std::move(channels)) {
    for (const auto& c : channels_)
        require(c.same_shape(channels_[0]), ErrorCode::InvalidInput, "channel stack planes must share dimensions");
    if (kind_ == StackKind::stage1)
        require(channels_[0] == channels_[1] && channels_[1] == channels_[2], ErrorCode::InvalidInput,
                "stage1 stacks repeat one image in all three channels");
}

ChannelStack stack_channels(const GrayImage& img, const std::optional<ProbabilityMap>& prob,
                            const std::optional<GrayImage>& edge) {
    if (prob.has_value() != edge.has_value())
        fail(ErrorCode::InvalidCombination, "stage2 stacks need both a probability map and an edge map");
    if (!prob) return ChannelStack(StackKind::stage1, {img, img, img});
    require(prob->same_shape(img) && edge->same_shape(img), ErrorCode::InvalidInput,
            "probability and edge maps must be co-registered with the image");
    GrayImage p = retag<GrayImage>(*prob);
    p.set_pixel_size_mm(img.pixel_size_mm());
    return ChannelStack(StackKind::stage2, {img, std::move(p), *edge});
}

}  // namespace angiokit::preprocess
