#include "angiokit/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "parallel.hpp"

namespace angiokit {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::InvalidParameter: return "invalid-parameter";
        case ErrorCode::InvalidCombination: return "invalid-combination";
        case ErrorCode::Coverage: return "coverage";
        case ErrorCode::Configuration: return "configuration";
        case ErrorCode::DegenerateSegment: return "degenerate-segment";
        case ErrorCode::InvalidSpec: return "invalid-spec";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

namespace {

template <typename R>
void validate_unit_range(const R& r, const char* what) {
    for (const double v : r.pixels()) {
        if (!(v >= 0.0 && v <= 1.0))
            fail(ErrorCode::InvalidInput, std::string(what) + " values must lie in [0, 1]");
    }
    if (r.pixel_size_mm()) validate_pixel_size(*r.pixel_size_mm());
}

}  // namespace

void validate(const GrayImage& img) { validate_unit_range(img, "image"); }
void validate(const ProbabilityMap& prob) { validate_unit_range(prob, "probability map"); }
void validate(const BinaryMask& mask) {
    for (const auto v : mask.pixels()) {
        if (v > 1) fail(ErrorCode::InvalidInput, "mask values must be exactly 0 or 1");
    }
    if (mask.pixel_size_mm()) validate_pixel_size(*mask.pixel_size_mm());
}

}  // namespace angiokit

namespace angiokit::imaging {

StructuringElement::StructuringElement(int radius) : radius_(radius) {
    half_widths_.resize(static_cast<std::size_t>(2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy) {
        int w = 0;
        while ((w + 1) * (w + 1) + dy * dy <= radius * radius) ++w;
        half_widths_[static_cast<std::size_t>(dy + radius)] = w;
    }
}

StructuringElement StructuringElement::disk(int radius) {
    require(radius >= 1, ErrorCode::InvalidParameter, "structuring element radius must be >= 1");
    return StructuringElement(radius);
}

std::vector<Point> StructuringElement::offsets() const {
    std::vector<Point> out;
    for (int dy = -radius_; dy <= radius_; ++dy) {
        const int w = half_width(dy);
        for (int dx = -w; dx <= w; ++dx) out.push_back({dx, dy});
    }
    return out;
}

namespace {

using Plane = std::vector<double>;

// Erosion (take_min) or dilation by a disk, decomposed into horizontal chords.
// H_k holds the running extreme over [x-k, x+k] on each row; it is grown one
// step at a time and folded into the output for every row offset whose chord
// half-width equals k.
Plane erode_dilate(const Plane& src, int w, int h, const StructuringElement& se, bool take_min,
                   Border border) {
    const auto pick = [take_min](double a, double b) { return take_min ? std::min(a, b) : std::max(a, b); };
    const bool replicate = border.mode == Border::Mode::replicate;
    const auto sample = [&](int x, int y) {
        if (x >= 0 && x < w) return src[static_cast<std::size_t>(y) * w + x];
        if (!replicate) return border.value;
        return src[static_cast<std::size_t>(y) * w + std::clamp(x, 0, w - 1)];
    };

    const double init = take_min ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    Plane out(src.size(), init);
    Plane hk = src;
    const int r = se.radius();

    for (int k = 0; k <= r; ++k) {
        if (k > 0) {
            detail::parallel_for(static_cast<std::size_t>(h), [&](std::size_t yi) {
                const int y = static_cast<int>(yi);
                for (int x = 0; x < w; ++x) {
                    double& v = hk[yi * w + x];
                    v = pick(v, pick(sample(x - k, y), sample(x + k, y)));
                }
            });
        }
        for (int dy = -r; dy <= r; ++dy) {
            if (se.half_width(dy) != k) continue;
            detail::parallel_for(static_cast<std::size_t>(h), [&](std::size_t yi) {
                const int y = static_cast<int>(yi);
                const int sy = y + dy;
                double* dst = &out[yi * w];
                if (sy < 0 || sy >= h) {
                    if (replicate) {
                        const double* row = &hk[static_cast<std::size_t>(std::clamp(sy, 0, h - 1)) * w];
                        for (int x = 0; x < w; ++x) dst[x] = pick(dst[x], row[x]);
                    } else {
                        for (int x = 0; x < w; ++x) dst[x] = pick(dst[x], border.value);
                    }
                    return;
                }
                const double* row = &hk[static_cast<std::size_t>(sy) * w];
                for (int x = 0; x < w; ++x) dst[x] = pick(dst[x], row[x]);
            });
        }
    }
    return out;
}

Plane apply_morphology(const Plane& src, int w, int h, const StructuringElement& se, MorphOp op,
                       Border border) {
    require(w > 0 && h > 0, ErrorCode::InvalidInput, "morphology requires a non-empty image");
    switch (op) {
        case MorphOp::erode: return erode_dilate(src, w, h, se, true, border);
        case MorphOp::dilate: return erode_dilate(src, w, h, se, false, border);
        case MorphOp::open:
            return erode_dilate(erode_dilate(src, w, h, se, true, border), w, h, se, false, border);
        case MorphOp::close:
            return erode_dilate(erode_dilate(src, w, h, se, false, border), w, h, se, true, border);
        case MorphOp::black_tophat: {
            Plane closed = apply_morphology(src, w, h, se, MorphOp::close, border);
            for (std::size_t i = 0; i < closed.size(); ++i) closed[i] = std::max(0.0, closed[i] - src[i]);
            return closed;
        }
        case MorphOp::white_tophat: {
            Plane opened = apply_morphology(src, w, h, se, MorphOp::open, border);
            for (std::size_t i = 0; i < opened.size(); ++i) opened[i] = std::max(0.0, src[i] - opened[i]);
            return opened;
        }
    }
    return src;
}

}  // namespace

GrayImage morphology(const GrayImage& img, const StructuringElement& se, MorphOp op, Border border) {
    GrayImage out(img.width(), img.height(),
                  apply_morphology(img.data(), img.width(), img.height(), se, op, border));
    out.set_pixel_size_mm(img.pixel_size_mm());
    return out;
}

BinaryMask morphology(const BinaryMask& mask, const StructuringElement& se, MorphOp op, Border border) {
    const Plane src(mask.data().begin(), mask.data().end());
    const Plane res = apply_morphology(src, mask.width(), mask.height(), se, op, border);
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < res.size(); ++i) out[i] = res[i] > 0.5 ? 1 : 0;
    out.set_pixel_size_mm(mask.pixel_size_mm());
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    require(sigma > 0.0, ErrorCode::InvalidParameter, "gaussian sigma must be > 0");
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    require(!img.empty(), ErrorCode::InvalidInput, "gaussian_blur requires a non-empty image");
    const int w = img.width();
    const int h = img.height();
    const int radius = static_cast<int>(kernel.size() / 2);

    GrayImage tmp(w, h);
    detail::parallel_for(static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] * img.clamped(x + i, y);
            tmp(x, y) = acc;
        }
    });
    GrayImage out(w, h);
    detail::parallel_for(static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
            out(x, y) = acc;
        }
    });
    out.set_pixel_size_mm(img.pixel_size_mm());
    return out;
}

BinaryMask canny(const GrayImage& img, const CannyParams& params) {
    require(params.sigma > 0.0, ErrorCode::InvalidParameter, "canny sigma must be > 0");
    require(params.low_frac > 0.0 && params.low_frac < params.high_frac && params.high_frac <= 1.0,
            ErrorCode::InvalidParameter, "canny thresholds must satisfy 0 < low < high <= 1");
    require(!img.empty(), ErrorCode::InvalidInput, "canny requires a non-empty image");

    const int w = img.width();
    const int h = img.height();
    const GrayImage s = gaussian_blur(img, params.sigma);

    std::vector<double> mag(s.size());
    std::vector<std::uint8_t> dir(s.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (s.clamped(x + 1, y - 1) + 2 * s.clamped(x + 1, y) + s.clamped(x + 1, y + 1)) -
                              (s.clamped(x - 1, y - 1) + 2 * s.clamped(x - 1, y) + s.clamped(x - 1, y + 1));
            const double gy = (s.clamped(x - 1, y + 1) + 2 * s.clamped(x, y + 1) + s.clamped(x + 1, y + 1)) -
                              (s.clamped(x - 1, y - 1) + 2 * s.clamped(x, y - 1) + s.clamped(x + 1, y - 1));
            const std::size_t i = s.index(x, y);
            mag[i] = std::hypot(gx, gy);
            // Quantise the gradient direction to 0/45/90/135 degrees.
            double angle = std::atan2(gy, gx) * 180.0 / M_PI;
            if (angle < 0) angle += 180.0;
            if (angle < 22.5 || angle >= 157.5) dir[i] = 0;
            else if (angle < 67.5) dir[i] = 1;
            else if (angle < 112.5) dir[i] = 2;
            else dir[i] = 3;
        }
    }

    const double peak = *std::max_element(mag.begin(), mag.end());
    BinaryMask edges(w, h);
    edges.set_pixel_size_mm(img.pixel_size_mm());
    if (peak <= 1e-12) return edges;

    static constexpr int kStep[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
    const auto mag_at = [&](int x, int y) {
        return (x >= 0 && y >= 0 && x < w && y < h) ? mag[s.index(x, y)] : 0.0;
    };

    // Non-maximum suppression. The asymmetric comparison keeps exactly one
    // pixel across a plateau of two equal magnitudes.
    std::vector<std::uint8_t> thin(s.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = s.index(x, y);
            const double m = mag[i];
            if (m <= 1e-12) continue;
            const int dx = kStep[dir[i]][0];
            const int dy = kStep[dir[i]][1];
            if (m >= mag_at(x - dx, y - dy) && m > mag_at(x + dx, y + dy)) thin[i] = 1;
        }
    }

    const double high = params.high_frac * peak;
    const double low = params.low_frac * peak;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < thin.size(); ++i) {
        if (thin[i] && mag[i] >= high) {
            edges[i] = 1;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        const Point p = edges.point(queue.front());
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = p.x + dx;
                const int ny = p.y + dy;
                if (!edges.contains(nx, ny)) continue;
                const std::size_t j = edges.index(nx, ny);
                if (!edges[j] && thin[j] && mag[j] >= low) {
                    edges[j] = 1;
                    queue.push_back(j);
                }
            }
        }
    }

    // Staircase corners: a pixel whose two perpendicular 4-neighbours are set
    // and whose opposite diagonal is clear can go without breaking the line.
    const auto on = [&](int x, int y) { return edges.contains(x, y) && edges(x, y) != 0; };
    static constexpr int kCorner[4][2] = {{1, -1}, {-1, -1}, {-1, 1}, {1, 1}};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!edges(x, y)) continue;
            for (const auto& c : kCorner) {
                if (on(x + c[0], y) && on(x, y + c[1]) && !on(x - c[0], y - c[1])) {
                    edges(x, y) = 0;
                    break;
                }
            }
        }
    }
    return edges;
}

GrayImage rescale_unit(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    out.set_pixel_size_mm(img.pixel_size_mm());
    if (img.empty()) return out;
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    const double range = *hi - *lo;
    if (range <= 0.0) return out;
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = std::clamp((img[i] - *lo) / range, 0.0, 1.0);
    return out;
}

GrayImage invert(const GrayImage& img) {
    GrayImage out = img;
    for (double& v : out.pixels()) v = 1.0 - v;
    return out;
}

}  // namespace angiokit::imaging
