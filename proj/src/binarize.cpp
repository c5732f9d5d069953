#include "angiokit/binarize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "parallel.hpp"

namespace angiokit::binarize {

namespace {

__extension__ typedef unsigned __int128 u128;
__extension__ typedef __int128 i128;

// diff^2 / den with exact comparison.
struct Ratio {
    u128 diff;
    std::uint64_t den;
};

// Product of a 128-bit and a 64-bit unsigned value as three 64-bit limbs.
std::array<std::uint64_t, 3> mul(u128 x, std::uint64_t y) {
    const auto lo = static_cast<u128>(static_cast<std::uint64_t>(x)) * y;
    const auto hi = static_cast<u128>(static_cast<std::uint64_t>(x >> 64)) * y;
    const u128 mid = (lo >> 64) + static_cast<std::uint64_t>(hi);
    return {static_cast<std::uint64_t>((hi >> 64) + static_cast<std::uint64_t>(mid >> 64)),
            static_cast<std::uint64_t>(mid), static_cast<std::uint64_t>(lo)};
}

// a.diff^2 * b.den > b.diff^2 * a.den. With fewer than 2^24 samples and at
// most 2^16 bins each diff is below 2^64, so its square fits in 128 bits.
bool greater(const Ratio& a, const Ratio& b) {
    return mul(a.diff * a.diff, b.den) > mul(b.diff * b.diff, a.den);
}

}  // namespace

int bin_of(double v, int bins) noexcept {
    const int b = static_cast<int>(std::floor(v * bins));
    return std::clamp(b, 0, bins - 1);
}

OtsuResult otsu_threshold(std::span<const double> values, int bins) {
    require(!values.empty(), ErrorCode::InvalidInput, "otsu_threshold requires a non-empty raster");
    require(bins >= 2 && bins <= 65536, ErrorCode::InvalidParameter, "otsu_threshold requires 2 to 65536 bins");
    require(values.size() < (std::size_t{1} << 24), ErrorCode::InvalidInput, "otsu_threshold supports fewer than 2^24 samples");

    std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
    for (const double v : values) ++hist[static_cast<std::size_t>(bin_of(v, bins))];

    OtsuResult res;
    res.bins = bins;
    const auto occupied = std::count_if(hist.begin(), hist.end(), [](std::int64_t c) { return c > 0; });
    if (occupied <= 1) {
        res.degenerate = true;
        res.threshold = *std::min_element(values.begin(), values.end());
        res.split_bin = bin_of(res.threshold, bins);
        return res;
    }

    // The criterion (n0 s1 - n1 s0)^2 / (n0 n1) is proportional to the
    // between-class variance and is compared exactly in integers, so ties are
    // real ties and resolve to the lowest split.
    const auto total = static_cast<std::int64_t>(values.size());
    std::int64_t total_sum = 0;
    for (int b = 0; b < bins; ++b) total_sum += hist[static_cast<std::size_t>(b)] * b;

    std::int64_t n0 = 0;
    std::int64_t s0 = 0;
    bool have = false;
    Ratio best{};
    for (int k = 1; k < bins; ++k) {
        n0 += hist[static_cast<std::size_t>(k - 1)];
        s0 += hist[static_cast<std::size_t>(k - 1)] * (k - 1);
        const std::int64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const std::int64_t s1 = total_sum - s0;
        const i128 diff = static_cast<i128>(n0) * s1 - static_cast<i128>(n1) * s0;
        const Ratio r{static_cast<u128>(diff < 0 ? -diff : diff),
                      static_cast<std::uint64_t>(n0) * static_cast<std::uint64_t>(n1)};
        if (!have || greater(r, best)) {
            best = r;
            have = true;
            res.split_bin = k;
        }
    }
    {
        const double d = static_cast<double>(best.diff);
        const double nn = static_cast<double>(total);
        res.between_class_variance = d * d / (static_cast<double>(best.den) * nn * nn) / (static_cast<double>(bins) * bins);
    }
    res.threshold = static_cast<double>(res.split_bin) / bins;
    return res;
}

BinaryMask apply_threshold(const ProbabilityMap& prob, const OtsuResult& otsu) {
    BinaryMask out(prob.width(), prob.height());
    out.set_pixel_size_mm(prob.pixel_size_mm());
    if (otsu.degenerate) return out;
    for (std::size_t i = 0; i < prob.size(); ++i) out[i] = bin_of(prob[i], otsu.bins) >= otsu.split_bin ? 1 : 0;
    return out;
}

BinaryMask global_otsu(const ProbabilityMap& prob, int bins) {
    return apply_threshold(prob, otsu_threshold(prob, bins));
}

namespace {

// Index range [first, last] of origins whose window covers coordinate c.
std::pair<std::size_t, std::size_t> covering(const std::vector<int>& origins, int size, int c) {
    std::size_t first = origins.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < origins.size(); ++i) {
        if (origins[i] <= c && c < origins[i] + size) {
            first = std::min(first, i);
            last = i;
        }
    }
    return {first, last};
}

}  // namespace

BinaryMask patched_otsu(const ProbabilityMap& prob, const preprocess::PatchGrid& grid, int bins) {
    require(prob.same_shape(grid.image_width(), grid.image_height()), ErrorCode::InvalidParameter,
            "patch grid was built for different raster dimensions");
    const auto& xs = grid.x_origins();
    const auto& ys = grid.y_origins();
    const int n = grid.patch_size();
    const std::size_t nx = xs.size();

    // A pixel is foreground in a window iff its bin reaches that window's
    // split, so the OR over covering windows reduces to comparing against
    // the smallest split among them. Degenerate windows never label.
    constexpr int kNever = std::numeric_limits<int>::max();
    std::vector<int> split(nx * ys.size(), kNever);
    detail::parallel_for(split.size(), [&](std::size_t w) {
        const int ox = xs[w % nx];
        const int oy = ys[w / nx];
        std::vector<double> window;
        window.reserve(static_cast<std::size_t>(n) * n);
        for (int y = oy; y < oy + n; ++y)
            for (int x = ox; x < ox + n; ++x) window.push_back(prob(x, y));
        const OtsuResult r = otsu_threshold(window, bins);
        if (!r.degenerate) split[w] = r.split_bin;
    });

    const int width = prob.width();
    const int height = prob.height();
    std::vector<std::pair<std::size_t, std::size_t>> x_cover(static_cast<std::size_t>(width));
    for (int x = 0; x < width; ++x) x_cover[static_cast<std::size_t>(x)] = covering(xs, n, x);

    // row_min[iy][x]: smallest split over windows in grid row iy covering x.
    std::vector<int> row_min(ys.size() * static_cast<std::size_t>(width), kNever);
    for (std::size_t iy = 0; iy < ys.size(); ++iy) {
        for (int x = 0; x < width; ++x) {
            const auto [a, b] = x_cover[static_cast<std::size_t>(x)];
            int m = kNever;
            for (std::size_t ix = a; ix <= b; ++ix) m = std::min(m, split[iy * nx + ix]);
            row_min[iy * width + x] = m;
        }
    }

    BinaryMask out(width, height);
    out.set_pixel_size_mm(prob.pixel_size_mm());
    detail::parallel_for(static_cast<std::size_t>(height), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        const auto [a, b] = covering(ys, n, y);
        for (int x = 0; x < width; ++x) {
            int m = kNever;
            for (std::size_t iy = a; iy <= b; ++iy) m = std::min(m, row_min[iy * width + x]);
            if (m != kNever && bin_of(prob(x, y), bins) >= m) out(x, y) = 1;
        }
    });
    return out;
}

Components label_components(const BinaryMask& mask, Connectivity conn) {
    Components c;
    c.labels.assign(mask.size(), 0);
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::size_t> stack;
    int next = 0;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || c.labels[start] != 0) continue;
        ++next;
        std::size_t size = 0;
        c.labels[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            ++size;
            const Point p = mask.point(i);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (conn == Connectivity::four && dx != 0 && dy != 0) continue;
                    const int x = p.x + dx;
                    const int y = p.y + dy;
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    const std::size_t j = mask.index(x, y);
                    if (mask[j] && c.labels[j] == 0) {
                        c.labels[j] = next;
                        stack.push_back(j);
                    }
                }
            }
        }
        c.sizes.push_back(size);
    }
    return c;
}

BinaryMask largest_component(const BinaryMask& mask, Connectivity conn) {
    BinaryMask out(mask.width(), mask.height());
    out.set_pixel_size_mm(mask.pixel_size_mm());
    const Components c = label_components(mask, conn);
    if (c.sizes.empty()) return out;
    // Labels follow first-pixel order, so the first maximum wins ties.
    const auto best = std::max_element(c.sizes.begin(), c.sizes.end());
    const int keep = static_cast<int>(best - c.sizes.begin()) + 1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.labels[i] == keep ? 1 : 0;
    return out;
}

}  // namespace angiokit::binarize
