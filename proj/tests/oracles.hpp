// Independent brute-force reference implementations used as test oracles.
// Nothing here shares code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "angiokit/raster.hpp"

namespace oracle {

using angiokit::BinaryMask;
using angiokit::GrayImage;

// Nearest background pixel by exhaustive search.
inline std::vector<std::int64_t> squared_edt(const BinaryMask& m) {
    std::vector<std::pair<int, int>> bg;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (!m(x, y)) bg.emplace_back(x, y);
    std::vector<std::int64_t> out(m.size(), 0);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (const auto& [bx, by] : bg) {
                const std::int64_t dx = x - bx;
                const std::int64_t dy = y - by;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[m.index(x, y)] = best;
        }
    }
    return out;
}

// Flood-fill component count of pixels equal to `value`.
inline int count_components(const BinaryMask& m, std::uint8_t value, int connectivity, bool exclude_border = false) {
    std::vector<char> seen(m.size(), 0);
    int count = 0;
    for (int y0 = 0; y0 < m.height(); ++y0) {
        for (int x0 = 0; x0 < m.width(); ++x0) {
            if (m(x0, y0) != value || seen[m.index(x0, y0)]) continue;
            bool touches = false;
            std::queue<std::pair<int, int>> q;
            q.emplace(x0, y0);
            seen[m.index(x0, y0)] = 1;
            while (!q.empty()) {
                const auto [x, y] = q.front();
                q.pop();
                if (x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1) touches = true;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (!m.contains(nx, ny) || m(nx, ny) != value || seen[m.index(nx, ny)]) continue;
                        seen[m.index(nx, ny)] = 1;
                        q.emplace(nx, ny);
                    }
                }
            }
            if (!(exclude_border && touches)) ++count;
        }
    }
    return count;
}

// 8-connected foreground components minus 4-connected holes, with the
// raster padded by background.
inline int euler_flood(const BinaryMask& m) {
    BinaryMask padded(m.width() + 2, m.height() + 2);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) padded(x + 1, y + 1) = m(x, y);
    const int objects = count_components(padded, 1, 8);
    const int holes = count_components(padded, 0, 4) - 1;
    return objects - holes;
}

// Gray's bit-quad count for 8-connectivity: E = (Q1 - Q3 - 2 QD) / 4.
inline int euler_bitquad(const BinaryMask& m) {
    int q1 = 0;
    int q3 = 0;
    int qd = 0;
    const auto at = [&](int x, int y) { return m.contains(x, y) ? int(m(x, y) != 0) : 0; };
    for (int y = -1; y < m.height(); ++y) {
        for (int x = -1; x < m.width(); ++x) {
            const int a = at(x, y);
            const int b = at(x + 1, y);
            const int c = at(x, y + 1);
            const int d = at(x + 1, y + 1);
            const int n = a + b + c + d;
            if (n == 1) ++q1;
            if (n == 3) ++q3;
            if (n == 2 && a == d && b == c) ++qd;
        }
    }
    return (q1 - q3 - 2 * qd) / 4;
}

inline bool has_full_2x2(const BinaryMask& m) {
    for (int y = 0; y + 1 < m.height(); ++y)
        for (int x = 0; x + 1 < m.width(); ++x)
            if (m(x, y) && m(x + 1, y) && m(x, y + 1) && m(x + 1, y + 1)) return true;
    return false;
}

// Textbook Otsu on a [0, 1] histogram: maximise w0 w1 (mu0 - mu1)^2 over
// splits k (class 0 = bins below k), evaluated exactly as rationals with
// 128-bit integers. Returns the lowest maximising k, or -1 without a split.
inline int otsu_split(const std::vector<double>& values, int bins) {
    std::vector<long long> hist(static_cast<std::size_t>(bins), 0);
    for (const double v : values) {
        int b = static_cast<int>(std::floor(v * bins));
        b = std::clamp(b, 0, bins - 1);
        ++hist[static_cast<std::size_t>(b)];
    }
    __extension__ typedef __int128 i128;
    int best_k = -1;
    i128 best_num = -1;
    i128 best_den = 1;
    for (int k = 1; k < bins; ++k) {
        long long n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (int b = 0; b < bins; ++b) {
            if (b < k) {
                n0 += hist[static_cast<std::size_t>(b)];
                s0 += hist[static_cast<std::size_t>(b)] * b;
            } else {
                n1 += hist[static_cast<std::size_t>(b)];
                s1 += hist[static_cast<std::size_t>(b)] * b;
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        // (mu0 - mu1)^2 n0 n1 = (s0 n1 - s1 n0)^2 / (n0 n1)
        const i128 diff = static_cast<i128>(s0) * n1 - static_cast<i128>(s1) * n0;
        const i128 num = diff * diff;
        const i128 den = static_cast<i128>(n0) * n1;
        if (best_k < 0 || num * best_den > best_num * den) {
            best_k = k;
            best_num = num;
            best_den = den;
        }
    }
    return best_k;
}

// A pixel is simple when deleting it keeps the foreground component count
// and the Euler number of the whole raster.
inline bool simple_by_topology(const BinaryMask& m, int x, int y) {
    BinaryMask cut = m;
    cut(x, y) = 0;
    return count_components(cut, 1, 8) == count_components(m, 1, 8) && euler_flood(cut) == euler_flood(m);
}

struct Confusion {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
    Confusion c;
    for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
            const bool p = pred(x, y) == 1;
            const bool g = gt(x, y) == 1;
            if (p && g) c.tp += 1;
            if (p && !g) c.fp += 1;
            if (!p && g) c.fn += 1;
            if (!p && !g) c.tn += 1;
        }
    }
    return c;
}

// Direct (non-decomposed) grayscale erosion/dilation with a disk and edge
// replication.
inline GrayImage naive_morph(const GrayImage& img, int r, bool dilate) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = dilate ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    if (dx * dx + dy * dy > r * r) continue;
                    const int sx = std::clamp(x + dx, 0, img.width() - 1);
                    const int sy = std::clamp(y + dy, 0, img.height() - 1);
                    acc = dilate ? std::max(acc, img(sx, sy)) : std::min(acc, img(sx, sy));
                }
            out(x, y) = acc;
        }
    }
    return out;
}

inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    BinaryMask m(w, h);
    std::bernoulli_distribution coin(density);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = coin(rng) ? 1 : 0;
    return m;
}

}  // namespace oracle
