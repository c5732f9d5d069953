#include "angiokit/vesseltree.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <deque>

#include "parallel.hpp"

namespace angiokit::vesseltree {

namespace {

constexpr std::int64_t kInf = std::int64_t{1} << 50;

// Squared-distance lower envelope of parabolas (x - q)^2 + f[q] over one line.
void envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& d, std::vector<int>& v,
                 std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    const auto intersect = [&](int q, int p) {
        return (static_cast<double>(f[static_cast<std::size_t>(q)] + std::int64_t{q} * q) -
                static_cast<double>(f[static_cast<std::size_t>(p)] + std::int64_t{p} * p)) /
               (2.0 * (q - p));
    };
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[static_cast<std::size_t>(k)]);
        while (s <= z[static_cast<std::size_t>(k)]) {
            --k;
            s = intersect(q, v[static_cast<std::size_t>(k)]);
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
        const std::int64_t p = v[static_cast<std::size_t>(k)];
        d[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
    }
}

}  // namespace

DistanceField distance_transform(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    DistanceField out{Raster<std::int64_t, SquaredDistanceTag>(w, h), Raster<double, DistanceTag>(w, h)};
    out.squared.set_pixel_size_mm(mask.pixel_size_mm());
    out.distance.set_pixel_size_mm(mask.pixel_size_mm());
    if (mask.empty()) return out;

    std::vector<std::int64_t> work(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) work[i] = mask[i] ? kInf : 0;

    detail::parallel_for(static_cast<std::size_t>(w), [&](std::size_t x) {
        std::vector<std::int64_t> f(static_cast<std::size_t>(h));
        std::vector<std::int64_t> d(static_cast<std::size_t>(h));
        std::vector<int> v(static_cast<std::size_t>(h));
        std::vector<double> z(static_cast<std::size_t>(h) + 1);
        for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = work[static_cast<std::size_t>(y) * w + x];
        envelope_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) work[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
    });
    detail::parallel_for(static_cast<std::size_t>(h), [&](std::size_t y) {
        std::vector<std::int64_t> f(work.begin() + static_cast<std::ptrdiff_t>(y * w),
                                    work.begin() + static_cast<std::ptrdiff_t>((y + 1) * w));
        std::vector<std::int64_t> d(static_cast<std::size_t>(w));
        std::vector<int> v(static_cast<std::size_t>(w));
        std::vector<double> z(static_cast<std::size_t>(w) + 1);
        envelope_1d(f, d, v, z);
        std::copy(d.begin(), d.end(), work.begin() + static_cast<std::ptrdiff_t>(y * w));
    });

    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (work[i] >= kInf) {
            out.squared[i] = DistanceField::kNoBackgroundSquared;
            out.distance[i] = std::numeric_limits<double>::infinity();
        } else {
            out.squared[i] = work[i];
            out.distance[i] = std::sqrt(static_cast<double>(work[i]));
        }
    }
    return out;
}

namespace {

// Neighbour code bits, counter-clockwise from east (y grows downwards):
// E, NE, N, NW, W, SW, S, SE.
constexpr std::array<std::array<int, 2>, 8> kRing = {
    {{1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

std::uint8_t neighbour_code(const BinaryMask& m, int x, int y) {
    std::uint8_t code = 0;
    for (int k = 0; k < 8; ++k) {
        const int nx = x + kRing[static_cast<std::size_t>(k)][0];
        const int ny = y + kRing[static_cast<std::size_t>(k)][1];
        if (m.contains(nx, ny) && m(nx, ny)) code = static_cast<std::uint8_t>(code | (1U << k));
    }
    return code;
}

bool bit(unsigned code, int k) { return ((code >> (k & 7)) & 1U) != 0; }

// Yokoi 8-connectivity number equal to one.
constexpr bool simple_code(unsigned code) {
    int n = 0;
    for (int k = 0; k < 8; k += 2) {
        const int a = ((code >> k) & 1U) ? 0 : 1;
        const int b = ((code >> ((k + 1) & 7)) & 1U) ? 0 : 1;
        const int c = ((code >> ((k + 2) & 7)) & 1U) ? 0 : 1;
        n += a - a * b * c;
    }
    return n == 1;
}

// Guo–Hall deletion test for sub-iteration `pass`.
bool guo_hall_candidate(unsigned code, int pass) {
    const int p2 = bit(code, 2), p3 = bit(code, 1), p4 = bit(code, 0), p5 = bit(code, 7);
    const int p6 = bit(code, 6), p7 = bit(code, 5), p8 = bit(code, 4), p9 = bit(code, 3);
    const int c = ((!p2) & (p3 | p4)) + ((!p4) & (p5 | p6)) + ((!p6) & (p7 | p8)) + ((!p8) & (p9 | p2));
    const int n1 = (p9 | p2) + (p3 | p4) + (p5 | p6) + (p7 | p8);
    const int n2 = (p2 | p3) + (p4 | p5) + (p6 | p7) + (p8 | p9);
    const int n = std::min(n1, n2);
    const int m = pass == 0 ? ((p6 | p7 | (!p9)) & p8) : ((p2 | p3 | (!p5)) & p4);
    return c == 1 && n >= 2 && n <= 3 && m == 0;
}

struct Luts {
    std::array<bool, 256> simple{};
    std::array<std::array<bool, 256>, 2> zs{};
    Luts() {
        for (unsigned c = 0; c < 256; ++c) {
            simple[c] = simple_code(c);
            zs[0][c] = guo_hall_candidate(c, 0);
            zs[1][c] = guo_hall_candidate(c, 1);
        }
    }
};

const Luts& luts() {
    static const Luts l;
    return l;
}

bool removable(const BinaryMask& m, int x, int y) {
    const std::uint8_t code = neighbour_code(m, x, y);
    return std::popcount(static_cast<unsigned>(code)) >= 2 && luts().simple[code];
}

constexpr std::array<Point, 8> kNeighbours = {
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

std::vector<Point> skeleton_neighbours(const BinaryMask& m, Point p) {
    std::vector<Point> out;
    for (const Point d : kNeighbours) {
        const Point q{p.x + d.x, p.y + d.y};
        if (m.contains(q) && m[q]) out.push_back(q);
    }
    return out;
}

// Deletes simple pixels that are not line ends until none remain.
void remove_simple_residue(BinaryMask& img) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                if (img(x, y) && removable(img, x, y)) {
                    img(x, y) = 0;
                    changed = true;
                }
            }
        }
    }
}

}  // namespace

int neighbour_count(const BinaryMask& skeleton, Point p) {
    return std::popcount(static_cast<unsigned>(neighbour_code(skeleton, p.x, p.y)));
}

bool is_simple(const BinaryMask& mask, Point p) { return luts().simple[neighbour_code(mask, p.x, p.y)]; }

BinaryMask skeletonize(const BinaryMask& mask) {
    BinaryMask img = mask;
    const int w = img.width();
    const int h = img.height();
    std::vector<Point> candidates;

    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            candidates.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (img(x, y) && luts().zs[static_cast<std::size_t>(pass)][neighbour_code(img, x, y)])
                        candidates.push_back({x, y});
            for (const Point p : candidates) {
                if (removable(img, p.x, p.y)) {
                    img[p] = 0;
                    changed = true;
                }
            }
        }
    }

    remove_simple_residue(img);
    return img;
}

BinaryMask prune_spurs(const BinaryMask& skeleton, int min_len) {
    require(min_len >= 1, ErrorCode::InvalidParameter, "spur length must be >= 1");
    BinaryMask img = skeleton;

    struct Spur {
        std::vector<Point> branch;
        Point junction;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Spur> spurs;
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                const Point e{x, y};
                if (!img[e] || neighbour_count(img, e) != 1) continue;
                std::vector<Point> branch{e};
                Point cur = e;
                while (static_cast<int>(branch.size()) < min_len) {
                    std::vector<Point> next;
                    for (const Point q : skeleton_neighbours(img, cur))
                        if (std::find(branch.begin(), branch.end(), q) == branch.end()) next.push_back(q);
                    if (next.size() != 1) break;
                    if (neighbour_count(img, next[0]) >= 3) {
                        spurs.push_back({branch, next[0]});
                        break;
                    }
                    branch.push_back(next[0]);
                    cur = next[0];
                }
            }
        }
        std::stable_sort(spurs.begin(), spurs.end(),
                         [](const Spur& a, const Spur& b) { return a.branch.size() < b.branch.size(); });
        for (const Spur& s : spurs) {
            if (!img[s.junction] || neighbour_count(img, s.junction) < 3) continue;
            if (!std::all_of(s.branch.begin(), s.branch.end(), [&](Point p) { return img[p] != 0; })) continue;
            for (const Point p : s.branch) img[p] = 0;
            // The walk stops one pixel short when the spur meets the path diagonally.
            if (removable(img, s.junction.x, s.junction.y)) img[s.junction] = 0;
            changed = true;
        }
        if (changed) remove_simple_residue(img);
    }
    return img;
}

KeyPoints key_points(const BinaryMask& skeleton) {
    KeyPoints out;
    BinaryMask joint_pixels(skeleton.width(), skeleton.height());
    for (int y = 0; y < skeleton.height(); ++y) {
        for (int x = 0; x < skeleton.width(); ++x) {
            if (!skeleton(x, y)) continue;
            const int n = neighbour_count(skeleton, {x, y});
            if (n <= 1) out.endpoints.push_back({x, y});
            if (n >= 3) joint_pixels(x, y) = 1;
        }
    }

    BinaryMask seen(skeleton.width(), skeleton.height());
    for (std::size_t i = 0; i < joint_pixels.size(); ++i) {
        if (!joint_pixels[i] || seen[i]) continue;
        Joint j;
        std::deque<Point> queue{joint_pixels.point(i)};
        seen[i] = 1;
        while (!queue.empty()) {
            const Point p = queue.front();
            queue.pop_front();
            j.pixels.push_back(p);
            for (const Point q : skeleton_neighbours(joint_pixels, p)) {
                if (!seen[q]) {
                    seen[q] = 1;
                    queue.push_back(q);
                }
            }
        }
        std::sort(j.pixels.begin(), j.pixels.end(), row_major_less);
        double cx = 0.0;
        double cy = 0.0;
        for (const Point p : j.pixels) {
            cx += p.x;
            cy += p.y;
        }
        cx /= static_cast<double>(j.pixels.size());
        cy /= static_cast<double>(j.pixels.size());
        double best = std::numeric_limits<double>::infinity();
        for (const Point p : j.pixels) {
            const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
            if (d < best) {
                best = d;
                j.center = p;
            }
        }
        out.joints.push_back(std::move(j));
    }
    return out;
}

std::vector<VesselSegment> decompose(const BinaryMask& skeleton, const KeyPoints& keys) {
    const int w = skeleton.width();
    const int h = skeleton.height();
    Raster<int, struct JointIndexTag> joint_of(w, h, -1);
    for (std::size_t j = 0; j < keys.joints.size(); ++j)
        for (const Point p : keys.joints[j].pixels) joint_of[p] = static_cast<int>(j);

    BinaryMask open(w, h);  // non-joint skeleton pixels
    for (std::size_t i = 0; i < skeleton.size(); ++i) open[i] = skeleton[i] && joint_of[i] < 0 ? 1 : 0;

    const auto adjacent_joint = [&](Point p) {
        int best = -1;
        for (const Point q : skeleton_neighbours(skeleton, p))
            if (joint_of[q] >= 0 && (best < 0 || joint_of[q] < best)) best = joint_of[q];
        return best;
    };

    BinaryMask used(w, h);
    std::vector<VesselSegment> segments;

    const auto walk_from = [&](Point start) {
        std::vector<Point> path{start};
        used[start] = 1;
        Point cur = start;
        while (true) {
            std::optional<Point> next;
            for (const Point q : skeleton_neighbours(open, cur)) {
                if (used[q]) continue;
                if (!next || row_major_less(q, *next)) next = q;
            }
            if (!next) break;
            used[*next] = 1;
            path.push_back(*next);
            cur = *next;
        }
        return path;
    };

    const auto open_degree = [&](Point p) { return static_cast<int>(skeleton_neighbours(open, p).size()); };

    // Paths start at pixels with at most one non-joint neighbour, scanned in
    // row-major order; what remains afterwards are closed loops.
    for (int pass = 0; pass < 2; ++pass) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Point p{x, y};
                if (!open[p] || used[p]) continue;
                if (pass == 0 && open_degree(p) > 1) continue;
                std::vector<Point> path = walk_from(p);
                if (row_major_less(path.back(), path.front())) std::reverse(path.begin(), path.end());
                VesselSegment seg;
                seg.path = std::move(path);
                segments.push_back(std::move(seg));
            }
        }
    }

    for (auto& seg : segments) {
        seg.start_joint = adjacent_joint(seg.path.front());
        seg.end_joint = adjacent_joint(seg.path.back());
        if (seg.path.size() == 1) {
            // A single pixel between two junctions touches both.
            int other = -1;
            for (const Point q : skeleton_neighbours(skeleton, seg.path.front()))
                if (joint_of[q] >= 0 && joint_of[q] != seg.start_joint) other = joint_of[q];
            seg.end_joint = other >= 0 ? other : seg.start_joint;
        }
        seg.start_kind = seg.start_joint >= 0 ? EndKind::joint : EndKind::end;
        seg.end_kind = seg.end_joint >= 0 ? EndKind::joint : EndKind::end;
        seg.core_begin = 0;
        seg.core_end = seg.path.size();
    }
    std::sort(segments.begin(), segments.end(), [](const VesselSegment& a, const VesselSegment& b) {
        return row_major_less(a.path.front(), b.path.front());
    });
    for (std::size_t i = 0; i < segments.size(); ++i) segments[i].id = static_cast<int>(i);
    return segments;
}

namespace {

double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Centred window of 2 * half + 1 samples, shrunk at the ends.
std::vector<double> moving_average(const std::vector<double>& v, std::size_t half) {
    if (half == 0) return v;
    const std::size_t n = v.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

// Mean chord length across the vessel: parallel rays along the local normal,
// each marched outward from the centreline until it leaves the mask.
double cross_section_width(const BinaryMask& mask, const std::vector<Point>& path, std::size_t i, double reach) {
    constexpr int kTangentSpan = 5;
    constexpr double kHalfStrip = 1.5;
    constexpr double kStep = 0.125;
    const std::size_t n = path.size();
    const Point a = path[i >= kTangentSpan ? i - kTangentSpan : 0];
    const Point b = path[std::min(n - 1, i + kTangentSpan)];
    double tx = b.x - a.x;
    double ty = b.y - a.y;
    const double norm = std::hypot(tx, ty);
    if (norm == 0.0) return -1.0;
    tx /= norm;
    ty /= norm;
    const double nx = -ty;
    const double ny = tx;
    const auto inside = [&](double x, double y) {
        const int px = static_cast<int>(std::floor(x + 0.5));
        const int py = static_cast<int>(std::floor(y + 0.5));
        return mask.contains(px, py) && mask(px, py) != 0;
    };
    double total = 0.0;
    int rays = 0;
    for (double s = -kHalfStrip + kStep / 2; s < kHalfStrip; s += kStep) {
        const double cx = path[i].x + s * tx;
        const double cy = path[i].y + s * ty;
        if (!inside(cx, cy)) continue;
        double width = 0.0;
        for (const double dir : {1.0, -1.0}) {
            double v = kStep / 2;
            while (v < reach && inside(cx + dir * v * nx, cy + dir * v * ny)) v += kStep;
            width += v - kStep / 2;
        }
        total += width;
        ++rays;
    }
    return rays > 0 ? total / rays : -1.0;
}

}  // namespace

void assign_diameters(std::vector<VesselSegment>& segments, const DistanceField& field, double pixel_size_mm,
                      const std::vector<Joint>& joints, const DiameterOptions& options, const BinaryMask* mask) {
    require(options.method == DiameterMethod::distance_transform || mask != nullptr, ErrorCode::InvalidParameter,
            "cross-section diameters need the vessel mask");
    validate_pixel_size(pixel_size_mm);
    for (auto& seg : segments) {
        const std::size_t n = seg.path.size();
        require(n > 0, ErrorCode::InvalidInput, "segment without pixels");
        std::vector<double> raw(n);
        std::vector<double> radius(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = field[seg.path[i]];
            require(std::isfinite(d), ErrorCode::InvalidInput, "mask has no background; diameters are unbounded");
            radius[i] = d;
            raw[i] = std::max(0.0, 2.0 * d - options.boundary_offset_px);
            if (options.method == DiameterMethod::cross_section) {
                const double w = cross_section_width(*mask, seg.path, i, 4.0 * d + 4.0);
                if (w >= 0.0) raw[i] = w;
            }
        }
        seg.diameters_px = raw;
        if (options.median_smooth && n >= 3) {
            for (std::size_t i = 0; i < n; ++i) {
                const double prev = raw[i == 0 ? 0 : i - 1];
                const double next = raw[i + 1 == n ? n - 1 : i + 1];
                seg.diameters_px[i] = median3(prev, raw[i], next);
            }
        }
        seg.diameters_mm.resize(n);
        for (std::size_t i = 0; i < n; ++i) seg.diameters_mm[i] = seg.diameters_px[i] * pixel_size_mm;
        seg.reference_mm = seg.diameters_mm;
        const auto [lo, hi] = std::minmax_element(seg.diameters_mm.begin(), seg.diameters_mm.end());
        seg.d_min_mm = *lo;
        seg.d_max_mm = *hi;

        std::size_t begin = 0;
        std::size_t end = n;
        if (options.trim_ends) {
            std::vector<double> sorted = radius;
            std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
            const double typical = sorted[n / 2];

            const auto anchor = [&](int joint, Point tip) -> std::pair<Point, double> {
                if (joint < 0) return {tip, options.tip_margin_factor * typical};
                double bulge = 0.0;
                for (const Point p : joints.at(static_cast<std::size_t>(joint)).pixels)
                    bulge = std::max(bulge, field[p]);
                return {joints.at(static_cast<std::size_t>(joint)).center, options.joint_margin_factor * bulge};
            };
            const auto [start_anchor, start_margin] = anchor(seg.start_joint, seg.path.front());
            const auto [end_anchor, end_margin] = anchor(seg.end_joint, seg.path.back());

            while (begin < n && distance(seg.path[begin], start_anchor) <= start_margin) ++begin;
            while (end > begin && distance(seg.path[end - 1], end_anchor) <= end_margin) --end;
            if (begin >= end) begin = end = 0;
        }
        seg.core_begin = begin;
        seg.core_end = end;

        // Smoothing stays inside the core so junction bulges and tips do not leak in.
        if (end - begin >= 2 && options.reference_window_factor > 0.0) {
            std::vector<double> core(seg.diameters_px.begin() + static_cast<std::ptrdiff_t>(begin),
                                     seg.diameters_px.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<double> sorted = core;
            std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                             sorted.end());
            const auto half = static_cast<std::size_t>(
                std::lround(options.reference_window_factor * sorted[sorted.size() / 2] / 2.0));
            const std::vector<double> smooth = moving_average(core, half);
            for (std::size_t i = 0; i < smooth.size(); ++i) seg.reference_mm[begin + i] = smooth[i] * pixel_size_mm;
        }
    }
}

CenterlineGraph build_centerline_graph(const BinaryMask& mask, const CenterlineOptions& options) {
    if (!mask.pixel_size_mm())
        fail(ErrorCode::Configuration, "centerline diameters need the mask's pixel size (mm)");
    const double px = *mask.pixel_size_mm();

    CenterlineGraph g;
    g.pixel_size_mm = px;
    const DistanceField field = distance_transform(mask);
    g.skeleton = prune_spurs(skeletonize(mask), options.spur_min_len);
    g.skeleton.set_pixel_size_mm(px);
    KeyPoints keys = key_points(g.skeleton);
    g.segments = decompose(g.skeleton, keys);
    assign_diameters(g.segments, field, px, keys.joints, options.diameters, &mask);
    g.joints = std::move(keys.joints);
    g.endpoints = std::move(keys.endpoints);

    g.diameter_px = Raster<double, DistanceTag>(mask.width(), mask.height());
    g.diameter_px.set_pixel_size_mm(px);
    for (const auto& seg : g.segments)
        for (std::size_t i = 0; i < seg.path.size(); ++i) g.diameter_px[seg.path[i]] = seg.diameters_px[i];
    for (const auto& j : g.joints)
        for (const Point p : j.pixels) g.diameter_px[p] = std::max(0.0, 2.0 * field[p] - options.diameters.boundary_offset_px);
    return g;
}

}  // namespace angiokit::vesseltree
