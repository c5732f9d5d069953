#include "angiokit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "angiokit/binarize.hpp"
#include "angiokit/imaging.hpp"
#include "rng.hpp"

namespace angiokit::phantom {

double arc_length(const BranchSpec& b) {
    double len = 0.0;
    for (std::size_t i = 1; i < b.points.size(); ++i)
        len += std::hypot(b.points[i].x - b.points[i - 1].x, b.points[i].y - b.points[i - 1].y);
    return len;
}

Vec2 point_at(const BranchSpec& b, double u) {
    if (b.points.size() == 1 || u <= 0.0) return b.points.front();
    for (std::size_t i = 1; i < b.points.size(); ++i) {
        const Vec2 a = b.points[i - 1];
        const Vec2 c = b.points[i];
        const double seg = std::hypot(c.x - a.x, c.y - a.y);
        if (u <= seg || i + 1 == b.points.size()) {
            const double t = seg > 0.0 ? std::min(1.0, u / seg) : 0.0;
            return {a.x + t * (c.x - a.x), a.y + t * (c.y - a.y)};
        }
        u -= seg;
    }
    return b.points.back();
}

namespace {

Vec2 tangent_at(const BranchSpec& b, double u) {
    const double len = arc_length(b);
    const Vec2 p = point_at(b, std::max(0.0, u - 1.0));
    const Vec2 q = point_at(b, std::min(len, u + 1.0));
    const double n = std::hypot(q.x - p.x, q.y - p.y);
    return n > 0.0 ? Vec2{(q.x - p.x) / n, (q.y - p.y) / n} : Vec2{1.0, 0.0};
}

double base_width(const BranchSpec& b, double u, double len) {
    const double t = len > 0.0 ? std::clamp(u / len, 0.0, 1.0) : 0.0;
    return b.width_start_px + t * (b.width_end_px - b.width_start_px);
}

// Closest axis point of a branch to p: (distance, arc length).
std::pair<double, double> closest_on_branch(const BranchSpec& b, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    double best_u = 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < b.points.size(); ++i) {
        const Vec2 a = b.points[i - 1];
        const Vec2 c = b.points[i];
        const double dx = c.x - a.x;
        const double dy = c.y - a.y;
        const double seg2 = dx * dx + dy * dy;
        const double t = seg2 > 0.0 ? std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / seg2, 0.0, 1.0) : 0.0;
        const double d = std::hypot(a.x + t * dx - p.x, a.y + t * dy - p.y);
        if (d < best) {
            best = d;
            best_u = acc + t * std::sqrt(seg2);
        }
        acc += std::sqrt(seg2);
    }
    return {best, best_u};
}

}  // namespace

double branch_width(const PhantomSpec& spec, int branch, double u) {
    const BranchSpec& b = spec.branches.at(static_cast<std::size_t>(branch));
    const double len = arc_length(b);
    double factor = 1.0;
    for (const StenosisSpec& s : spec.stenoses) {
        if (s.branch != branch) continue;
        const double center = s.position * len;
        const double off = u - center;
        if (std::abs(off) > s.extent_px / 2.0) continue;
        const double depth = 0.5 * (1.0 + std::cos(2.0 * M_PI * off / s.extent_px));
        factor = std::min(factor, 1.0 - s.severity_pct / 100.0 * depth);
    }
    return base_width(b, u, len) * factor;
}

void validate(const PhantomSpec& spec) {
    const auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidSpec, msg); };
    if (spec.width < 8 || spec.height < 8) bad("phantom dimensions must be at least 8 px");
    if (!(spec.pixel_size_mm > 0.0 && spec.pixel_size_mm < 10.0)) bad("phantom pixel size must lie in (0, 10) mm");
    if (spec.branches.empty()) bad("phantom needs at least one branch");
    if (spec.noise_sigma < 0.0) bad("noise sigma must be non-negative");
    if (!(spec.background_level >= 0.0 && spec.background_level <= 1.0 && spec.vessel_level >= 0.0 &&
          spec.vessel_level <= 1.0))
        bad("intensity levels must lie in [0, 1]");
    for (std::size_t i = 0; i < spec.branches.size(); ++i) {
        const BranchSpec& b = spec.branches[i];
        if (b.points.size() < 2) bad("branch " + std::to_string(i) + " needs at least two control points");
        for (const double w : {b.width_start_px, b.width_end_px})
            if (!(w >= 2.0 && w <= 20.0)) bad("branch " + std::to_string(i) + " width outside [2, 20] px");
        if (i == 0) continue;
        bool attached = false;
        for (std::size_t j = 0; j < i && !attached; ++j) {
            const auto [d, u] = closest_on_branch(spec.branches[j], b.points.front());
            attached = d <= base_width(spec.branches[j], u, arc_length(spec.branches[j])) / 2.0;
        }
        if (!attached) bad("branch " + std::to_string(i) + " does not start on an earlier branch");
    }
    for (const StenosisSpec& s : spec.stenoses) {
        if (s.branch < 0 || static_cast<std::size_t>(s.branch) >= spec.branches.size())
            bad("stenosis refers to an unknown branch");
        if (!(s.severity_pct >= 10.0 && s.severity_pct <= 95.0)) bad("stenosis severity outside [10, 95] %");
        if (!(s.position >= 0.0 && s.position <= 1.0)) bad("stenosis position outside [0, 1]");
        if (!(s.extent_px > 0.0)) bad("stenosis extent must be positive");
    }
}

Phantom generate_phantom(const PhantomSpec& spec) {
    validate(spec);
    Phantom out;
    out.mask = BinaryMask(spec.width, spec.height);
    out.mask.set_pixel_size_mm(spec.pixel_size_mm);

    constexpr double kStep = 0.25;
    for (std::size_t bi = 0; bi < spec.branches.size(); ++bi) {
        const BranchSpec& b = spec.branches[bi];
        const double len = arc_length(b);
        const int samples = static_cast<int>(std::ceil(len / kStep));
        for (int s = 0; s <= samples; ++s) {
            const double u = std::min(len, s * kStep);
            const Vec2 c = point_at(b, u);
            const double r = branch_width(spec, static_cast<int>(bi), u) / 2.0;
            const int x0 = std::max(0, static_cast<int>(std::floor(c.x - r)));
            const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(c.x + r)));
            const int y0 = std::max(0, static_cast<int>(std::floor(c.y - r)));
            const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(c.y + r)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) <= r * r) out.mask(x, y) = 1;
        }
    }

    for (const StenosisSpec& s : spec.stenoses) {
        const BranchSpec& b = spec.branches[static_cast<std::size_t>(s.branch)];
        const double len = arc_length(b);
        const double u = s.position * len;
        const Vec2 c = point_at(b, u);
        const double reference = base_width(b, u, len);
        stenosis::StenosisFinding f;
        f.segment_id = s.branch;
        f.location = {static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y))};
        f.percent = s.severity_pct;
        f.grade = stenosis::grade(s.severity_pct);
        f.d_max_mm = reference * spec.pixel_size_mm;
        f.d_min_mm = reference * (1.0 - s.severity_pct / 100.0) * spec.pixel_size_mm;
        out.truth.push_back(f);
    }
    std::stable_sort(out.truth.begin(), out.truth.end(),
                     [](const auto& a, const auto& b) { return a.percent > b.percent; });

    GrayImage base(spec.width, spec.height);
    for (std::size_t i = 0; i < base.size(); ++i)
        base[i] = out.mask[i] ? spec.vessel_level : spec.background_level;
    GrayImage img = imaging::gaussian_blur(base, 1.0);

    std::mt19937_64 rng(spec.seed);
    const double cx = (spec.width - 1) / 2.0;
    const double cy = (spec.height - 1) / 2.0;
    const double rmax = std::hypot(cx, cy);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            double light = 1.0;
            switch (spec.illumination) {
                case Illumination::none: break;
                case Illumination::linear_ramp: light = 1.0 - 0.5 * x / std::max(1, spec.width - 1); break;
                case Illumination::radial: {
                    const double r = std::hypot(x - cx, y - cy) / rmax;
                    light = 1.0 - 0.5 * r * r;
                    break;
                }
            }
            double v = img(x, y) * light;
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * detail::standard_normal(rng);
            img(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }
    img.set_pixel_size_mm(spec.pixel_size_mm);
    out.image = std::move(img);
    return out;
}

namespace {

bool single_hole_free_component(const BinaryMask& mask) {
    const auto fg = binarize::label_components(mask, binarize::Connectivity::eight);
    if (fg.sizes.size() != 1) return false;
    BinaryMask bg(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) bg[i] = mask[i] ? 0 : 1;
    const auto holes = binarize::label_components(bg, binarize::Connectivity::four);
    std::vector<bool> touches(holes.sizes.size(), false);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (x != 0 && y != 0 && x != mask.width() - 1 && y != mask.height() - 1) continue;
            const int l = holes.labels[bg.index(x, y)];
            if (l > 0) touches[static_cast<std::size_t>(l - 1)] = true;
        }
    }
    return std::all_of(touches.begin(), touches.end(), [](bool t) { return t; });
}

bool inside(Vec2 p, double lo, double hi) { return p.x >= lo && p.y >= lo && p.x <= hi && p.y <= hi; }

struct Site {
    int branch;
    double lo;  // usable arc-length interval
    double hi;
    double width;
};

}  // namespace

PhantomSpec random_phantom_spec(std::uint64_t seed, const RandomPhantomOptions& opt) {
    require(opt.size >= 128, ErrorCode::InvalidParameter, "random phantoms need at least 128 px");
    require(opt.min_width_px >= 2.0 && opt.max_width_px <= 20.0 && opt.min_width_px <= opt.max_width_px,
            ErrorCode::InvalidParameter, "random phantom widths must lie in [2, 20] px");
    require(opt.min_severity_pct >= 10.0 && opt.max_severity_pct <= 95.0 &&
                opt.min_severity_pct <= opt.max_severity_pct,
            ErrorCode::InvalidParameter, "random phantom severities must lie in [10, 95] %");

    std::mt19937_64 rng(seed);
    const double size = opt.size;
    const double margin = 0.06 * size;

    for (int attempt = 0; attempt < 200; ++attempt) {
        PhantomSpec spec;
        spec.seed = seed;
        spec.width = spec.height = opt.size;
        spec.pixel_size_mm = opt.pixel_size_mm;
        spec.noise_sigma = opt.noise_sigma;
        spec.illumination = opt.illumination;

        // Root: five control points across the field with sideways wiggle.
        const double theta = detail::uniform(rng, 0.0, M_PI);
        const Vec2 dir{std::cos(theta), std::sin(theta)};
        const Vec2 normal{-dir.y, dir.x};
        const Vec2 centre{size / 2 + detail::uniform(rng, -0.08, 0.08) * size,
                          size / 2 + detail::uniform(rng, -0.08, 0.08) * size};
        const double half = size / 2 - margin;
        // Longest extent along dir that stays inside the margins.
        double reach = half;
        for (double t = half; t > 0.2 * size; t -= 1.0) {
            const Vec2 a{centre.x - dir.x * t, centre.y - dir.y * t};
            const Vec2 b{centre.x + dir.x * t, centre.y + dir.y * t};
            if (inside(a, margin, size - margin) && inside(b, margin, size - margin)) {
                reach = t;
                break;
            }
        }
        BranchSpec root;
        for (int i = 0; i < 5; ++i) {
            const double t = -reach + 2.0 * reach * i / 4.0;
            const double wiggle = (i == 0 || i == 4) ? 0.0 : detail::uniform(rng, -0.04, 0.04) * size;
            root.points.push_back({centre.x + dir.x * t + normal.x * wiggle, centre.y + dir.y * t + normal.y * wiggle});
        }
        const double root_w =
            detail::uniform(rng, opt.min_width_px + 0.4 * (opt.max_width_px - opt.min_width_px), opt.max_width_px);
        root.width_start_px = root.width_end_px = root_w;
        spec.branches.push_back(root);
        const double root_len = arc_length(root);

        const int kids = detail::uniform_int(rng, opt.min_children, opt.max_children);
        const int side0 = (rng() >> 63) ? 1 : -1;
        std::vector<double> joints_u;
        for (int k = 0; k < kids; ++k) {
            const double slot = 0.6 / kids;
            const double t = 0.2 + slot * (k + 0.5) + detail::uniform(rng, -0.2, 0.2) * slot;
            const double u = t * root_len;
            const Vec2 start = point_at(root, u);
            const Vec2 tan = tangent_at(root, u);
            const double side = (k % 2 == 0) ? side0 : -side0;
            const double ang = side * detail::uniform(rng, 35.0, 65.0) * M_PI / 180.0;
            const Vec2 d{tan.x * std::cos(ang) - tan.y * std::sin(ang), tan.x * std::sin(ang) + tan.y * std::cos(ang)};
            const Vec2 n{-d.y, d.x};
            const double w = detail::uniform(rng, opt.min_width_px, std::min(root_w, opt.max_width_px));
            double len = detail::uniform(rng, 0.2, 0.33) * size;
            const double bend = detail::uniform(rng, -0.02, 0.02) * size;
            BranchSpec child;
            child.width_start_px = child.width_end_px = w;
            while (len >= 0.12 * size) {
                const Vec2 mid{start.x + d.x * len / 2 + n.x * bend, start.y + d.y * len / 2 + n.y * bend};
                const Vec2 end{start.x + d.x * len, start.y + d.y * len};
                if (inside(mid, margin, size - margin) && inside(end, margin, size - margin)) {
                    child.points = {start, mid, end};
                    break;
                }
                len *= 0.9;
            }
            if (child.points.empty()) continue;
            spec.branches.push_back(child);
            joints_u.push_back(u);
        }

        // Stenosis sites keep clear of junction bulges and tips.
        std::vector<Site> sites;
        std::vector<double> cuts{0.0};
        cuts.insert(cuts.end(), joints_u.begin(), joints_u.end());
        cuts.push_back(root_len);
        std::sort(cuts.begin(), cuts.end());
        const double joint_clear = 2.5 * root_w + 6.0;
        for (std::size_t i = 1; i < cuts.size(); ++i) {
            const bool lo_tip = i == 1;
            const bool hi_tip = i + 1 == cuts.size();
            const double lo = cuts[i - 1] + (lo_tip ? 2.0 * root_w + 6.0 : joint_clear);
            const double hi = cuts[i] - (hi_tip ? 2.0 * root_w + 6.0 : joint_clear);
            sites.push_back({0, lo, hi, root_w});
        }
        for (std::size_t b = 1; b < spec.branches.size(); ++b) {
            const double len = arc_length(spec.branches[b]);
            const double w = spec.branches[b].width_start_px;
            sites.push_back({static_cast<int>(b), joint_clear, len - (2.0 * w + 6.0), w});
        }
        for (int s = 0; s < opt.stenoses && !sites.empty(); ++s) {
            const std::size_t pick = static_cast<std::size_t>(detail::uniform_int(rng, 0, static_cast<int>(sites.size()) - 1));
            const Site site = sites[pick];
            sites.erase(sites.begin() + static_cast<std::ptrdiff_t>(pick));
            const double extent = std::max(2.5 * site.width, 16.0);
            const double lo = site.lo + extent / 2.0;
            const double hi = site.hi - extent / 2.0;
            if (hi <= lo) {
                --s;
                continue;
            }
            StenosisSpec st;
            st.branch = site.branch;
            st.extent_px = extent;
            st.severity_pct = detail::uniform(rng, opt.min_severity_pct, opt.max_severity_pct);
            st.position = detail::uniform(rng, lo, hi) / arc_length(spec.branches[static_cast<std::size_t>(site.branch)]);
            spec.stenoses.push_back(st);
        }

        const Phantom ph = generate_phantom(spec);
        if (single_hole_free_component(ph.mask)) return spec;
    }
    fail(ErrorCode::InvalidSpec, "could not draw a connected, loop-free phantom for seed " + std::to_string(seed));
}

}  // namespace angiokit::phantom
