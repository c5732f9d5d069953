#pragma once

#include <cstdint>
#include <vector>

#include "angiokit/raster.hpp"
#include "angiokit/stenosis.hpp"

namespace angiokit::phantom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct BranchSpec {
    std::vector<Vec2> points;  // polyline control points, px
    double width_start_px = 8.0;
    double width_end_px = 8.0;  // linear taper along the arc length
};

struct StenosisSpec {
    int branch = 0;
    double position = 0.5;    // fraction of the branch arc length
    double severity_pct = 50.0;
    double extent_px = 24.0;  // full length of the cosine-tapered narrowing
};

enum class Illumination { none, linear_ramp, radial };

struct PhantomSpec {
    std::uint64_t seed = 0;
    int width = 512;
    int height = 512;
    double pixel_size_mm = 0.3;
    std::vector<BranchSpec> branches;  // branch 0 is the root
    std::vector<StenosisSpec> stenoses;
    double noise_sigma = 0.0;
    Illumination illumination = Illumination::none;
    double background_level = 0.8;
    double vessel_level = 0.3;
};

struct Phantom {
    GrayImage image;
    BinaryMask mask;
    std::vector<stenosis::StenosisFinding> truth;
};

/// Widths in [2, 20] px, severities in [10, 95] %, and every non-root branch
/// starting inside an earlier branch. Throws InvalidSpec otherwise.
void validate(const PhantomSpec& spec);

/// Rasterises each branch as a swept disk of its local width, narrowed by the
/// stenosis profiles. Truth findings come from the analytic widths. The image
/// is the inverted mask, blurred (sigma 1), lit, and noised from the seed.
Phantom generate_phantom(const PhantomSpec& spec);

// Local width (px) of a branch at arc length u, stenoses included.
double branch_width(const PhantomSpec& spec, int branch, double u);
double arc_length(const BranchSpec& b);
Vec2 point_at(const BranchSpec& b, double u);

struct RandomPhantomOptions {
    int size = 512;
    double pixel_size_mm = 0.3;
    double min_width_px = 6.0;
    double max_width_px = 14.0;
    int min_children = 1;
    int max_children = 3;
    int stenoses = 1;  // attempted; placed only where a clean site exists
    double min_severity_pct = 20.0;
    double max_severity_pct = 80.0;
    double noise_sigma = 0.0;
    Illumination illumination = Illumination::none;
};

/// Deterministic random tree: a wavy root crossing the field with children
/// leaving it at 35–65 degrees. Stenoses are placed well inside segments,
/// away from junctions and tips. Rejects draws whose mask is not a single
/// hole-free component.
PhantomSpec random_phantom_spec(std::uint64_t seed, const RandomPhantomOptions& options = {});

}  // namespace angiokit::phantom
