#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "angiokit/raster.hpp"
#include "angiokit/vesseltree.hpp"

namespace angiokit::stenosis {

enum class Grade { none, minimal, mild, moderate, severe };

std::string_view to_string(Grade g) noexcept;
Grade grade_from_string(std::string_view s);

/// Half-open bands: [0,10) none, [10,25) minimal, [25,50) mild,
/// [50,70) moderate, [70,100] severe.
Grade grade(double percent);

struct StenosisFinding {
    int segment_id = -1;
    Point location;
    double percent = 0.0;  // (1 - d_min / d_max) * 100
    Grade grade = Grade::none;
    double d_max_mm = 0.0;
    double d_min_mm = 0.0;
};

struct StenosisConfig {
    double min_reference_diameter_mm = 1.8;
    double report_threshold_pct = 10.0;
    double match_radius_px = 10.0;
};

struct Quantification {
    double percent = 0.0;
    std::size_t index = 0;  // path index of the narrowest point
    double d_max = 0.0;
    double d_min = 0.0;
};

/// Stenosis level over a diameter profile: reference = maximum, location =
/// first index attaining the minimum. Needs at least two samples and a
/// positive maximum.
Quantification quantify(std::span<const double> diameters);

/// Same, with the reference taken as the maximum of a separate profile
/// (e.g. a smoothed one) of equal length.
Quantification quantify(std::span<const double> diameters, std::span<const double> reference);

/// Quantifies the segment's measurement core against its reference profile.
Quantification quantify_segment(const vesseltree::VesselSegment& seg);

void validate(const StenosisConfig& cfg);

// d_max_mm >= cutoff, inclusive up to a relative 1e-9 so that products such
// as 6 px * 0.3 mm land on the boundary they denote.
bool eligible(double d_max_mm, const StenosisConfig& cfg) noexcept;

/// One finding per eligible segment (core reference diameter at least the
/// configured minimum, compared in millimetres) whose level reaches the
/// report threshold. Sorted by descending level, then segment id.
std::vector<StenosisFinding> detect(const vesseltree::CenterlineGraph& graph, const StenosisConfig& cfg = {});

}  // namespace angiokit::stenosis
