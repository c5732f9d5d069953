#include "angiokit/stenosis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace angiokit::stenosis {

std::string_view to_string(Grade g) noexcept {
    switch (g) {
        case Grade::none: return "none";
        case Grade::minimal: return "minimal";
        case Grade::mild: return "mild";
        case Grade::moderate: return "moderate";
        case Grade::severe: return "severe";
    }
    return "none";
}

Grade grade_from_string(std::string_view s) {
    for (const Grade g : {Grade::none, Grade::minimal, Grade::mild, Grade::moderate, Grade::severe})
        if (to_string(g) == s) return g;
    fail(ErrorCode::InvalidInput, "unknown stenosis grade '" + std::string(s) + "'");
}

Grade grade(double percent) {
    require(percent >= 0.0 && percent <= 100.0, ErrorCode::InvalidParameter, "stenosis percent must lie in [0, 100]");
    if (percent < 10.0) return Grade::none;
    if (percent < 25.0) return Grade::minimal;
    if (percent < 50.0) return Grade::mild;
    if (percent < 70.0) return Grade::moderate;
    return Grade::severe;
}

Quantification quantify(std::span<const double> diameters) {
    require(diameters.size() >= 2, ErrorCode::DegenerateSegment, "stenosis needs at least two diameter samples");
    Quantification q;
    q.d_max = *std::max_element(diameters.begin(), diameters.end());
    require(q.d_max > 0.0, ErrorCode::DegenerateSegment, "segment reference diameter is zero");
    const auto lo = std::min_element(diameters.begin(), diameters.end());
    q.d_min = *lo;
    q.index = static_cast<std::size_t>(lo - diameters.begin());
    q.percent = std::clamp((1.0 - q.d_min / q.d_max) * 100.0, 0.0, 100.0);
    return q;
}

Quantification quantify(std::span<const double> diameters, std::span<const double> reference) {
    require(reference.size() == diameters.size(), ErrorCode::InvalidInput,
            "reference and diameter profiles differ in length");
    Quantification q = quantify(diameters);
    q.d_max = *std::max_element(reference.begin(), reference.end());
    require(q.d_max > 0.0, ErrorCode::DegenerateSegment, "segment reference diameter is zero");
    q.percent = std::clamp((1.0 - q.d_min / q.d_max) * 100.0, 0.0, 100.0);
    return q;
}

Quantification quantify_segment(const vesseltree::VesselSegment& seg) {
    require(seg.diameters_mm.size() == seg.path.size(), ErrorCode::DegenerateSegment,
            "segment diameters have not been assigned");
    require(seg.core_end <= seg.path.size(), ErrorCode::DegenerateSegment, "segment core exceeds its path");
    const std::span<const double> all(seg.diameters_mm);
    const std::span<const double> ref(seg.reference_mm);
    Quantification q = seg.reference_mm.size() == seg.diameters_mm.size()
                           ? quantify(all.subspan(seg.core_begin, seg.core_size()),
                                      ref.subspan(seg.core_begin, seg.core_size()))
                           : quantify(all.subspan(seg.core_begin, seg.core_size()));
    q.index += seg.core_begin;
    return q;
}

void validate(const StenosisConfig& cfg) {
    require(cfg.min_reference_diameter_mm > 0.0 && cfg.report_threshold_pct > 0.0 && cfg.match_radius_px > 0.0,
            ErrorCode::InvalidParameter, "stenosis configuration values must be positive");
}

bool eligible(double d_max_mm, const StenosisConfig& cfg) noexcept {
    return d_max_mm >= cfg.min_reference_diameter_mm * (1.0 - 1e-9);
}

std::vector<StenosisFinding> detect(const vesseltree::CenterlineGraph& graph, const StenosisConfig& cfg) {
    validate(cfg);
    if (!graph.pixel_size_mm) fail(ErrorCode::Configuration, "stenosis detection needs a pixel size");

    std::vector<StenosisFinding> out;
    for (const auto& seg : graph.segments) {
        if (seg.core_size() < 2) continue;
        const Quantification q = quantify_segment(seg);
        if (!eligible(q.d_max, cfg)) continue;
        if (q.percent < cfg.report_threshold_pct) continue;
        StenosisFinding f;
        f.segment_id = seg.id;
        f.location = seg.path[q.index];
        f.percent = q.percent;
        f.grade = grade(q.percent);
        f.d_max_mm = q.d_max;
        f.d_min_mm = q.d_min;
        out.push_back(f);
    }
    std::sort(out.begin(), out.end(), [](const StenosisFinding& a, const StenosisFinding& b) {
        if (a.percent != b.percent) return a.percent > b.percent;
        return a.segment_id < b.segment_id;
    });
    return out;
}

}  // namespace angiokit::stenosis
