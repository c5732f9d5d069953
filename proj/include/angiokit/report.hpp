#pragma once

#include <optional>
#include <string>
#include <vector>

#include "angiokit/evaluate.hpp"
#include "angiokit/io.hpp"
#include "angiokit/phantom.hpp"
#include "angiokit/stenosis.hpp"
#include "angiokit/vesseltree.hpp"

namespace angiokit::report {

struct SegmentRecord {
    int id = 0;
    std::size_t length_px = 0;
    double d_max_mm = 0.0;  // whole path
    double d_min_mm = 0.0;
    double percent = 0.0;  // over the measurement core
    stenosis::Grade grade = stenosis::Grade::none;
    Point location;
    bool eligible = false;  // core reference diameter reaches the cutoff
};

struct Evaluation {
    std::optional<evaluate::PixelMetrics> pixel;
    std::optional<evaluate::StenosisEval> stenosis;
    double match_radius_px = 10.0;
};

struct AnalysisReport {
    std::string image_id;
    double pixel_size_mm = 0.0;
    std::vector<SegmentRecord> segments;
    std::vector<stenosis::StenosisFinding> findings;
    std::optional<Evaluation> evaluation;
};

struct Analysis {
    vesseltree::CenterlineGraph graph;
    AnalysisReport report;
};

Analysis analyze(const BinaryMask& mask, const std::string& image_id, const stenosis::StenosisConfig& cfg = {},
                 const vesseltree::CenterlineOptions& options = {});

// Reports and metrics use a fixed key order and six significant digits.
std::string to_json(const AnalysisReport& report);
std::string to_json(const Evaluation& eval);
std::string truth_to_json(const std::string& image_id, double pixel_size_mm,
                          const std::vector<stenosis::StenosisFinding>& findings);

// Reads the "findings" array of a report or truth document.
std::vector<stenosis::StenosisFinding> findings_from_json(const std::string& text);

// Lossless: doubles keep their shortest round-trip form.
std::string phantom_spec_to_json(const phantom::PhantomSpec& spec);
phantom::PhantomSpec phantom_spec_from_json(const std::string& text);

// Mask in dark grey, centreline in light grey, findings as discs coloured by
// grade: green minimal, light green mild, yellow moderate, red severe.
io::RgbImage overlay(const BinaryMask& mask, const vesseltree::CenterlineGraph& graph,
                     const std::vector<stenosis::StenosisFinding>& findings);
io::Rgb grade_colour(stenosis::Grade g);

}  // namespace angiokit::report
