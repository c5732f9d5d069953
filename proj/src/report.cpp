#include "angiokit/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace angiokit::report {

using nlohmann::ordered_json;

namespace {

double sig6(double v) {
    require(std::isfinite(v), ErrorCode::InvalidInput, "report values must be finite");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;  // no negative zero
}

ordered_json number_or_null(const std::optional<double>& v) {
    return v ? ordered_json(sig6(*v)) : ordered_json(nullptr);
}

ordered_json point_json(Point p) {
    ordered_json j;
    j["x"] = p.x;
    j["y"] = p.y;
    return j;
}

ordered_json finding_json(const stenosis::StenosisFinding& f) {
    ordered_json j;
    j["segment_id"] = f.segment_id;
    j["location"] = point_json(f.location);
    j["s"] = sig6(f.percent);
    j["grade"] = std::string(stenosis::to_string(f.grade));
    j["d_max_mm"] = sig6(f.d_max_mm);
    j["d_min_mm"] = sig6(f.d_min_mm);
    return j;
}

ordered_json findings_json(const std::vector<stenosis::StenosisFinding>& findings) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : findings) arr.push_back(finding_json(f));
    return arr;
}

ordered_json pixel_json(const evaluate::PixelMetrics& m) {
    ordered_json j;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["sn"] = number_or_null(m.sn);
    j["sp"] = number_or_null(m.sp);
    j["dice"] = number_or_null(m.dice);
    return j;
}

ordered_json stenosis_json(const evaluate::StenosisEval& e, double radius) {
    ordered_json j;
    j["match_radius_px"] = sig6(radius);
    j["tpp"] = e.tpp;
    j["fnp"] = e.fnp;
    j["fpp"] = e.fpp;
    j["tpr"] = number_or_null(e.tpr);
    j["ppv"] = number_or_null(e.ppv);
    j["rmse"] = number_or_null(e.rmse);
    j["n"] = e.n;
    ordered_json matches = ordered_json::array();
    for (const auto& m : e.matches) {
        ordered_json mj;
        mj["pred_index"] = m.pred_index;
        mj["gt_index"] = m.gt_index;
        mj["pred_location"] = point_json(m.pred_point);
        mj["gt_location"] = point_json(m.gt_point);
        mj["b_e"] = sig6(m.b_e);
        mj["b_g"] = sig6(m.b_g);
        mj["pred_grade"] = std::string(stenosis::to_string(m.pred_grade));
        mj["gt_grade"] = std::string(stenosis::to_string(m.gt_grade));
        mj["distance_px"] = sig6(m.distance_px);
        matches.push_back(mj);
    }
    j["matches"] = matches;
    ordered_json per = ordered_json::array();
    for (const auto& g : e.per_grade) {
        ordered_json gj;
        gj["grade"] = std::string(stenosis::to_string(g.grade));
        gj["tpp"] = g.tpp;
        gj["fnp"] = g.fnp;
        gj["fpp"] = g.fpp;
        gj["tpr"] = number_or_null(g.tpr);
        gj["ppv"] = number_or_null(g.ppv);
        gj["rmse"] = number_or_null(g.rmse);
        per.push_back(gj);
    }
    j["per_grade"] = per;
    return j;
}

ordered_json evaluation_json(const Evaluation& e) {
    ordered_json j;
    j["pixel"] = e.pixel ? pixel_json(*e.pixel) : ordered_json(nullptr);
    j["stenosis"] = e.stenosis ? stenosis_json(*e.stenosis, e.match_radius_px) : ordered_json(nullptr);
    return j;
}

std::string render(const ordered_json& j) { return j.dump(2) + "\n"; }

[[noreturn]] void bad_spec(const std::string& what) { fail(ErrorCode::InvalidSpec, "phantom spec: " + what); }

template <typename T>
T field(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        bad_spec(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

Analysis analyze(const BinaryMask& mask, const std::string& image_id, const stenosis::StenosisConfig& cfg,
                 const vesseltree::CenterlineOptions& options) {
    stenosis::validate(cfg);
    if (!mask.pixel_size_mm()) fail(ErrorCode::Configuration, "analysis needs a pixel size");
    Analysis a;
    a.graph = vesseltree::build_centerline_graph(mask, options);
    a.report.image_id = image_id;
    a.report.pixel_size_mm = *mask.pixel_size_mm();
    for (const auto& seg : a.graph.segments) {
        SegmentRecord r;
        r.id = seg.id;
        r.length_px = seg.path.size();
        r.d_max_mm = seg.d_max_mm;
        r.d_min_mm = seg.d_min_mm;
        r.location = seg.path.front();
        if (seg.core_size() >= 2) {
            const auto q = stenosis::quantify_segment(seg);
            r.percent = q.percent;
            r.d_max_mm = q.d_max;
            r.d_min_mm = q.d_min;
            r.location = seg.path[q.index];
            r.eligible = stenosis::eligible(q.d_max, cfg);
        }
        r.grade = stenosis::grade(r.percent);
        a.report.segments.push_back(r);
    }
    a.report.findings = stenosis::detect(a.graph, cfg);
    return a;
}

std::string to_json(const AnalysisReport& report) {
    ordered_json j;
    j["image_id"] = report.image_id;
    j["pixel_size_mm"] = sig6(report.pixel_size_mm);
    ordered_json segs = ordered_json::array();
    for (const auto& s : report.segments) {
        ordered_json sj;
        sj["id"] = s.id;
        sj["length_px"] = s.length_px;
        sj["d_max_mm"] = sig6(s.d_max_mm);
        sj["d_min_mm"] = sig6(s.d_min_mm);
        sj["s"] = sig6(s.percent);
        sj["grade"] = std::string(stenosis::to_string(s.grade));
        sj["location"] = point_json(s.location);
        sj["eligible"] = s.eligible;
        segs.push_back(sj);
    }
    j["segments"] = segs;
    j["findings"] = findings_json(report.findings);
    if (report.evaluation) j["evaluation"] = evaluation_json(*report.evaluation);
    return render(j);
}

std::string to_json(const Evaluation& eval) { return render(evaluation_json(eval)); }

std::string truth_to_json(const std::string& image_id, double pixel_size_mm,
                          const std::vector<stenosis::StenosisFinding>& findings) {
    ordered_json j;
    j["image_id"] = image_id;
    j["pixel_size_mm"] = sig6(pixel_size_mm);
    j["findings"] = findings_json(findings);
    return render(j);
}

std::vector<stenosis::StenosisFinding> findings_from_json(const std::string& text) {
    std::vector<stenosis::StenosisFinding> out;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& fj : j.at("findings")) {
            stenosis::StenosisFinding f;
            f.segment_id = fj.value("segment_id", -1);
            f.location = {fj.at("location").at("x").get<int>(), fj.at("location").at("y").get<int>()};
            f.percent = fj.at("s").get<double>();
            f.grade = fj.contains("grade") ? stenosis::grade_from_string(fj.at("grade").get<std::string>())
                                           : stenosis::grade(f.percent);
            f.d_max_mm = fj.value("d_max_mm", 0.0);
            f.d_min_mm = fj.value("d_min_mm", 0.0);
            require(f.percent >= 0.0 && f.percent <= 100.0, ErrorCode::InvalidInput, "finding level outside [0, 100]");
            out.push_back(f);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidInput, std::string("malformed findings document: ") + e.what());
    }
    return out;
}

std::string phantom_spec_to_json(const phantom::PhantomSpec& spec) {
    ordered_json j;
    j["seed"] = spec.seed;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["pixel_size_mm"] = spec.pixel_size_mm;
    j["noise_sigma"] = spec.noise_sigma;
    switch (spec.illumination) {
        case phantom::Illumination::none: j["illumination"] = "none"; break;
        case phantom::Illumination::linear_ramp: j["illumination"] = "linear_ramp"; break;
        case phantom::Illumination::radial: j["illumination"] = "radial"; break;
    }
    j["background_level"] = spec.background_level;
    j["vessel_level"] = spec.vessel_level;
    ordered_json branches = ordered_json::array();
    for (const auto& b : spec.branches) {
        ordered_json bj;
        ordered_json pts = ordered_json::array();
        for (const auto& p : b.points) pts.push_back({p.x, p.y});
        bj["points"] = pts;
        bj["width_start_px"] = b.width_start_px;
        bj["width_end_px"] = b.width_end_px;
        branches.push_back(bj);
    }
    j["branches"] = branches;
    ordered_json stenoses = ordered_json::array();
    for (const auto& s : spec.stenoses) {
        ordered_json sj;
        sj["branch"] = s.branch;
        sj["position"] = s.position;
        sj["severity_pct"] = s.severity_pct;
        sj["extent_px"] = s.extent_px;
        stenoses.push_back(sj);
    }
    j["stenoses"] = stenoses;
    return render(j);
}

phantom::PhantomSpec phantom_spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad_spec(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_spec("top level must be an object");
    phantom::PhantomSpec spec;
    spec.seed = field<std::uint64_t>(j, "seed", spec.seed);
    spec.width = field<int>(j, "width", spec.width);
    spec.height = field<int>(j, "height", spec.height);
    spec.pixel_size_mm = field<double>(j, "pixel_size_mm", spec.pixel_size_mm);
    spec.noise_sigma = field<double>(j, "noise_sigma", spec.noise_sigma);
    spec.background_level = field<double>(j, "background_level", spec.background_level);
    spec.vessel_level = field<double>(j, "vessel_level", spec.vessel_level);
    const std::string illum = field<std::string>(j, "illumination", "none");
    if (illum == "none") spec.illumination = phantom::Illumination::none;
    else if (illum == "linear_ramp") spec.illumination = phantom::Illumination::linear_ramp;
    else if (illum == "radial") spec.illumination = phantom::Illumination::radial;
    else bad_spec("unknown illumination '" + illum + "'");

    if (!j.contains("branches") || !j["branches"].is_array()) bad_spec("'branches' array is required");
    for (const auto& bj : j["branches"]) {
        if (!bj.is_object()) bad_spec("branch entries must be objects");
        phantom::BranchSpec b;
        if (!bj.contains("points") || !bj["points"].is_array()) bad_spec("branch needs a 'points' array");
        for (const auto& p : bj["points"]) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                bad_spec("points must be [x, y] pairs");
            b.points.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        const double w = field<double>(bj, "width_px", b.width_start_px);
        b.width_start_px = field<double>(bj, "width_start_px", w);
        b.width_end_px = field<double>(bj, "width_end_px", b.width_start_px);
        spec.branches.push_back(b);
    }
    if (j.contains("stenoses")) {
        if (!j["stenoses"].is_array()) bad_spec("'stenoses' must be an array");
        for (const auto& sj : j["stenoses"]) {
            if (!sj.is_object()) bad_spec("stenosis entries must be objects");
            phantom::StenosisSpec s;
            s.branch = field<int>(sj, "branch", s.branch);
            s.position = field<double>(sj, "position", s.position);
            s.severity_pct = field<double>(sj, "severity_pct", s.severity_pct);
            s.extent_px = field<double>(sj, "extent_px", s.extent_px);
            spec.stenoses.push_back(s);
        }
    }
    phantom::validate(spec);
    return spec;
}

io::Rgb grade_colour(stenosis::Grade g) {
    switch (g) {
        case stenosis::Grade::minimal: return {0, 160, 0};
        case stenosis::Grade::mild: return {144, 238, 144};
        case stenosis::Grade::moderate: return {255, 255, 0};
        case stenosis::Grade::severe: return {255, 0, 0};
        case stenosis::Grade::none: break;
    }
    return {255, 255, 255};
}

io::RgbImage overlay(const BinaryMask& mask, const vesseltree::CenterlineGraph& graph,
                     const std::vector<stenosis::StenosisFinding>& findings) {
    io::RgbImage img;
    img.width = mask.width();
    img.height = mask.height();
    img.pixels.assign(mask.size(), io::Rgb{});
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (graph.skeleton.size() == mask.size() && graph.skeleton[i]) img.pixels[i] = {200, 200, 200};
        else if (mask[i]) img.pixels[i] = {70, 70, 70};
    }
    constexpr int kRadius = 4;
    // Least severe first so severe findings stay on top.
    for (auto it = findings.rbegin(); it != findings.rend(); ++it) {
        const io::Rgb c = grade_colour(it->grade);
        for (int dy = -kRadius; dy <= kRadius; ++dy)
            for (int dx = -kRadius; dx <= kRadius; ++dx) {
                const Point p{it->location.x + dx, it->location.y + dy};
                if (dx * dx + dy * dy <= kRadius * kRadius && mask.contains(p)) img.pixels[mask.index(p)] = c;
            }
    }
    return img;
}

}  // namespace angiokit::report
