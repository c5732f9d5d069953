#include <json.hpp>

#include "doctest.h"

#include "angiokit/phantom.hpp"
#include "angiokit/report.hpp"

using namespace angiokit;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

phantom::PhantomSpec one_stenosis() {
    phantom::PhantomSpec spec;
    spec.width = 256;
    spec.height = 128;
    spec.branches.push_back({{{16, 60}, {240, 70}}, 11, 11});
    spec.stenoses.push_back({0, 0.45, 60.0, 30.0});
    return spec;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("analysis of a phantom mask recovers its stenosis") {
    const auto spec = one_stenosis();
    const auto ph = phantom::generate_phantom(spec);
    const auto a = report::analyze(ph.mask, "demo");
    CHECK(a.report.image_id == "demo");
    CHECK(a.report.pixel_size_mm == 0.3);
    REQUIRE(a.report.findings.size() == 1);
    const auto& f = a.report.findings[0];
    CHECK(std::abs(f.percent - 60.0) <= 7.0);
    CHECK(std::hypot(f.location.x - ph.truth[0].location.x, f.location.y - ph.truth[0].location.y) <= 5.0);
    REQUIRE(a.report.segments.size() == 1);
    CHECK(a.report.segments[0].eligible);
    CHECK(a.report.segments[0].length_px == a.graph.segments[0].path.size());
}

TEST_CASE("analysis needs a pixel size") {
    BinaryMask m(20, 20);
    CHECK(code_of([&] { report::analyze(m, "x"); }) == ErrorCode::Configuration);
}

TEST_CASE("report JSON layout and number format") {
    report::AnalysisReport r;
    r.image_id = "img";
    r.pixel_size_mm = 0.3;
    stenosis::StenosisFinding f;
    f.segment_id = 2;
    f.location = {7, 9};
    f.percent = 100.0 / 3.0;
    f.grade = stenosis::Grade::mild;
    f.d_max_mm = 3.0;
    f.d_min_mm = 2.0;
    r.findings.push_back(f);
    report::SegmentRecord s;
    s.id = 2;
    s.length_px = 40;
    s.d_max_mm = 3.0;
    s.d_min_mm = -0.0;
    s.percent = 100.0 / 3.0;
    s.grade = stenosis::Grade::mild;
    s.location = {7, 9};
    s.eligible = true;
    r.segments.push_back(s);

    const std::string text = report::to_json(r);
    CHECK(text.back() == '\n');
    CHECK(text.find("33.3333") != std::string::npos);
    CHECK(text.find("33.33333") == std::string::npos);
    CHECK(text.find("-0") == std::string::npos);
    const auto j = json::parse(text);
    // Key order is checked on the raw text; the parsed object is sorted.
    CHECK(j.contains("image_id"));
    CHECK(text.find("\"image_id\"") < text.find("\"pixel_size_mm\""));
    CHECK(text.find("\"pixel_size_mm\"") < text.find("\"segments\""));
    CHECK(text.find("\"segments\"") < text.find("\"findings\""));
    CHECK(j["findings"][0]["grade"] == "mild");
    CHECK(j["findings"][0]["location"]["x"] == 7);
    CHECK(report::to_json(r) == text);

    r.segments[0].d_max_mm = std::nan("");
    CHECK_THROWS_AS(report::to_json(r), Error);
}

TEST_CASE("findings survive a JSON round trip") {
    const auto ph = phantom::generate_phantom(one_stenosis());
    const std::string text = report::truth_to_json("p", 0.3, ph.truth);
    const auto back = report::findings_from_json(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0].location == ph.truth[0].location);
    CHECK(back[0].percent == ph.truth[0].percent);
    CHECK(back[0].grade == ph.truth[0].grade);
    CHECK(back[0].d_max_mm == doctest::Approx(ph.truth[0].d_max_mm).epsilon(1e-6));

    CHECK(code_of([] { report::findings_from_json("{"); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { report::findings_from_json("{\"findings\": 3}"); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { report::findings_from_json(R"({"findings":[{"segment_id":0}]})"); }) ==
          ErrorCode::InvalidInput);
}

TEST_CASE("evaluation JSON") {
    report::Evaluation e;
    e.match_radius_px = 10;
    evaluate::PixelMetrics pm;
    pm.tp = 1;
    pm.tn = 3;
    evaluate::derive_ratios(pm);
    e.pixel = pm;
    const auto j = json::parse(report::to_json(e));
    CHECK(j["pixel"]["dice"] == 1.0);
    CHECK(j["stenosis"].is_null());
    e.stenosis = evaluate::stenosis_metrics(evaluate::match_stenoses({}, {}, 10));
    const auto k = json::parse(report::to_json(e));
    CHECK(k["stenosis"]["tpr"].is_null());
    CHECK(k["stenosis"]["per_grade"].size() == 4);
}

TEST_CASE("phantom specs round-trip losslessly") {
    phantom::RandomPhantomOptions opt;
    opt.noise_sigma = 0.03;
    opt.illumination = phantom::Illumination::radial;
    opt.stenoses = 2;
    const auto spec = phantom::random_phantom_spec(17, opt);
    const auto text = report::phantom_spec_to_json(spec);
    const auto back = report::phantom_spec_from_json(text);
    CHECK(report::phantom_spec_to_json(back) == text);
    const auto a = phantom::generate_phantom(spec);
    const auto b = phantom::generate_phantom(back);
    CHECK(a.image == b.image);
    CHECK(a.mask == b.mask);
}

TEST_CASE("hand-written phantom specs") {
    const auto spec = report::phantom_spec_from_json(R"({
        "width": 64, "height": 48,
        "branches": [{"points": [[4, 20], [60, 24]], "width_px": 8}],
        "stenoses": [{"branch": 0, "position": 0.5, "severity_pct": 40, "extent_px": 16}]
    })");
    CHECK(spec.width == 64);
    CHECK(spec.branches[0].width_start_px == 8.0);
    CHECK(spec.branches[0].width_end_px == 8.0);
    CHECK(spec.pixel_size_mm == 0.3);

    CHECK(code_of([] { report::phantom_spec_from_json("[]"); }) == ErrorCode::InvalidSpec);
    CHECK(code_of([] { report::phantom_spec_from_json("{"); }) == ErrorCode::InvalidSpec);
    CHECK(code_of([] {
              report::phantom_spec_from_json(R"({"branches": [{"points": [[4, 20], [60, 24]], "width_px": "x"}]})");
          }) == ErrorCode::InvalidSpec);
    CHECK(code_of([] {
              report::phantom_spec_from_json(R"({"illumination": "strobe", "branches": [{"points": [[4, 20], [60, 24]]}]})");
          }) == ErrorCode::InvalidSpec);
    // Disconnected second branch.
    CHECK(code_of([] {
              report::phantom_spec_from_json(R"({"width": 64, "height": 64, "branches": [
                  {"points": [[4, 10], [60, 10]], "width_px": 6},
                  {"points": [[4, 50], [60, 50]], "width_px": 6}]})");
          }) == ErrorCode::InvalidSpec);
}

TEST_CASE("overlay colours follow the grade legend") {
    using stenosis::Grade;
    CHECK(report::grade_colour(Grade::minimal).g == 160);
    CHECK(report::grade_colour(Grade::minimal).r == 0);
    CHECK(report::grade_colour(Grade::mild).r == 144);
    CHECK(report::grade_colour(Grade::moderate).r == 255);
    CHECK(report::grade_colour(Grade::moderate).g == 255);
    CHECK(report::grade_colour(Grade::severe).g == 0);

    const auto ph = phantom::generate_phantom(one_stenosis());
    const auto a = report::analyze(ph.mask, "o");
    const auto img = report::overlay(ph.mask, a.graph, a.report.findings);
    CHECK(img.width == 256);
    CHECK(img.height == 128);
    const Point c = a.report.findings[0].location;
    const auto px = img.pixels[std::size_t(c.y * 256 + c.x)];
    const auto want = report::grade_colour(a.report.findings[0].grade);
    CHECK(px.r == want.r);
    CHECK(px.g == want.g);
    CHECK(px.b == want.b);
    CHECK(img.pixels[0].r == 0);
}

}
