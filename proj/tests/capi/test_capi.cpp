#include <angiokit/angiokit.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "doctest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Free {
    void operator()(ak_raster* r) const { ak_raster_free(r); }
    void operator()(char* s) const { ak_string_free(s); }
};
using RasterPtr = std::unique_ptr<ak_raster, Free>;
using StringPtr = std::unique_ptr<char, Free>;

RasterPtr make(ak_raster_kind kind, int w, int h, const std::vector<double>& v) {
    ak_raster* r = nullptr;
    REQUIRE(ak_raster_create(kind, w, h, v.empty() ? nullptr : v.data(), &r) == AK_OK);
    return RasterPtr(r);
}

std::vector<double> pixels(const ak_raster* r) {
    int w = 0, h = 0;
    REQUIRE(ak_raster_info(r, &w, &h, nullptr) == AK_OK);
    std::vector<double> out(std::size_t(w) * std::size_t(h));
    REQUIRE(ak_raster_pixels(r, out.data(), out.size()) == AK_OK);
    return out;
}

// A straight vessel with one 60% narrowing, rendered through the C API.
struct Phantom {
    RasterPtr image;
    RasterPtr mask;
    std::string truth;
};

Phantom demo_phantom() {
    const char* spec = R"({"width": 256, "height": 128, "pixel_size_mm": 0.3,
        "branches": [{"points": [[16, 60], [240, 70]], "width_px": 11}],
        "stenoses": [{"branch": 0, "position": 0.45, "severity_pct": 60, "extent_px": 30}]})";
    ak_raster* img = nullptr;
    ak_raster* msk = nullptr;
    char* truth = nullptr;
    REQUIRE(ak_phantom_generate(spec, "demo", &img, &msk, &truth) == AK_OK);
    Phantom p{RasterPtr(img), RasterPtr(msk), truth};
    ak_string_free(truth);
    return p;
}

}  // namespace

TEST_CASE("status strings and version") {
    CHECK(std::string(ak_version()).size() > 0);
    CHECK(std::string(ak_status_string(AK_OK)) == "ok");
    CHECK(std::string(ak_status_string(AK_ERR_IO)) == "io error");
    CHECK(std::string(ak_status_string(static_cast<ak_status>(99))) == "unknown status");
}

TEST_CASE("last error is set on failure and cleared on success") {
    ak_raster* r = nullptr;
    CHECK(ak_raster_create(AK_GRAY, -1, 3, nullptr, &r) == AK_ERR_INVALID_INPUT);
    CHECK(r == nullptr);
    CHECK(std::string(ak_last_error()).size() > 0);
    const auto ok = make(AK_GRAY, 2, 2, {});
    CHECK(std::string(ak_last_error()).empty());
    CHECK(ak_raster_create(AK_GRAY, 2, 2, nullptr, nullptr) == AK_ERR_INVALID_INPUT);
}

TEST_CASE("raster creation validates samples") {
    ak_raster* r = nullptr;
    const std::vector<double> out_of_range{0.0, 1.5};
    CHECK(ak_raster_create(AK_GRAY, 2, 1, out_of_range.data(), &r) == AK_ERR_INVALID_INPUT);
    const std::vector<double> not_binary{0.0, 0.5};
    CHECK(ak_raster_create(AK_MASK, 2, 1, not_binary.data(), &r) == AK_ERR_INVALID_INPUT);
    CHECK(ak_raster_create(static_cast<ak_raster_kind>(7), 1, 1, nullptr, &r) == AK_ERR_INVALID_PARAMETER);
}

TEST_CASE("raster info, pixels and copies") {
    const std::vector<double> v{0.0, 0.25, 0.5, 0.75, 1.0, 0.125};
    const auto r = make(AK_PROBABILITY, 3, 2, v);
    int w = 0, h = 0;
    ak_raster_kind kind = AK_GRAY;
    REQUIRE(ak_raster_info(r.get(), &w, &h, &kind) == AK_OK);
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(kind == AK_PROBABILITY);
    CHECK(pixels(r.get()) == v);

    std::vector<double> small(2);
    CHECK(ak_raster_pixels(r.get(), small.data(), small.size()) == AK_ERR_INVALID_PARAMETER);

    ak_raster* c = nullptr;
    REQUIRE(ak_raster_copy(r.get(), &c) == AK_OK);
    const RasterPtr copy(c);
    CHECK(pixels(copy.get()) == v);
}

TEST_CASE("pixel size can be set, read and cleared") {
    const auto r = make(AK_MASK, 4, 4, {});
    double mm = -1.0;
    int has = -1;
    REQUIRE(ak_raster_pixel_size(r.get(), &mm, &has) == AK_OK);
    CHECK(has == 0);
    REQUIRE(ak_raster_set_pixel_size(r.get(), 0.25) == AK_OK);
    REQUIRE(ak_raster_pixel_size(r.get(), &mm, &has) == AK_OK);
    CHECK(has == 1);
    CHECK(mm == 0.25);
    CHECK(ak_raster_set_pixel_size(r.get(), 12.0) == AK_ERR_INVALID_INPUT);
    REQUIRE(ak_raster_set_pixel_size(r.get(), 0.0) == AK_OK);
    REQUIRE(ak_raster_pixel_size(r.get(), &mm, &has) == AK_OK);
    CHECK(has == 0);
}

TEST_CASE("file round trip and IO errors") {
    const fs::path dir = fs::temp_directory_path() / ("angiokit_capi_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::vector<double> v{0, 1, 1, 0, 1, 0};
    const auto m = make(AK_MASK, 3, 2, v);
    const std::string path = (dir / "m.png").string();
    REQUIRE(ak_raster_write(m.get(), path.c_str()) == AK_OK);
    ak_raster* back = nullptr;
    REQUIRE(ak_raster_read(path.c_str(), AK_MASK, &back) == AK_OK);
    const RasterPtr b(back);
    CHECK(pixels(b.get()) == v);

    ak_raster* missing = nullptr;
    CHECK(ak_raster_read((dir / "none.png").string().c_str(), AK_MASK, &missing) == AK_ERR_IO);
    CHECK(missing == nullptr);
    CHECK(ak_raster_write(m.get(), (dir / "m.tiff").string().c_str()) == AK_ERR_IO);
    double mm = 0.0;
    CHECK(ak_read_pixel_size((dir / "none.json").string().c_str(), &mm) == AK_ERR_IO);
    fs::remove_all(dir);
}

TEST_CASE("binarize: all-zero map gives an empty mask") {
    const auto p = make(AK_PROBABILITY, 64, 64, {});
    ak_binarize_options o;
    ak_binarize_options_init(&o);
    o.window = 32;
    o.stride = 16;
    ak_raster* m = nullptr;
    REQUIRE(ak_binarize(p.get(), &o, &m) == AK_OK);
    const RasterPtr mask(m);
    for (const double x : pixels(mask.get())) CHECK(x == 0.0);
}

TEST_CASE("binarize option checks") {
    const auto p = make(AK_PROBABILITY, 64, 64, {});
    ak_binarize_options o;
    ak_binarize_options_init(&o);
    CHECK(o.window == 384);
    CHECK(o.stride == 32);
    ak_raster* m = nullptr;
    // Default window exceeds a 64 px image.
    CHECK(ak_binarize(p.get(), &o, &m) == AK_ERR_INVALID_PARAMETER);
    o.window = 32;
    o.connectivity = 6;
    CHECK(ak_binarize(p.get(), &o, &m) == AK_ERR_INVALID_PARAMETER);
    const auto mask = make(AK_MASK, 4, 4, {});
    o.connectivity = 8;
    CHECK(ak_binarize(mask.get(), &o, &m) == AK_ERR_INVALID_INPUT);
}

TEST_CASE("binarize a phantom image recovers the vessel") {
    const auto ph = demo_phantom();
    // Vessels are dark; a probability map is bright where the vessel is.
    auto v = pixels(ph.image.get());
    for (double& x : v) x = 1.0 - x;
    const auto prob = make(AK_PROBABILITY, 256, 128, v);
    ak_binarize_options o;
    ak_binarize_options_init(&o);
    o.patched = 0;
    ak_raster* m = nullptr;
    REQUIRE(ak_binarize(prob.get(), &o, &m) == AK_OK);
    const RasterPtr mask(m);
    const auto got = pixels(mask.get());
    const auto truth = pixels(ph.mask.get());
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        tp += got[i] * truth[i];
        fp += got[i] * (1 - truth[i]);
        fn += (1 - got[i]) * truth[i];
    }
    CHECK(2 * tp / (2 * tp + fp + fn) >= 0.9);
}

TEST_CASE("analyze needs a mask with a pixel size") {
    const auto ph = demo_phantom();
    char* report = nullptr;
    CHECK(ak_analyze(ph.image.get(), "x", nullptr, &report, nullptr) == AK_ERR_INVALID_INPUT);

    ak_raster* c = nullptr;
    REQUIRE(ak_raster_copy(ph.mask.get(), &c) == AK_OK);
    const RasterPtr bare(c);
    REQUIRE(ak_raster_set_pixel_size(bare.get(), 0.0) == AK_OK);
    CHECK(ak_analyze(bare.get(), "x", nullptr, &report, nullptr) == AK_ERR_CONFIGURATION);
    CHECK(report == nullptr);

    ak_analyze_options o;
    ak_analyze_options_init(&o);
    CHECK(o.min_diameter_mm == 1.8);
    o.spur_min_len = 0;
    CHECK(ak_analyze(ph.mask.get(), "x", &o, &report, nullptr) == AK_ERR_INVALID_PARAMETER);
}

TEST_CASE("analyze reports the phantom stenosis") {
    const auto ph = demo_phantom();
    char* report = nullptr;
    REQUIRE(ak_analyze(ph.mask.get(), "demo", nullptr, &report, nullptr) == AK_OK);
    const StringPtr r(report);
    const auto j = json::parse(r.get());
    CHECK(j["image_id"] == "demo");
    REQUIRE(j["findings"].size() == 1);
    CHECK(std::abs(j["findings"][0]["s"].get<double>() - 60.0) <= 7.0);
    const auto t = json::parse(ph.truth);
    const double dx = j["findings"][0]["location"]["x"].get<double>() - t["findings"][0]["location"]["x"].get<double>();
    const double dy = j["findings"][0]["location"]["y"].get<double>() - t["findings"][0]["location"]["y"].get<double>();
    CHECK(std::hypot(dx, dy) <= 5.0);
}

TEST_CASE("evaluate: a report against itself is perfect") {
    const auto ph = demo_phantom();
    char* report = nullptr;
    REQUIRE(ak_analyze(ph.mask.get(), "demo", nullptr, &report, nullptr) == AK_OK);
    const StringPtr r(report);
    char* metrics = nullptr;
    REQUIRE(ak_evaluate(r.get(), r.get(), ph.mask.get(), ph.mask.get(), 10.0, &metrics) == AK_OK);
    const StringPtr m(metrics);
    const auto j = json::parse(m.get());
    CHECK(j["pixel"]["sn"] == 1.0);
    CHECK(j["pixel"]["sp"] == 1.0);
    CHECK(j["pixel"]["dice"] == 1.0);
    CHECK(j["stenosis"]["tpr"] == 1.0);
    CHECK(j["stenosis"]["ppv"] == 1.0);
    CHECK(j["stenosis"]["rmse"] == 0.0);
}

TEST_CASE("evaluate rejects half-specified inputs") {
    const auto ph = demo_phantom();
    char* metrics = nullptr;
    CHECK(ak_evaluate(nullptr, nullptr, ph.mask.get(), nullptr, 10.0, &metrics) == AK_ERR_INVALID_COMBINATION);
    CHECK(ak_evaluate(ph.truth.c_str(), nullptr, nullptr, nullptr, 10.0, &metrics) == AK_ERR_INVALID_COMBINATION);
    CHECK(ak_evaluate(nullptr, nullptr, nullptr, nullptr, 10.0, &metrics) == AK_ERR_INVALID_COMBINATION);
    CHECK(metrics == nullptr);
    CHECK(ak_evaluate("{", ph.truth.c_str(), nullptr, nullptr, 10.0, &metrics) == AK_ERR_INVALID_INPUT);
}

TEST_CASE("stack channels need both stage-two inputs") {
    const fs::path dir = fs::temp_directory_path() / ("angiokit_stack_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto img = make(AK_GRAY, 8, 8, {});
    const auto prob = make(AK_PROBABILITY, 8, 8, {});
    const std::string path = (dir / "s.pfm").string();
    CHECK(ak_write_stack(img.get(), prob.get(), nullptr, path.c_str()) == AK_ERR_INVALID_COMBINATION);
    CHECK(ak_write_stack(img.get(), nullptr, img.get(), path.c_str()) == AK_ERR_INVALID_COMBINATION);
    CHECK(ak_write_stack(img.get(), nullptr, nullptr, path.c_str()) == AK_OK);
    CHECK(ak_write_stack(img.get(), prob.get(), img.get(), path.c_str()) == AK_OK);
    fs::remove_all(dir);
}

TEST_CASE("random phantom specs are deterministic and validated") {
    ak_phantom_options o;
    ak_phantom_options_init(&o);
    o.size = 128;
    char* a = nullptr;
    char* b = nullptr;
    REQUIRE(ak_phantom_random_spec(5, &o, &a) == AK_OK);
    REQUIRE(ak_phantom_random_spec(5, &o, &b) == AK_OK);
    const StringPtr sa(a), sb(b);
    CHECK(std::string(sa.get()) == std::string(sb.get()));

    ak_raster* img = nullptr;
    REQUIRE(ak_phantom_generate(sa.get(), "p", &img, nullptr, nullptr) == AK_OK);
    const RasterPtr image(img);
    int w = 0;
    REQUIRE(ak_raster_info(image.get(), &w, nullptr, nullptr) == AK_OK);
    CHECK(w == 128);

    char* s = nullptr;
    o.illumination = 5;
    CHECK(ak_phantom_random_spec(1, &o, &s) == AK_ERR_INVALID_PARAMETER);
    ak_phantom_options_init(&o);
    o.size = 32;
    CHECK(ak_phantom_random_spec(1, &o, &s) != AK_OK);
    CHECK(ak_phantom_generate("{\"branches\": []}", "p", &img, nullptr, nullptr) == AK_ERR_INVALID_SPEC);
}

TEST_CASE("enhance and edge map keep the image shape") {
    const auto ph = demo_phantom();
    ak_raster* e = nullptr;
    REQUIRE(ak_enhance(ph.image.get(), 7, 16.0, &e) == AK_OK);
    const RasterPtr enhanced(e);
    ak_raster* g = nullptr;
    REQUIRE(ak_edge_map(enhanced.get(), &g) == AK_OK);
    const RasterPtr edge(g);
    int w = 0, h = 0;
    REQUIRE(ak_raster_info(edge.get(), &w, &h, nullptr) == AK_OK);
    CHECK(w == 256);
    CHECK(h == 128);
    CHECK(ak_enhance(ph.image.get(), 0, 16.0, &e) == AK_ERR_INVALID_PARAMETER);
}

TEST_CASE("augment needs co-registered inputs") {
    const auto ph = demo_phantom();
    ak_raster* ai = nullptr;
    ak_raster* am = nullptr;
    REQUIRE(ak_augment(ph.image.get(), ph.mask.get(), 3, &ai, &am) == AK_OK);
    const RasterPtr a(ai), b(am);
    const auto small = make(AK_MASK, 4, 4, {});
    CHECK(ak_augment(ph.image.get(), small.get(), 3, &ai, &am) == AK_ERR_INVALID_INPUT);
}
