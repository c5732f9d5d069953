#include "angiokit/angiokit.h"

#include <cstring>
#include <new>
#include <string>
#include <variant>

#include "angiokit/binarize.hpp"
#include "angiokit/io.hpp"
#include "angiokit/phantom.hpp"
#include "angiokit/preprocess.hpp"
#include "angiokit/report.hpp"
#include "parallel.hpp"

using namespace angiokit;

struct ak_raster {
    std::variant<GrayImage, ProbabilityMap, BinaryMask> data;
};

namespace {

thread_local std::string g_last_error;

ak_status map_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidInput: return AK_ERR_INVALID_INPUT;
        case ErrorCode::InvalidParameter: return AK_ERR_INVALID_PARAMETER;
        case ErrorCode::InvalidCombination: return AK_ERR_INVALID_COMBINATION;
        case ErrorCode::Coverage: return AK_ERR_COVERAGE;
        case ErrorCode::Configuration: return AK_ERR_CONFIGURATION;
        case ErrorCode::DegenerateSegment: return AK_ERR_DEGENERATE;
        case ErrorCode::InvalidSpec: return AK_ERR_INVALID_SPEC;
        case ErrorCode::Io: return AK_ERR_IO;
    }
    return AK_ERR_INTERNAL;
}

template <typename F>
ak_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return AK_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return AK_ERR_INTERNAL;
}

void need(const void* p, const char* name) {
    if (!p) fail(ErrorCode::InvalidInput, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ak_raster* wrap(auto raster) { return new ak_raster{std::move(raster)}; }

template <typename R>
const R& as(const ak_raster* r, const char* name) {
    need(r, name);
    const R* p = std::get_if<R>(&r->data);
    if (!p) fail(ErrorCode::InvalidInput, std::string(name) + " has the wrong raster kind");
    return *p;
}

// Probability maps also accept grayscale input and vice versa.
ProbabilityMap as_probability(const ak_raster* r, const char* name) {
    need(r, name);
    if (const auto* g = std::get_if<GrayImage>(&r->data)) return retag<ProbabilityMap>(*g);
    return as<ProbabilityMap>(r, name);
}

GrayImage as_gray(const ak_raster* r, const char* name) {
    need(r, name);
    if (const auto* p = std::get_if<ProbabilityMap>(&r->data)) return retag<GrayImage>(*p);
    return as<GrayImage>(r, name);
}

}  // namespace

extern "C" {

const char* ak_version(void) { return "1.0.0"; }

const char* ak_status_string(ak_status status) {
    switch (status) {
        case AK_OK: return "ok";
        case AK_ERR_INVALID_INPUT: return "invalid input";
        case AK_ERR_INVALID_PARAMETER: return "invalid parameter";
        case AK_ERR_INVALID_COMBINATION: return "invalid combination";
        case AK_ERR_COVERAGE: return "coverage error";
        case AK_ERR_CONFIGURATION: return "configuration error";
        case AK_ERR_DEGENERATE: return "degenerate segment";
        case AK_ERR_INVALID_SPEC: return "invalid spec";
        case AK_ERR_IO: return "io error";
        case AK_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ak_last_error(void) { return g_last_error.c_str(); }

void ak_string_free(char* s) { delete[] s; }

void ak_set_max_threads(int n) { detail::set_max_threads(n > 0 ? static_cast<unsigned>(n) : 0U); }

ak_status ak_raster_create(ak_raster_kind kind, int width, int height, const double* data, ak_raster** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        require(width >= 0 && height >= 0, ErrorCode::InvalidInput, "raster dimensions must be non-negative");
        const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        std::vector<double> v = data ? std::vector<double>(data, data + n) : std::vector<double>(n, 0.0);
        switch (kind) {
            case AK_GRAY: {
                GrayImage img(width, height, std::move(v));
                validate(img);
                *out = wrap(std::move(img));
                return;
            }
            case AK_PROBABILITY: {
                ProbabilityMap prob(width, height, std::move(v));
                validate(prob);
                *out = wrap(std::move(prob));
                return;
            }
            case AK_MASK: {
                BinaryMask mask(width, height);
                for (std::size_t i = 0; i < n; ++i) {
                    require(v[i] == 0.0 || v[i] == 1.0, ErrorCode::InvalidInput, "mask samples must be 0 or 1");
                    mask[i] = v[i] != 0.0 ? 1 : 0;
                }
                *out = wrap(std::move(mask));
                return;
            }
        }
        fail(ErrorCode::InvalidParameter, "unknown raster kind");
    });
}

ak_status ak_raster_copy(const ak_raster* src, ak_raster** out) {
    return guarded([&] {
        need(src, "src");
        need(out, "out");
        *out = new ak_raster(*src);
    });
}

void ak_raster_free(ak_raster* r) { delete r; }

ak_status ak_raster_read(const char* path, ak_raster_kind kind, ak_raster** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        switch (kind) {
            case AK_GRAY: *out = wrap(io::read_gray(path)); return;
            case AK_PROBABILITY: *out = wrap(io::read_probability(path)); return;
            case AK_MASK: *out = wrap(io::read_mask(path)); return;
        }
        fail(ErrorCode::InvalidParameter, "unknown raster kind");
    });
}

ak_status ak_raster_write(const ak_raster* r, const char* path) {
    return guarded([&] {
        need(r, "raster");
        need(path, "path");
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, GrayImage>) io::write_gray(v, path);
                else if constexpr (std::is_same_v<T, ProbabilityMap>) io::write_probability(v, path);
                else io::write_mask(v, path);
            },
            r->data);
    });
}

ak_status ak_raster_info(const ak_raster* r, int* width, int* height, ak_raster_kind* kind) {
    return guarded([&] {
        need(r, "raster");
        std::visit(
            [&](const auto& v) {
                if (width) *width = v.width();
                if (height) *height = v.height();
            },
            r->data);
        if (kind) *kind = static_cast<ak_raster_kind>(r->data.index());
    });
}

ak_status ak_raster_pixels(const ak_raster* r, double* out, size_t count) {
    return guarded([&] {
        need(r, "raster");
        need(out, "out");
        std::visit(
            [&](const auto& v) {
                require(count >= v.size(), ErrorCode::InvalidParameter, "output buffer too small");
                for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
            },
            r->data);
    });
}

ak_status ak_raster_set_pixel_size(ak_raster* r, double mm) {
    return guarded([&] {
        need(r, "raster");
        std::visit([&](auto& v) { v.set_pixel_size_mm(mm > 0.0 ? std::optional<double>(mm) : std::nullopt); },
                   r->data);
    });
}

ak_status ak_raster_pixel_size(const ak_raster* r, double* mm, int* has) {
    return guarded([&] {
        need(r, "raster");
        const auto px = std::visit([](const auto& v) { return v.pixel_size_mm(); }, r->data);
        if (has) *has = px ? 1 : 0;
        if (mm) *mm = px.value_or(0.0);
    });
}

ak_status ak_read_pixel_size(const char* path, double* mm) {
    return guarded([&] {
        need(path, "path");
        need(mm, "mm");
        *mm = io::read_pixel_size(path);
    });
}

ak_status ak_enhance(const ak_raster* gray, int se_radius, double bg_sigma, ak_raster** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        preprocess::EnhanceParams p;
        p.se_radius = se_radius;
        p.bg_sigma = bg_sigma;
        *out = wrap(preprocess::enhance(as_gray(gray, "image"), p));
    });
}

ak_status ak_edge_map(const ak_raster* gray, ak_raster** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        *out = wrap(preprocess::edge_map(as_gray(gray, "image")));
    });
}

ak_status ak_write_stack(const ak_raster* image, const ak_raster* prob, const ak_raster* edge, const char* path) {
    return guarded([&] {
        need(path, "path");
        std::optional<ProbabilityMap> p;
        std::optional<GrayImage> e;
        if (prob) p = as_probability(prob, "probability");
        if (edge) e = as_gray(edge, "edge");
        io::write_stack(preprocess::stack_channels(as_gray(image, "image"), p, e), path);
    });
}

ak_status ak_augment(const ak_raster* image, const ak_raster* mask, uint64_t seed, ak_raster** out_image,
                     ak_raster** out_mask) {
    return guarded([&] {
        need(out_image, "out_image");
        need(out_mask, "out_mask");
        *out_image = *out_mask = nullptr;
        auto [img, m] = preprocess::augment(as_gray(image, "image"), as<BinaryMask>(mask, "mask"), seed);
        *out_image = wrap(std::move(img));
        *out_mask = wrap(std::move(m));
    });
}

void ak_binarize_options_init(ak_binarize_options* o) {
    if (!o) return;
    o->patched = 1;
    o->window = 384;
    o->stride = 32;
    o->largest = 1;
    o->connectivity = 8;
}

ak_status ak_binarize(const ak_raster* prob, const ak_binarize_options* options, ak_raster** out_mask) {
    return guarded([&] {
        need(out_mask, "out_mask");
        *out_mask = nullptr;
        ak_binarize_options o;
        ak_binarize_options_init(&o);
        if (options) o = *options;
        require(o.connectivity == 4 || o.connectivity == 8, ErrorCode::InvalidParameter,
                "connectivity must be 4 or 8");
        const ProbabilityMap p = as_probability(prob, "probability");
        validate(p);
        BinaryMask mask = o.patched
                              ? binarize::patched_otsu(p, preprocess::PatchGrid(p.width(), p.height(), o.window, o.stride))
                              : binarize::global_otsu(p);
        if (o.largest)
            mask = binarize::largest_component(mask, static_cast<binarize::Connectivity>(o.connectivity));
        mask.set_pixel_size_mm(p.pixel_size_mm());
        *out_mask = wrap(std::move(mask));
    });
}

void ak_analyze_options_init(ak_analyze_options* o) {
    if (!o) return;
    const stenosis::StenosisConfig cfg;
    o->min_diameter_mm = cfg.min_reference_diameter_mm;
    o->report_threshold_pct = cfg.report_threshold_pct;
    o->spur_min_len = vesseltree::CenterlineOptions{}.spur_min_len;
}

ak_status ak_analyze(const ak_raster* mask, const char* image_id, const ak_analyze_options* options,
                     char** report_json, const char* overlay_path) {
    return guarded([&] {
        need(report_json, "report_json");
        *report_json = nullptr;
        ak_analyze_options o;
        ak_analyze_options_init(&o);
        if (options) o = *options;
        const BinaryMask& m = as<BinaryMask>(mask, "mask");
        stenosis::StenosisConfig cfg;
        cfg.min_reference_diameter_mm = o.min_diameter_mm;
        cfg.report_threshold_pct = o.report_threshold_pct;
        vesseltree::CenterlineOptions copt;
        require(o.spur_min_len >= 1, ErrorCode::InvalidParameter, "spur length must be >= 1");
        copt.spur_min_len = o.spur_min_len;
        const report::Analysis a = report::analyze(m, image_id ? image_id : "", cfg, copt);
        const std::string json = report::to_json(a.report);
        if (overlay_path) io::write_rgb(report::overlay(m, a.graph, a.report.findings), overlay_path);
        *report_json = dup_string(json);
    });
}

ak_status ak_evaluate(const char* pred_json, const char* gt_json, const ak_raster* pred_mask,
                      const ak_raster* gt_mask, double match_radius_px, char** metrics_json) {
    return guarded([&] {
        need(metrics_json, "metrics_json");
        *metrics_json = nullptr;
        require((pred_mask == nullptr) == (gt_mask == nullptr), ErrorCode::InvalidCombination,
                "pixel metrics need both masks");
        require((pred_json == nullptr) == (gt_json == nullptr), ErrorCode::InvalidCombination,
                "stenosis metrics need both finding documents");
        require(pred_mask || pred_json, ErrorCode::InvalidCombination, "nothing to evaluate");
        report::Evaluation ev;
        ev.match_radius_px = match_radius_px;
        if (pred_mask)
            ev.pixel = evaluate::pixel_metrics(as<BinaryMask>(pred_mask, "pred_mask"), as<BinaryMask>(gt_mask, "gt_mask"));
        if (pred_json) {
            const auto pred = report::findings_from_json(pred_json);
            const auto gt = report::findings_from_json(gt_json);
            ev.stenosis = evaluate::stenosis_metrics(evaluate::match_stenoses(pred, gt, match_radius_px));
        }
        *metrics_json = dup_string(report::to_json(ev));
    });
}

void ak_phantom_options_init(ak_phantom_options* o) {
    if (!o) return;
    const phantom::RandomPhantomOptions d;
    o->size = d.size;
    o->pixel_size_mm = d.pixel_size_mm;
    o->min_width_px = d.min_width_px;
    o->max_width_px = d.max_width_px;
    o->stenoses = d.stenoses;
    o->min_severity_pct = d.min_severity_pct;
    o->max_severity_pct = d.max_severity_pct;
    o->noise_sigma = d.noise_sigma;
    o->illumination = 0;
}

ak_status ak_phantom_random_spec(uint64_t seed, const ak_phantom_options* options, char** spec_json) {
    return guarded([&] {
        need(spec_json, "spec_json");
        *spec_json = nullptr;
        ak_phantom_options o;
        ak_phantom_options_init(&o);
        if (options) o = *options;
        require(o.illumination >= 0 && o.illumination <= 2, ErrorCode::InvalidParameter,
                "illumination must be 0, 1 or 2");
        require(o.stenoses >= 0, ErrorCode::InvalidParameter, "stenosis count must be non-negative");
        require(o.noise_sigma >= 0.0, ErrorCode::InvalidParameter, "noise sigma must be non-negative");
        validate_pixel_size(o.pixel_size_mm);
        phantom::RandomPhantomOptions r;
        r.size = o.size;
        r.pixel_size_mm = o.pixel_size_mm;
        r.min_width_px = o.min_width_px;
        r.max_width_px = o.max_width_px;
        r.stenoses = o.stenoses;
        r.min_severity_pct = o.min_severity_pct;
        r.max_severity_pct = o.max_severity_pct;
        r.noise_sigma = o.noise_sigma;
        r.illumination = static_cast<phantom::Illumination>(o.illumination);
        *spec_json = dup_string(report::phantom_spec_to_json(phantom::random_phantom_spec(seed, r)));
    });
}

ak_status ak_phantom_generate(const char* spec_json, const char* image_id, ak_raster** image, ak_raster** mask,
                              char** truth_json) {
    return guarded([&] {
        need(spec_json, "spec_json");
        if (image) *image = nullptr;
        if (mask) *mask = nullptr;
        if (truth_json) *truth_json = nullptr;
        const phantom::PhantomSpec spec = report::phantom_spec_from_json(spec_json);
        phantom::Phantom ph = phantom::generate_phantom(spec);
        std::string truth = report::truth_to_json(image_id ? image_id : "", spec.pixel_size_mm, ph.truth);
        ak_raster* img = image ? wrap(std::move(ph.image)) : nullptr;
        ak_raster* msk = mask ? wrap(std::move(ph.mask)) : nullptr;
        if (image) *image = img;
        if (mask) *mask = msk;
        if (truth_json) *truth_json = dup_string(truth);
    });
}

}  // extern "C"
