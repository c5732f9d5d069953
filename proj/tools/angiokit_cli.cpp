// angiokit command-line driver. Talks to the library only through the C API.

#include <angiokit/angiokit.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Failure {
    int exit_code;
    std::string message;
};

void check(ak_status s, const std::string& context) {
    if (s == AK_OK) return;
    throw Failure{s == AK_ERR_IO ? kExitIo : kExitValidation,
                  context + ": " + ak_status_string(s) + ": " + ak_last_error()};
}

struct RasterDeleter {
    void operator()(ak_raster* r) const { ak_raster_free(r); }
};
using Raster = std::unique_ptr<ak_raster, RasterDeleter>;

struct StringDeleter {
    void operator()(char* s) const { ak_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

Raster read(const std::string& path, ak_raster_kind kind) {
    ak_raster* r = nullptr;
    check(ak_raster_read(path.c_str(), kind, &r), "reading " + path);
    return Raster(r);
}

void write(const ak_raster* r, const std::string& path) { check(ak_raster_write(r, path.c_str()), "writing " + path); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kExitIo, "cannot read " + path};
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
        throw Failure{kExitIo, "cannot write " + path};
}

// Fewest significant digits that read back as the same double.
std::string shortest(double v) {
    char buf[32];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

// ---- enhance ----

struct EnhanceArgs {
    std::string input;
    std::string output;
    int se_radius = 15;
    double bg_sigma = 64.0;
};

void run_enhance(const EnhanceArgs& a) {
    const Raster img = read(a.input, AK_GRAY);
    ak_raster* out = nullptr;
    check(ak_enhance(img.get(), a.se_radius, a.bg_sigma, &out), "enhance");
    const Raster enhanced(out);
    write(enhanced.get(), a.output);
}

// ---- stack ----

struct StackArgs {
    std::string image;
    std::string prob;
    std::string edge;
    std::string output;
    bool raw = false;  // skip enhancement
    std::optional<std::uint64_t> augment_seed;
    std::string mask;
    std::string mask_out;
};

void run_stack(const StackArgs& a) {
    Raster img = read(a.image, AK_GRAY);
    if (a.augment_seed) {
        if (a.mask.empty() || a.mask_out.empty())
            throw Failure{kExitValidation, "--augment-seed needs --mask and --mask-out"};
        const Raster mask = read(a.mask, AK_MASK);
        ak_raster* ai = nullptr;
        ak_raster* am = nullptr;
        check(ak_augment(img.get(), mask.get(), *a.augment_seed, &ai, &am), "augment");
        img.reset(ai);
        const Raster aug_mask(am);
        write(aug_mask.get(), a.mask_out);
    }
    Raster base;
    if (a.raw) {
        base = std::move(img);
    } else {
        ak_raster* e = nullptr;
        check(ak_enhance(img.get(), 15, 64.0, &e), "enhance");
        base.reset(e);
    }
    Raster prob;
    Raster edge;
    if (!a.prob.empty()) prob = read(a.prob, AK_PROBABILITY);
    if (!a.edge.empty()) {
        edge = read(a.edge, AK_GRAY);
    } else if (prob) {
        ak_raster* e = nullptr;
        check(ak_edge_map(base.get(), &e), "edge map");
        edge.reset(e);
    }
    check(ak_write_stack(base.get(), prob.get(), edge.get(), a.output.c_str()), "stack");
}

// ---- binarize ----

struct BinarizeArgs {
    std::string input;
    std::string output;
    int window = 384;
    int stride = 32;
    int connectivity = 8;
    bool global = false;
    bool keep_all = false;
};

void run_binarize(const BinarizeArgs& a) {
    const Raster prob = read(a.input, AK_PROBABILITY);
    ak_binarize_options o;
    ak_binarize_options_init(&o);
    o.patched = a.global ? 0 : 1;
    o.largest = a.keep_all ? 0 : 1;
    o.window = a.window;
    o.stride = a.stride;
    o.connectivity = a.connectivity;
    ak_raster* m = nullptr;
    check(ak_binarize(prob.get(), &o, &m), "binarize");
    const Raster mask(m);
    write(mask.get(), a.output);
}

// ---- analyze ----

struct AnalyzeArgs {
    std::string input;
    std::string output;
    std::string overlay;
    std::string image_id;
    std::optional<double> pixel_size_mm;
    std::string pixel_size_file;
    double min_diameter_mm = 1.8;
    double report_threshold_pct = 10.0;
    int spur_min_len = 5;
};

void run_analyze(const AnalyzeArgs& a) {
    double px = 0.0;
    if (a.pixel_size_mm) {
        px = *a.pixel_size_mm;
    } else if (!a.pixel_size_file.empty()) {
        check(ak_read_pixel_size(a.pixel_size_file.c_str(), &px), "reading " + a.pixel_size_file);
    } else {
        throw Failure{kExitValidation, "analyze needs a pixel size (--pixel-size-mm or --pixel-size-file)"};
    }
    const Raster mask = read(a.input, AK_MASK);
    check(ak_raster_set_pixel_size(mask.get(), px), "pixel size");
    ak_analyze_options o;
    ak_analyze_options_init(&o);
    o.min_diameter_mm = a.min_diameter_mm;
    o.report_threshold_pct = a.report_threshold_pct;
    o.spur_min_len = a.spur_min_len;
    char* json = nullptr;
    const std::string id = a.image_id.empty() ? stem(a.input) : a.image_id;
    check(ak_analyze(mask.get(), id.c_str(), &o, &json, a.overlay.empty() ? nullptr : a.overlay.c_str()), "analyze");
    const OwnedString report(json);
    emit(report.get(), a.output);
}

// ---- evaluate ----

struct EvaluateArgs {
    std::string pred;
    std::string gt;
    std::string pred_mask;
    std::string gt_mask;
    std::string output;
    double match_radius_px = 10.0;
};

void run_evaluate(const EvaluateArgs& a) {
    if (a.pred.empty() != a.gt.empty()) throw Failure{kExitValidation, "--pred and --gt go together"};
    if (a.pred_mask.empty() != a.gt_mask.empty())
        throw Failure{kExitValidation, "--pred-mask and --gt-mask go together"};
    if (a.pred.empty() && a.pred_mask.empty())
        throw Failure{kExitValidation, "evaluate needs finding documents, masks, or both"};
    std::string pred_text;
    std::string gt_text;
    if (!a.pred.empty()) {
        pred_text = slurp(a.pred);
        gt_text = slurp(a.gt);
    }
    Raster pm;
    Raster gm;
    if (!a.pred_mask.empty()) {
        pm = read(a.pred_mask, AK_MASK);
        gm = read(a.gt_mask, AK_MASK);
    }
    char* json = nullptr;
    check(ak_evaluate(a.pred.empty() ? nullptr : pred_text.c_str(), a.gt.empty() ? nullptr : gt_text.c_str(),
                      pm.get(), gm.get(), a.match_radius_px, &json),
          "evaluate");
    const OwnedString metrics(json);
    emit(metrics.get(), a.output);
}

// ---- phantom ----

struct PhantomArgs {
    std::uint64_t seed = 0;
    std::string spec;
    std::string out_dir;
    std::string image_format = "png";
    int size = 512;
    double pixel_size_mm = 0.3;
    double noise_sigma = 0.0;
    std::string illumination = "none";
    int stenoses = 1;
    double min_width_px = 6.0;
    double max_width_px = 14.0;
};

void run_phantom(const PhantomArgs& a) {
    std::string spec_text;
    if (!a.spec.empty()) {
        spec_text = slurp(a.spec);
    } else {
        ak_phantom_options o;
        ak_phantom_options_init(&o);
        o.size = a.size;
        o.pixel_size_mm = a.pixel_size_mm;
        o.noise_sigma = a.noise_sigma;
        o.stenoses = a.stenoses;
        o.min_width_px = a.min_width_px;
        o.max_width_px = a.max_width_px;
        o.illumination = a.illumination == "linear_ramp" ? 1 : a.illumination == "radial" ? 2 : 0;
        char* s = nullptr;
        check(ak_phantom_random_spec(a.seed, &o, &s), "phantom spec");
        spec_text = OwnedString(s).get();
    }
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw Failure{kExitIo, "cannot create " + a.out_dir + ": " + ec.message()};

    ak_raster* img = nullptr;
    ak_raster* msk = nullptr;
    char* truth = nullptr;
    const std::string id = "phantom_" + std::to_string(a.seed);
    check(ak_phantom_generate(spec_text.c_str(), id.c_str(), &img, &msk, &truth), "phantom");
    const Raster image(img);
    const Raster mask(msk);
    const OwnedString truth_json(truth);

    double px = 0.0;
    int has = 0;
    check(ak_raster_pixel_size(mask.get(), &px, &has), "pixel size");
    const fs::path dir(a.out_dir);
    write(image.get(), (dir / ("image." + a.image_format)).string());
    write(mask.get(), (dir / ("mask." + a.image_format)).string());
    emit(truth_json.get(), (dir / "truth.json").string());
    emit(spec_text, (dir / "spec.json").string());
    emit("{\n  \"pixel_size_mm\": " + shortest(px) + "\n}\n", (dir / "pixel_size.json").string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"angiokit: vessel centreline and stenosis analysis"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = ANGIOKIT_THREADS or hardware)");

    EnhanceArgs enhance;
    auto* enh = app.add_subcommand("enhance", "Contrast-enhance a grayscale angiogram");
    enh->add_option("-i,--input", enhance.input)->required();
    enh->add_option("-o,--output", enhance.output)->required();
    enh->add_option("--se-radius", enhance.se_radius, "Top-hat disk radius (px)")->capture_default_str();
    enh->add_option("--bg-sigma", enhance.bg_sigma, "Background blur sigma (px)")->capture_default_str();

    StackArgs stack;
    auto* stk = app.add_subcommand("stack", "Write a three-channel training stack (.pfm)");
    stk->add_option("-i,--image", stack.image)->required();
    stk->add_option("--prob", stack.prob, "Probability map; makes a stage-2 stack");
    stk->add_option("--edge", stack.edge, "Edge map (computed from the image when omitted)");
    stk->add_option("-o,--output", stack.output)->required();
    stk->add_flag("--raw", stack.raw, "Use the image as given instead of enhancing it");
    stk->add_option("--augment-seed", stack.augment_seed, "Flip/rotate the image and mask first");
    stk->add_option("--mask", stack.mask, "Mask to augment alongside the image");
    stk->add_option("--mask-out", stack.mask_out, "Where to write the augmented mask");

    BinarizeArgs bin;
    auto* bz = app.add_subcommand("binarize", "Threshold a probability map into a vessel mask");
    bz->add_option("-i,--input", bin.input)->required();
    bz->add_option("-o,--output", bin.output)->required();
    bz->add_option("--window", bin.window, "Otsu window (px)")->capture_default_str();
    bz->add_option("--stride", bin.stride, "Window stride (px)")->capture_default_str();
    bz->add_option("--connectivity", bin.connectivity)->check(CLI::IsMember({4, 8}))->capture_default_str();
    bz->add_flag("--global", bin.global, "Single global Otsu threshold");
    bz->add_flag("--keep-all", bin.keep_all, "Keep every component, not only the largest");

    AnalyzeArgs an;
    auto* anc = app.add_subcommand("analyze", "Centreline, diameters and stenosis report for a mask");
    anc->add_option("-i,--input", an.input)->required();
    anc->add_option("-o,--output", an.output, "Report path (stdout when omitted)");
    anc->add_option("--overlay", an.overlay, "Overlay image (.png or .ppm)");
    anc->add_option("--image-id", an.image_id, "Defaults to the input file stem");
    anc->add_option("--pixel-size-mm", an.pixel_size_mm);
    anc->add_option("--pixel-size-file", an.pixel_size_file, "JSON sidecar with pixel_size_mm");
    anc->add_option("--min-diameter-mm", an.min_diameter_mm)->capture_default_str();
    anc->add_option("--report-threshold-pct", an.report_threshold_pct)->capture_default_str();
    anc->add_option("--spur-min-len", an.spur_min_len)->capture_default_str();

    EvaluateArgs ev;
    auto* evc = app.add_subcommand("evaluate", "Pixel and stenosis metrics against ground truth");
    evc->add_option("--pred", ev.pred, "Predicted report or findings JSON");
    evc->add_option("--gt", ev.gt, "Ground-truth report or truth JSON");
    evc->add_option("--pred-mask", ev.pred_mask);
    evc->add_option("--gt-mask", ev.gt_mask);
    evc->add_option("--match-radius-px", ev.match_radius_px)->capture_default_str();
    evc->add_option("-o,--output", ev.output, "Metrics path (stdout when omitted)");

    PhantomArgs ph;
    auto* phc = app.add_subcommand("phantom", "Generate a synthetic vessel tree with ground truth");
    phc->add_option("--seed", ph.seed)->capture_default_str();
    phc->add_option("--spec", ph.spec, "Explicit spec JSON instead of a random draw");
    phc->add_option("--out-dir", ph.out_dir)->required();
    phc->add_option("--image-format", ph.image_format)->check(CLI::IsMember({"png", "pgm", "pfm"}))->capture_default_str();
    phc->add_option("--size", ph.size)->capture_default_str();
    phc->add_option("--pixel-size-mm", ph.pixel_size_mm)->capture_default_str();
    phc->add_option("--noise", ph.noise_sigma)->capture_default_str();
    phc->add_option("--illumination", ph.illumination)
        ->check(CLI::IsMember({"none", "linear_ramp", "radial"}))
        ->capture_default_str();
    phc->add_option("--stenoses", ph.stenoses)->capture_default_str();
    phc->add_option("--min-width-px", ph.min_width_px)->capture_default_str();
    phc->add_option("--max-width-px", ph.max_width_px)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (threads < 0) {
        std::cerr << "error: --threads must be non-negative\n";
        return kExitValidation;
    }
    ak_set_max_threads(threads);

    try {
        if (*enh) run_enhance(enhance);
        else if (*stk) run_stack(stack);
        else if (*bz) run_binarize(bin);
        else if (*anc) run_analyze(an);
        else if (*evc) run_evaluate(ev);
        else if (*phc) run_phantom(ph);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.exit_code;
    }
    return 0;
}
