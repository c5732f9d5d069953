/* C interface to the angiokit vessel analysis library.
 *
 * Objects are opaque handles released with their matching free function.
 * Every call returns an ak_status; on failure ak_last_error() describes the
 * problem for the calling thread. Strings returned through char** belong to
 * the caller and are released with ak_string_free().
 */
#ifndef ANGIOKIT_ANGIOKIT_H
#define ANGIOKIT_ANGIOKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ANGIOKIT_BUILDING)
#    define AK_API __declspec(dllexport)
#  else
#    define AK_API __declspec(dllimport)
#  endif
#else
#  define AK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ak_status {
    AK_OK = 0,
    AK_ERR_INVALID_INPUT = 1,
    AK_ERR_INVALID_PARAMETER = 2,
    AK_ERR_INVALID_COMBINATION = 3,
    AK_ERR_COVERAGE = 4,
    AK_ERR_CONFIGURATION = 5,
    AK_ERR_DEGENERATE = 6,
    AK_ERR_INVALID_SPEC = 7,
    AK_ERR_IO = 8,
    AK_ERR_INTERNAL = 9
} ak_status;

typedef enum ak_raster_kind {
    AK_GRAY = 0,        /* intensities in [0, 1] */
    AK_PROBABILITY = 1, /* per-pixel vessel probability in [0, 1] */
    AK_MASK = 2         /* 0 / 1 */
} ak_raster_kind;

typedef struct ak_raster ak_raster;

AK_API const char* ak_version(void);
AK_API const char* ak_status_string(ak_status status);
/* Message of the last failed call on this thread; empty after a success. */
AK_API const char* ak_last_error(void);
AK_API void ak_string_free(char* s);

/* Caps worker threads; 0 restores the default (ANGIOKIT_THREADS or hardware). */
AK_API void ak_set_max_threads(int n);

/* ---- rasters ---- */

/* `data` holds width*height row-major samples, or NULL for zeros. */
AK_API ak_status ak_raster_create(ak_raster_kind kind, int width, int height, const double* data, ak_raster** out);
AK_API ak_status ak_raster_copy(const ak_raster* src, ak_raster** out);
AK_API void ak_raster_free(ak_raster* r);

/* Format follows the extension: .png, .pgm or .pfm. */
AK_API ak_status ak_raster_read(const char* path, ak_raster_kind kind, ak_raster** out);
AK_API ak_status ak_raster_write(const ak_raster* r, const char* path);

AK_API ak_status ak_raster_info(const ak_raster* r, int* width, int* height, ak_raster_kind* kind);
AK_API ak_status ak_raster_pixels(const ak_raster* r, double* out, size_t count);

/* mm <= 0 clears the pixel size. */
AK_API ak_status ak_raster_set_pixel_size(ak_raster* r, double mm);
/* *has is set to 0 when no pixel size is attached. */
AK_API ak_status ak_raster_pixel_size(const ak_raster* r, double* mm, int* has);

/* Reads {"pixel_size_mm": x}. */
AK_API ak_status ak_read_pixel_size(const char* path, double* mm);

/* ---- preprocessing ---- */

AK_API ak_status ak_enhance(const ak_raster* gray, int se_radius, double bg_sigma, ak_raster** out);
AK_API ak_status ak_edge_map(const ak_raster* gray, ak_raster** out);

/* Writes a three-channel PFM. With prob and edge NULL the stack repeats
 * `image` (stage 1); with both given it is (image, prob, edge) (stage 2).
 * Giving only one of them is AK_ERR_INVALID_COMBINATION. */
AK_API ak_status ak_write_stack(const ak_raster* image, const ak_raster* prob, const ak_raster* edge,
                                const char* path);

AK_API ak_status ak_augment(const ak_raster* image, const ak_raster* mask, uint64_t seed, ak_raster** out_image,
                            ak_raster** out_mask);

/* ---- binarisation ---- */

typedef struct ak_binarize_options {
    int patched;      /* windowed Otsu instead of a single global threshold */
    int window;       /* px */
    int stride;       /* px */
    int largest;      /* keep only the largest component */
    int connectivity; /* 4 or 8 */
} ak_binarize_options;

AK_API void ak_binarize_options_init(ak_binarize_options* options);
AK_API ak_status ak_binarize(const ak_raster* prob, const ak_binarize_options* options, ak_raster** out_mask);

/* ---- analysis ---- */

typedef struct ak_analyze_options {
    double min_diameter_mm;
    double report_threshold_pct;
    int spur_min_len;
} ak_analyze_options;

AK_API void ak_analyze_options_init(ak_analyze_options* options);

/* The mask must carry a pixel size. `overlay_path` may be NULL. */
AK_API ak_status ak_analyze(const ak_raster* mask, const char* image_id, const ak_analyze_options* options,
                            char** report_json, const char* overlay_path);

/* Findings come from report or truth JSON documents; either mask may be NULL,
 * in which case pixel metrics are omitted. */
AK_API ak_status ak_evaluate(const char* pred_json, const char* gt_json, const ak_raster* pred_mask,
                             const ak_raster* gt_mask, double match_radius_px, char** metrics_json);

/* ---- phantoms ---- */

typedef struct ak_phantom_options {
    int size;
    double pixel_size_mm;
    double min_width_px;
    double max_width_px;
    int stenoses;
    double min_severity_pct;
    double max_severity_pct;
    double noise_sigma;
    int illumination; /* 0 none, 1 linear ramp, 2 radial */
} ak_phantom_options;

AK_API void ak_phantom_options_init(ak_phantom_options* options);

/* Draws a random tree spec for `seed`, returned as JSON. */
AK_API ak_status ak_phantom_random_spec(uint64_t seed, const ak_phantom_options* options, char** spec_json);

/* Renders a spec. Any output pointer may be NULL. */
AK_API ak_status ak_phantom_generate(const char* spec_json, const char* image_id, ak_raster** image,
                                     ak_raster** mask, char** truth_json);

#ifdef __cplusplus
}
#endif

#endif /* ANGIOKIT_ANGIOKIT_H */
