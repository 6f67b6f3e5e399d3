#ifndef RELIGHT_H
#define RELIGHT_H

/*
 * C interface to the low-light enhancement library.
 *
 * Every fallible call returns a relight_status; on failure,
 * relight_last_error() describes what went wrong in the calling thread.
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function. Out-parameters are written
 * only on RELIGHT_OK.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum relight_status {
    RELIGHT_OK = 0,
    RELIGHT_ERR_INVALID_ARGUMENT = 1, /* bad handle, dimension mismatch, range */
    RELIGHT_ERR_IO = 2,               /* missing file, unreadable/unwritable path */
    RELIGHT_ERR_FORMAT = 3,           /* unrecognized or corrupt image file */
    RELIGHT_ERR_CONFIG = 4,           /* invalid configuration or manifest */
    RELIGHT_ERR_NUMERIC = 5,          /* non-finite value in an iterative step */
    RELIGHT_ERR_UNKNOWN = 6
} relight_status;

/* Message for the most recent failure in this thread; never NULL. */
const char* relight_last_error(void);

/* Three-channel image with samples in [0, 1]. */
typedef struct relight_image relight_image;

/* Staged decomposition trace: reflectance, illumination and objective value
 * per stage (stage 0 is the initialization). */
typedef struct relight_decomposition relight_decomposition;

/* ---- images ---------------------------------------------------------- */

/* Loads a PNG (8/16-bit) or binary PPM file. */
relight_status relight_image_load(const char* path, relight_image** out);

/* Builds an image from row-major interleaved RGB doubles (3*height*width). */
relight_status relight_image_create(int height, int width, const double* rgb_interleaved,
                                    relight_image** out);

/* Writes an 8-bit RGB PNG (values clipped to [0, 1], round-half-up). */
relight_status relight_image_save(const relight_image* img, const char* path);

/* Dimension queries return 0 for a NULL handle. */
int relight_image_height(const relight_image* img);
int relight_image_width(const relight_image* img);

/* Copies pixels out as row-major interleaved RGB (3*height*width doubles). */
relight_status relight_image_pixels(const relight_image* img, double* rgb_interleaved);

void relight_image_free(relight_image* img);

/* ---- decomposition --------------------------------------------------- */

/* Splits an image into reflectance and illumination with the staged solver.
 * config_json is a (possibly partial) run-config document — only its
 * "solver" section applies here — or NULL for defaults. */
relight_status relight_decompose(const relight_image* img, const char* config_json,
                                 relight_decomposition** out);

/* Number of recorded states (configured stage count + 1); 0 for NULL. */
int relight_decomposition_stages(const relight_decomposition* d);

relight_status relight_decomposition_objective(const relight_decomposition* d, int stage,
                                               double* out);

/* Reflectance at a stage, as a new image. */
relight_status relight_decomposition_reflectance(const relight_decomposition* d, int stage,
                                                 relight_image** out);

/* Illumination at a stage, broadcast to three equal channels. */
relight_status relight_decomposition_illumination(const relight_decomposition* d, int stage,
                                                  relight_image** out);

void relight_decomposition_free(relight_decomposition* d);

/* ---- pipeline entry points ------------------------------------------- */

/* Runs the full enhancement pipeline on one image file. config_json may be
 * NULL (defaults) or a partial run-config document; alpha_override, when
 * non-NULL, replaces the configured starting brightness amount. On success,
 * *report_json (if non-NULL) receives a malloc'd JSON string naming the
 * written files; release it with relight_string_free. */
relight_status relight_enhance(const char* input_path, const char* config_json,
                               const double* alpha_override, char** report_json);

/* Evaluates every entry of a dataset manifest and writes a JSON report with
 * per-image rows and a mean row to report_path. */
relight_status relight_benchmark(const char* manifest_path, const char* config_json,
                                 const char* report_path);

/* Quality numbers for an enhanced image: fidelity against the reference,
 * lightness-order fidelity against both the low-light input and the
 * reference. *metrics_json receives a malloc'd flat JSON object. */
relight_status relight_metrics(const relight_image* enhanced, const relight_image* reference,
                               const relight_image* low, char** metrics_json);

void relight_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RELIGHT_H */
