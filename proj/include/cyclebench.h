/* C interface to the cyclebench library. Every object is an opaque handle
 * released with its matching *_free function. Functions return CB_OK or an
 * error status; cb_last_error() then describes the failure (per thread). */
#ifndef CYCLEBENCH_H
#define CYCLEBENCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CB_API __attribute__((visibility("default")))
#else
#define CB_API
#endif

typedef enum cb_status {
  CB_OK = 0,
  CB_ERR_VALIDATION = 1,
  CB_ERR_IO = 2,
  CB_ERR_FORMAT = 3,
  CB_ERR_INCONSISTENT = 4,
  CB_ERR_DOMAIN = 5,
  CB_ERR_NO_OVERLAP = 6,
  CB_ERR_EMPTY = 7,
  CB_ERR_ARGUMENT = 8,
  CB_ERR_INTERNAL = 9
} cb_status;

typedef enum cb_mode { CB_MODE_SWEEP = 0, CB_MODE_CYCLIC = 1 } cb_mode;
typedef enum cb_x_axis { CB_X_WALL_CLOCK = 0, CB_X_EPOCHS = 1 } cb_x_axis;

typedef struct cb_config cb_config;
typedef struct cb_bundle cb_bundle;
typedef struct cb_report cb_report;

typedef void (*cb_progress_fn)(const char* message, void* user);

CB_API const char* cb_version(void);
CB_API const char* cb_last_error(void);
CB_API const char* cb_status_name(cb_status status);
/* Strings returned through char** out-parameters. */
CB_API void cb_string_free(char* text);

CB_API cb_status cb_config_load(const char* path, cb_config** out);
CB_API cb_status cb_config_parse(const char* text, cb_config** out);
CB_API cb_status cb_config_set_seeds(cb_config* config, const uint64_t* seeds, size_t count);
CB_API cb_status cb_config_set_output(cb_config* config, const char* dir);
CB_API cb_status cb_config_output(const cb_config* config, char** out);
CB_API cb_status cb_config_echo(const cb_config* config, char** toml);
CB_API cb_status cb_config_fingerprint(const cb_config* config, char** out);
CB_API int cb_config_has_mode(const cb_config* config, cb_mode mode);
CB_API void cb_config_free(cb_config* config);

/* Trains every run of `mode`, up to `jobs` at once. Run failures do not make
 * this fail; check cb_bundle_partial(). */
CB_API cb_status cb_run(const cb_config* config, cb_mode mode, size_t jobs, cb_progress_fn progress, void* user,
                        cb_bundle** out);
CB_API int cb_bundle_partial(const cb_bundle* bundle);
CB_API cb_status cb_bundle_label(const cb_bundle* bundle, char** out);
CB_API cb_status cb_bundle_summary(const cb_bundle* bundle, char** json);
/* Runs of the modes present in `from` replace those in `into`. */
CB_API cb_status cb_bundle_merge(cb_bundle* into, const cb_bundle* from);
CB_API cb_status cb_bundle_write(const cb_bundle* bundle, const char* dir);
CB_API cb_status cb_bundle_load(const char* dir, cb_bundle** out);
CB_API void cb_bundle_free(cb_bundle* bundle);

CB_API cb_status cb_compare(const cb_bundle* const* bundles, size_t count, const char* baseline, cb_report** out);
CB_API cb_status cb_report_json(const cb_report* report, char** json);
CB_API void cb_report_free(cb_report* report);

/* Writes SVG files into `dir`; `written` (may be NULL) receives the count. */
CB_API cb_status cb_plot_bundle(const cb_bundle* bundle, const char* dir, cb_x_axis x, size_t* written);
CB_API cb_status cb_plot_report(const cb_report* report, const cb_bundle* const* bundles, size_t count,
                                const char* dir, cb_x_axis x, size_t* written);

CB_API cb_status cb_speedup_ratio(double growth_factor, int64_t cycles, double* out);

#ifdef __cplusplus
}
#endif

#endif
