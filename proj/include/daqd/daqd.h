#ifndef DAQD_DAQD_H
#define DAQD_DAQD_H

/* C interface of libdaqd. Every call returns a daqd_status; on failure the
 * thread's last error message is available from daqd_last_error(). Strings
 * returned through caller buffers follow snprintf rules: *len receives the
 * full length, and the output is truncated (NUL-terminated) to fit `cap`. */

#include <stddef.h>

#if defined(_WIN32)
#define DAQD_API __declspec(dllexport)
#else
#define DAQD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum daqd_status {
    DAQD_OK = 0,
    DAQD_ERR_ARGUMENT = 1,
    DAQD_ERR_CONFIG = 2,
    DAQD_ERR_PARSE = 3,
    DAQD_ERR_IO = 4,
    DAQD_ERR_NUMERIC = 5,
    DAQD_ERR_DIMENSION = 6,
    DAQD_ERR_STATE = 7,
    DAQD_ERR_INTERNAL = 8
} daqd_status;

typedef struct daqd_config daqd_config;

DAQD_API const char* daqd_version(void);
DAQD_API const char* daqd_status_name(daqd_status status);
/* Message of the last failed call on this thread; empty when none. */
DAQD_API const char* daqd_last_error(void);

/* `command` is a subcommand name such as "run-qd"; NULL defers to the
 * run.command key of a file read later (as in a manifest). */
DAQD_API daqd_status daqd_config_create(const char* command, daqd_config** out);
DAQD_API void daqd_config_destroy(daqd_config* cfg);
DAQD_API daqd_status daqd_config_read_file(daqd_config* cfg, const char* path);
DAQD_API daqd_status daqd_config_set(daqd_config* cfg, const char* key, const char* value);
/* "section.key=value". */
DAQD_API daqd_status daqd_config_override(daqd_config* cfg, const char* assignment);
/* Resolved value of `key` after defaults, required-field and range checks. */
DAQD_API daqd_status daqd_config_get(const daqd_config* cfg, const char* key, char* buf, size_t cap, size_t* len);
/* Full resolved config in manifest form. */
DAQD_API daqd_status daqd_config_render(const daqd_config* cfg, char* buf, size_t cap, size_t* len);

/* Write the manifest and run all replications. The resolved output directory
 * is copied to `out_dir` when it is non-NULL. */
DAQD_API daqd_status daqd_execute(const daqd_config* cfg, char* out_dir, size_t cap, size_t* len);
/* Re-run a manifest; `output_dir` may be NULL to reuse the recorded one. */
DAQD_API daqd_status daqd_replay(const char* manifest_path, const char* output_dir);
/* One SVG per plotted metric in `out_dir`. */
DAQD_API daqd_status daqd_plot(const char* const* csv_paths, size_t n_paths, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
