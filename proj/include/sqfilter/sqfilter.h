/* C interface of the squeezed-light quantum filtering library.
 *
 * All functionality is exposed through opaque handles and status codes so
 * the shared library can be consumed from C, scripting languages, or the
 * bundled command-line tool without any C++ ABI coupling.
 *
 * Conventions:
 *   - Functions returning sqf_status report SQF_OK (0) on success.
 *   - Functions returning pointers report failure with NULL.
 *   - In both cases sqf_last_error() returns a human-readable message for
 *     the most recent failure on the calling thread.
 *   - Strings returned through char** out-parameters are heap-allocated;
 *     release them with sqf_string_free().
 */

#ifndef SQFILTER_SQFILTER_H
#define SQFILTER_SQFILTER_H

#if defined(_WIN32)
#define SQF_API __declspec(dllexport)
#else
#define SQF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sqf_status {
  SQF_OK = 0,
  SQF_ERR_INVALID_ARGUMENT = 1,
  SQF_ERR_PARSE = 2,
  SQF_ERR_PHYSICALITY = 3,
  SQF_ERR_DIMENSION = 4,
  SQF_ERR_NONCOMMUTING_OBSERVATIONS = 5,
  SQF_ERR_SINGULAR_NOISE = 6,
  SQF_ERR_STEP_SIZE = 7,
  SQF_ERR_LEAKAGE = 8,
  SQF_ERR_IO = 9,
  SQF_ERR_UNSUPPORTED = 10,
  SQF_ERR_INTERNAL = 11,
  /* A verification suite ran to completion but at least one check failed. */
  SQF_ERR_VERIFY_FAILED = 12
} sqf_status;

/* Opaque configuration handle (scenario + run settings). */
typedef struct sqf_config sqf_config;

/* Semantic version of the library. Static storage; do not free. */
SQF_API const char* sqf_version(void);

/* Message of the most recent failure on the calling thread ("" if none).
 * Valid until the next library call on the same thread; do not free. */
SQF_API const char* sqf_last_error(void);

/* Releases a string returned through a char** out-parameter. */
SQF_API void sqf_string_free(char* s);

/* Parses a scenario configuration from a file. Accepts the INI-style
 * scenario format, or a manifest.json written by a previous run (detected
 * by a leading '{'); re-running a manifest with the same library version
 * reproduces the original outputs byte for byte. NULL on failure. */
SQF_API sqf_config* sqf_config_parse_file(const char* path);

/* Parses configuration text; `name` labels parse errors (like a filename).
 * NULL on failure. */
SQF_API sqf_config* sqf_config_parse_text(const char* text, const char* name);

/* Overrides one value by dotted key, e.g. sqf_config_set(cfg, "run.seed",
 * "7"). The new value is validated on the next sqf_config_validate /
 * sqf_simulate / sqf_sweep call. */
SQF_API sqf_status sqf_config_set(sqf_config* cfg, const char* dotted_key,
                                  const char* value);

/* Interprets and builds the full scenario, running every model, noise,
 * state, and filter-coefficient validation without simulating. */
SQF_API sqf_status sqf_config_validate(const sqf_config* cfg);

SQF_API void sqf_config_free(sqf_config* cfg);

/* Runs the configured scenario and writes trajectory/ensemble CSVs plus
 * manifest.json into out_dir (created if missing). When summary_json is
 * non-NULL it receives a JSON object {files, invariant_log, margins};
 * "files" entries are names relative to out_dir. */
SQF_API sqf_status sqf_simulate(const sqf_config* cfg, const char* out_dir,
                                char** summary_json);

/* Newline-separated list of verification suite names. Static; do not free. */
SQF_API const char* sqf_verify_suites(void);

/* Runs one verification suite. Writes the JSON report to report_path when
 * non-NULL, and returns it through report_json when non-NULL. Returns
 * SQF_OK when every check passed and SQF_ERR_VERIFY_FAILED when the suite
 * ran but at least one check failed. */
SQF_API sqf_status sqf_verify(const char* suite, const char* report_path,
                              char** report_json);

/* Re-runs the scenario once per value of the dotted config key `parameter`
 * (values given as strings, exactly as they would appear in the config
 * file) and writes sweep.csv plus manifest.json into out_dir. When
 * summary_json is non-NULL it receives the sweep rows as JSON. */
SQF_API sqf_status sqf_sweep(const sqf_config* cfg, const char* parameter,
                             const char* const* values, int n_values,
                             const char* out_dir, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* SQFILTER_SQFILTER_H */
