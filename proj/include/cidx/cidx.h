#ifndef CIDX_H
#define CIDX_H

/* C interface to the cidx pricing library. Inputs and results are JSON text; numbers in results are
 * decimals of notional and years (docs/results.md). Every call returns a status; on failure
 * cidx_last_error() holds a JSON error object for the calling thread. */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CIDX_API __attribute__((visibility("default")))
#else
#define CIDX_API
#endif

typedef enum cidx_status {
    CIDX_OK = 0,
    CIDX_INVALID_ARGUMENT = 1,
    CIDX_SCHEMA_ERROR = 2,
    CIDX_UNIT_ERROR = 3,
    CIDX_IO_ERROR = 4,
    CIDX_NUMERICAL_QUALITY = 5, /* pole collisions, missing roots, unreachable quotes, accuracy checks */
    CIDX_UNKNOWN_COMMAND = 6,
    CIDX_INTERNAL_ERROR = 7
} cidx_status;

typedef struct cidx_market cidx_market;
typedef struct cidx_model cidx_model;
typedef struct cidx_config cidx_config;

CIDX_API const char* cidx_version(void);
CIDX_API const char* cidx_status_name(cidx_status status);

/* JSON error object {"status", "code", "message"} of the last failed call on this thread ("" if none). */
CIDX_API const char* cidx_last_error(void);

CIDX_API cidx_status cidx_market_load(const char* path, cidx_market** out);
CIDX_API cidx_status cidx_market_parse(const char* json_text, cidx_market** out);
/* Normalized market file (all quantities in decimals). */
CIDX_API cidx_status cidx_market_to_json(const cidx_market* market, char** out_json);
CIDX_API void cidx_market_free(cidx_market* market);

/* market may be NULL unless the file relies on it (default jump loss, "quote_maturities" breakpoints). */
CIDX_API cidx_status cidx_model_load(const char* path, const cidx_market* market, cidx_model** out);
CIDX_API cidx_status cidx_model_parse(const char* json_text, const cidx_market* market, cidx_model** out);
CIDX_API void cidx_model_free(cidx_model* model);

/* json_text NULL gives the defaults. */
CIDX_API cidx_status cidx_config_parse(const char* json_text, cidx_config** out);
CIDX_API cidx_status cidx_config_load(const char* path, cidx_config** out);
CIDX_API void cidx_config_free(cidx_config* config);

/* Number of commands and their names ("price-cds", ...). */
CIDX_API int cidx_command_count(void);
CIDX_API const char* cidx_command_name(int index);

/* Runs a command on a JSON request. model may be NULL for "calibrate" (the request is the calibration
 * spec). *out_json receives the result; *out_csv (if out_csv is not NULL) the plot data or NULL when the
 * command has none. Free both with cidx_string_free. */
CIDX_API cidx_status cidx_run(const char* command, const cidx_market* market, const cidx_model* model,
                              const cidx_config* config, const char* request_json, char** out_json, char** out_csv);

CIDX_API void cidx_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CIDX_H */
