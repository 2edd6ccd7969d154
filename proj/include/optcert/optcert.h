/* C interface to liboptcert. All strings are UTF-8 and NUL-terminated.
 * Handles are opaque; free them with the matching *_free function. */
#ifndef OPTCERT_H
#define OPTCERT_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define OPTCERT_API __attribute__((visibility("default")))
#else
#define OPTCERT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct optcert_scenario optcert_scenario;
typedef struct optcert_report optcert_report;

typedef enum optcert_status {
    OPTCERT_OK = 0,
    OPTCERT_NEGATIVE_VERDICT = 1, /* analysis ran; verdict is negative */
    OPTCERT_USAGE = 2,            /* bad argument or option value */
    OPTCERT_VALIDATION = 3,       /* malformed or invalid scenario/model */
    OPTCERT_NOT_FOUND = 4,
    OPTCERT_NONCONVERGENCE = 5,
    OPTCERT_INTERNAL = 6
} optcert_status;

typedef struct optcert_options {
    double tol;            /* value-iteration tolerance; <= 0 keeps 1e-10 */
    double argmin_tol;     /* <= 0 keeps 1e-9 */
    size_t max_iter;       /* 0 keeps 100000 */
    size_t omega_horizon;  /* 0 uses the number of states */
} optcert_options;

/* Message for the last failing call on this thread ("" if none). */
OPTCERT_API const char* optcert_last_error(void);
OPTCERT_API const char* optcert_version(void);

OPTCERT_API optcert_status optcert_scenario_load(const char* path, optcert_scenario** out);
OPTCERT_API optcert_status optcert_scenario_builtin(const char* name, optcert_scenario** out);
OPTCERT_API optcert_status optcert_scenario_save(const optcert_scenario* scenario, const char* path);
/* Newline-separated list of builtin names; static storage. */
OPTCERT_API const char* optcert_builtin_names(void);
OPTCERT_API void optcert_scenario_free(optcert_scenario* scenario);

/* `options` may be NULL. On success (OK or NEGATIVE_VERDICT) *out holds a report. */
OPTCERT_API optcert_status optcert_solve(const optcert_scenario* s, const optcert_options* options, optcert_report** out);
OPTCERT_API optcert_status optcert_certify(const optcert_scenario* s, const char* model, const optcert_options* options,
                               optcert_report** out);
OPTCERT_API optcert_status optcert_suffcheck(const optcert_scenario* s, const char* model, const optcert_options* options,
                                 optcert_report** out);
OPTCERT_API optcert_status optcert_synthesize(const optcert_scenario* s, int deterministic, const optcert_options* options,
                                  optcert_report** out);
/* terminal: "vhat", "zero", "scenario" or "file:<path>"; horizon 0 takes the scenario's. */
OPTCERT_API optcert_status optcert_mpc(const optcert_scenario* s, const char* model, size_t horizon, const char* terminal,
                           const optcert_options* options, optcert_report** out);
/* policy: "optimal", "model:<spec>" or "actions:<a0,a1,...>". */
OPTCERT_API optcert_status optcert_simulate(const optcert_scenario* s, const char* policy, size_t episodes, uint64_t seed,
                                size_t truncation, const optcert_options* options, optcert_report** out);
/* models: comma-separated model specs; NULL or "" uses the baseline set. */
OPTCERT_API optcert_status optcert_compare(const optcert_scenario* s, const char* models, const optcert_options* options,
                               optcert_report** out);

OPTCERT_API const char* optcert_report_json(const optcert_report* report);
OPTCERT_API const char* optcert_report_table(const optcert_report* report);
OPTCERT_API int optcert_report_negative(const optcert_report* report);
OPTCERT_API void optcert_report_free(optcert_report* report);

#ifdef __cplusplus
}
#endif

#endif
