#ifndef AGENTIC_CORE_H
#define AGENTIC_CORE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AgenticStatus {
  AGENTIC_STATUS_OK = 0,
  AGENTIC_STATUS_NULL_ARGUMENT = 1,
  AGENTIC_STATUS_INVALID_UTF8 = 2,
  AGENTIC_STATUS_INVALID_ARGUMENT = 3,
  AGENTIC_STATUS_PORT_CONFLICT = 4,
  AGENTIC_STATUS_STARTUP_FAILED = 5,
  AGENTIC_STATUS_LIFECYCLE_FAILED = 6,
  AGENTIC_STATUS_TASK_FAILED = 7,
  AGENTIC_STATUS_INTERNAL = 8,
  AGENTIC_STATUS_PANIC = 9,
} AgenticStatus;

/**
 * Opaque handle on a running stack.
 */
typedef struct AgenticStack AgenticStack;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread; do not free.
 */
const char *agentic_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a pointer obtained from this library and not yet freed.
 */
void agentic_string_free(char *s);

/**
 * Library version; static, do not free.
 */
const char *agentic_version(void);

/**
 * Builds `{apiRoot}/{apiName}/{apiVersion}/{resource}`.
 *
 * # Safety
 * String arguments are valid C strings; `out` is valid for writing.
 */
enum AgenticStatus agentic_build_resource_uri(const char *api_root,
                                              const char *api_name,
                                              const char *api_version,
                                              const char *resource,
                                              char **out);

/**
 * Interprets an operator intent against the default deployment; writes the
 * plan as JSON (`{"steps":[...]}`).
 *
 * # Safety
 * `prompt` is a valid C string; `out` is valid for writing.
 */
enum AgenticStatus agentic_interpret_intent(const char *prompt, char **out);

/**
 * Latency breakdown of traced runs. Input: JSON array of runs, each an
 * array of trace events. Output: the report as JSON.
 *
 * # Safety
 * `traces_json` is a valid C string; `out` is valid for writing.
 */
enum AgenticStatus agentic_latency_breakdown(const char *traces_json, char **out);

/**
 * Boots a stack. `config_toml` is a deployment config in TOML, or null for
 * the defaults on OS-assigned ports.
 *
 * # Safety
 * `config_toml` is null or a valid C string; `out` is valid for writing.
 */
enum AgenticStatus agentic_stack_up(const char *config_toml, struct AgenticStack **out);

/**
 * Stops the stack and releases the handle. Null is ignored.
 *
 * # Safety
 * `h` is null or a handle from [`agentic_stack_up`] not yet released; no
 * other thread may use it concurrently.
 */
void agentic_stack_down(struct AgenticStack *h);

/**
 * Sends a prompt to the Host Agent. Writes `{"run","text","error","elapsedS","events"}`
 * as JSON; returns [`AgenticStatus::TaskFailed`] (still writing the JSON)
 * when the task did not complete.
 *
 * # Safety
 * `h` is a live handle; `text` a valid C string; `out` valid for writing.
 */
enum AgenticStatus agentic_stack_prompt(const struct AgenticStack *h, const char *text, char **out);

/**
 * Applies a lifecycle action (`start`, `stop`, `restart`) to an NF and
 * writes the outcome as JSON.
 *
 * # Safety
 * `h` is a live handle; strings are valid C strings; `out` valid for writing.
 */
enum AgenticStatus agentic_stack_lifecycle(const struct AgenticStack *h,
                                           const char *nf_type,
                                           const char *action,
                                           char **out);

/**
 * NF states, registrations and endpoints as JSON.
 *
 * # Safety
 * `h` is a live handle; `out` valid for writing.
 */
enum AgenticStatus agentic_stack_status(const struct AgenticStack *h, char **out);

/**
 * Runs a built-in scenario or scenario file; writes the outcome as JSON and
 * returns [`AgenticStatus::TaskFailed`] (still writing it) when any
 * assertion failed.
 *
 * # Safety
 * `h` is a live handle; `scenario` a valid C string; `out` valid for writing.
 */
enum AgenticStatus agentic_stack_run_scenario(const struct AgenticStack *h,
                                              const char *scenario,
                                              char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGENTIC_CORE_H */
