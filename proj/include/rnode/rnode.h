/* Roadside perception-node engine: C API over the C++ core.
 *
 * All entry points return an rnode_status and, on request, an opaque
 * rnode_result carrying a JSON report (and the error message on failure).
 * Results must be released with rnode_result_free.
 */
#ifndef RNODE_H
#define RNODE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rnode_status {
  RNODE_OK = 0,
  RNODE_ERR_INPUT = 1,   /* bad file, malformed record, invalid config */
  RNODE_ERR_INTERNAL = 2 /* anything else */
} rnode_status;

typedef struct rnode_result rnode_result;

/* JSON report of the finished operation; NULL when the call failed. */
const char* rnode_result_json(const rnode_result* result);
/* Human-readable error; NULL when the call succeeded. */
const char* rnode_result_error(const rnode_result* result);
void rnode_result_free(rnode_result* result);

const char* rnode_version(void);

/* Run the full pipeline over a trace. config_path, zones_path may be NULL.
 * Writes events.jsonl, messages.jsonl and report.json under out_dir.
 * realtime/pipelined are booleans (0/1). */
rnode_status rnode_run(const char* trace_path, const char* config_path,
                       const char* zones_path, const char* out_dir, uint64_t seed,
                       int realtime, int pipelined, rnode_result** result);

/* Synthesize a labeled trace from a scenario spec (trace + .gt.json sidecar). */
rnode_status rnode_generate(const char* spec_path, uint64_t seed, const char* out_path,
                            rnode_result** result);

/* Score an event log against a ground-truth sidecar. */
rnode_status rnode_evaluate(const char* events_path, const char* gt_path,
                            rnode_result** result);

/* Throughput benchmark; repetitions must be >= 3. */
rnode_status rnode_bench(const char* trace_path, const char* config_path, int repetitions,
                         rnode_result** result);

/* Commissioning: derive the zone document from a trace's calibration window
 * and write it to out_path. */
rnode_status rnode_derive_zones(const char* trace_path, const char* config_path,
                                const char* out_path, rnode_result** result);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RNODE_H */
