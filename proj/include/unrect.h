/*
 * unrect - a laboratory for staged piecewise-affine constructions on the
 * plane: strip schedules, stage functions, non-differentiability detectors,
 * curve preimage measures and filtration martingales.
 *
 * C interface around the C++ core. All objects are opaque handles owned by
 * the library; every function returns a status code and reports details
 * through unrect_last_error(). Strings returned through char** outputs are
 * heap-allocated and must be released with unrect_string_free().
 */
#ifndef UNRECT_H
#define UNRECT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum unrect_status {
  UNRECT_OK = 0,
  UNRECT_ERR_ARGUMENT = 1,     /* bad parameter or precondition violated */
  UNRECT_ERR_PARSE = 2,        /* malformed input file or JSON */
  UNRECT_ERR_IO = 3,           /* file could not be read or written */
  UNRECT_ERR_VALIDATION = 4,   /* schedule failed validation */
  UNRECT_ERR_ON_LINE = 5,      /* gradient requested on a kink */
  UNRECT_ERR_OVERFLOW = 6,     /* line cap or crossing cap exceeded */
  UNRECT_ERR_INFEASIBLE = 7,   /* requested depth cannot be generated */
  UNRECT_ERR_TANGENCY = 8,     /* persistent curve/boundary tangency */
  UNRECT_ERR_INTERNAL = 9
} unrect_status;

typedef struct unrect_schedule unrect_schedule;
typedef struct unrect_construction unrect_construction;
typedef struct unrect_curve unrect_curve;

const char* unrect_version(void);

/* thread-local message for the most recent failure in this thread */
const char* unrect_last_error(void);

void unrect_string_free(char* s);

/* ------------------------------------------------------------------ */
/* schedules                                                           */

unrect_status unrect_schedule_generate(double eta, int depth, uint64_t seed,
                                       unrect_schedule** out);
unrect_status unrect_schedule_load(const char* path, unrect_schedule** out);
unrect_status unrect_schedule_from_json(const char* json,
                                        unrect_schedule** out);
/* Validates in place and stores the certificate on the handle. Returns
 * UNRECT_OK when every condition holds, UNRECT_ERR_VALIDATION otherwise;
 * report_json (optional) receives the certificate either way. */
unrect_status unrect_schedule_validate(unrect_schedule* s, char** report_json);
unrect_status unrect_schedule_to_json(const unrect_schedule* s,
                                      int include_certificate, char** out);
unrect_status unrect_schedule_save(const unrect_schedule* s, const char* path);
int unrect_schedule_depth(const unrect_schedule* s);
double unrect_schedule_eta(const unrect_schedule* s);
void unrect_schedule_free(unrect_schedule* s);

/* ------------------------------------------------------------------ */
/* construction                                                        */

unrect_status unrect_construction_build(const unrect_schedule* s, int depth,
                                        unrect_construction** out);
void unrect_construction_free(unrect_construction* c);

/* partial sum h_depth at (x, y); tail_bound (optional) receives the bound
 * on |h - h_depth| from the schedule's decay rule */
unrect_status unrect_h_eval(const unrect_construction* c, double x, double y,
                            int depth, double* value, double* tail_bound);
/* gradient of the containing affine piece; UNRECT_ERR_ON_LINE on kinks */
unrect_status unrect_h_gradient(const unrect_construction* c, double x,
                                double y, int depth, double* gx, double* gy);
/* strip memberships, sign/counter trajectories and depth-K classification
 * proxies as a JSON object */
unrect_status unrect_point_profile(const unrect_construction* c, double x,
                                   double y, char** json_out);
/* chord-slope spread at scale eps along direction (ex, ey) */
unrect_status unrect_zeta(const unrect_construction* c, double x, double y,
                          double eps, double ex, double ey, double* value,
                          char** witness_json);
/* certified lower bound over a direction grid of the given size */
unrect_status unrect_upsilon(const unrect_construction* c, double x, double y,
                             double eps, int direction_budget, double* value);
unrect_status unrect_witness_phi(const unrect_construction* c, int stage,
                                 double zx, double zy, double vx, double vy,
                                 char** witness_json);
unrect_status unrect_witness_h(const unrect_construction* c, double zx,
                               double zy, double vx, double vy, double eps,
                               char** witness_json);

/* ------------------------------------------------------------------ */
/* curves                                                              */

unrect_status unrect_curve_load(const char* path, unrect_curve** out);
unrect_status unrect_curve_from_json(const char* json, unrect_curve** out);
void unrect_curve_free(unrect_curve* c);

/* ------------------------------------------------------------------ */
/* batch reports (CSV / JSON strings)                                  */

unrect_status unrect_nondiff_map_csv(const unrect_construction* c, int grid,
                                     int dirs, double eps_floor, uint64_t seed,
                                     int jobs, char** csv_out);
unrect_status unrect_eval_grid_csv(const unrect_construction* c, int grid,
                                   int depth, int jobs, char** csv_out);
unrect_status unrect_curve_report_csv(const unrect_construction* c,
                                      const unrect_curve* curve, uint64_t seed,
                                      char** csv_out);
unrect_status unrect_martingale_report_csv(const unrect_construction* c,
                                           const unrect_curve* curve,
                                           const double* lambdas,
                                           int n_lambdas, char** csv_out);
unrect_status unrect_witness_report_json(const unrect_construction* c,
                                         int stage, int count, uint64_t seed,
                                         int jobs, char** json_out);
unrect_status unrect_construction_stats(const unrect_construction* c,
                                        char** json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UNRECT_H */
