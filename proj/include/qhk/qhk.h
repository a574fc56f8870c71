/* C interface to the qhk library. Strings returned by the library are owned
   by the handle they came from and stay valid until that handle is freed. */
#ifndef QHK_H
#define QHK_H

#include <stddef.h>
#include <stdint.h>

#if defined(QHK_BUILDING_LIBRARY)
#define QHK_API __attribute__((visibility("default")))
#else
#define QHK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  QHK_OK = 0,
  QHK_ERR_INTERNAL = 1,
  QHK_ERR_INVALID = 2,
  QHK_ERR_NONCONVERGENCE = 3,
  QHK_ERR_PROPERTY = 4,
  QHK_ERR_IO = 5
} qhk_status;

typedef enum { QHK_FORMAT_HUMAN = 0, QHK_FORMAT_JSON = 1 } qhk_format;

typedef struct qhk_problem qhk_problem;
typedef struct qhk_result qhk_result;

QHK_API const char* qhk_version(void);

/* Message for the most recent failure on this thread, "" if none. */
QHK_API const char* qhk_last_error(void);
/* Symbolic error name (e.g. "IllegalSection") for the most recent failure. */
QHK_API const char* qhk_last_error_code(void);

QHK_API qhk_status qhk_problem_parse(const char* text, size_t len, qhk_problem** out);
QHK_API qhk_status qhk_problem_load(const char* path, qhk_problem** out);
QHK_API const char* qhk_problem_canonical(const qhk_problem* p);
QHK_API void qhk_problem_free(qhk_problem* p);

QHK_API qhk_status qhk_validate(const qhk_problem* p, qhk_result** out);
QHK_API qhk_status qhk_stability(const qhk_problem* p, qhk_result** out);
/* box may be NULL; otherwise "[a,b]x[c,d]". */
QHK_API qhk_status qhk_chambers(const qhk_problem* p, const char* box, qhk_result** out);

/* Negative / zero values mean "use the problem file or built-in default". */
typedef struct {
  double tol;
  double eps_ratio;
  double eps_floor;
  double blowup_threshold;
  int max_newton;
  int n_theta;
  int n_phi;
  int dump_fields;
} qhk_solve_options;

QHK_API void qhk_solve_options_init(qhk_solve_options* o);
QHK_API qhk_status qhk_solve(const qhk_problem* p, const qhk_solve_options* o, qhk_result** out);

typedef struct {
  uint64_t seed;
  long count;
  int max_vertices;
  int max_rank;
} qhk_props_options;

QHK_API void qhk_props_options_init(qhk_props_options* o);
QHK_API qhk_status qhk_props(const qhk_props_options* o, qhk_result** out);

/* Rebuild a result from a stored machine report. */
QHK_API qhk_status qhk_report_load(const char* text, size_t len, qhk_result** out);

/* 0, 2, 3 or 4, matching the command-line exit codes. */
QHK_API int qhk_result_exit_code(const qhk_result* r);
QHK_API const char* qhk_result_command(const qhk_result* r);
QHK_API const char* qhk_result_render(qhk_result* r, qhk_format fmt);
QHK_API size_t qhk_result_artifact_count(const qhk_result* r);
QHK_API const char* qhk_result_artifact_name(const qhk_result* r, size_t i);
QHK_API const char* qhk_result_artifact_content(const qhk_result* r, size_t i);
QHK_API void qhk_result_free(qhk_result* r);

#ifdef __cplusplus
}
#endif

#endif
