/*
 * mln - a 1D solver and optimal-control toolkit for the mixed local-nonlocal
 * diffusion operator -Laplace + fractional Laplace with Dirichlet boundary
 * data and exterior (collar) data.
 *
 * C API: opaque handles, status codes, thread-local error messages.  All
 * array arguments use the fixed node ordering of the library: left collar,
 * left boundary, interior ascending, right boundary, right collar.
 */
#ifndef MLN_H
#define MLN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mln_status {
    MLN_OK = 0,
    MLN_ERR_INVALID_ARGUMENT = 1,
    MLN_ERR_TAG_MISMATCH = 2,
    MLN_ERR_CONFIG = 3,
    MLN_ERR_SOLVER = 4,
    MLN_ERR_IO = 5,
    MLN_ERR_INTERNAL = 6
} mln_status;

typedef enum mln_node_set {
    MLN_NODES_INTERIOR = 0,
    MLN_NODES_EXTENDED = 1,
    MLN_NODES_BOUNDARY = 2,
    MLN_NODES_COLLAR = 3
} mln_node_set;

typedef struct mln_geometry mln_geometry;
typedef struct mln_operator mln_operator;
typedef struct mln_trajectory mln_trajectory;
typedef struct mln_control_result mln_control_result;

const char* mln_version(void);

/* Message describing the most recent failure on this thread. */
const char* mln_last_error(void);

/* ------------------------------------------------------------- geometry */

/* n_interior counts interval cells (>= 4); collar_width >= h. */
mln_status mln_geometry_create(double x_left, double x_right, int n_interior,
                               double collar_width, mln_geometry** out);
void mln_geometry_destroy(mln_geometry* g);

/* Returns a negative value on a null handle. */
int mln_geometry_node_count(const mln_geometry* g, mln_node_set set);
double mln_geometry_h(const mln_geometry* g);
mln_status mln_geometry_coords(const mln_geometry* g, mln_node_set set,
                               double* xs, int capacity);

/* ------------------------------------------------------------- operator */

/* Assembles the discrete mixed operator for fractional order s in (0,1). */
mln_status mln_operator_assemble(const mln_geometry* g, double s,
                                 mln_operator** out);
void mln_operator_destroy(mln_operator* op);

/* Normalization constant C_{1,s} of the fractional kernel. */
mln_status mln_kernel_constant(double s, double* out);

typedef struct mln_operator_report {
    double symmetry_defect;    /* max |A - A^T|, exactly 0 by construction */
    int m_matrix_violations;   /* sign-pattern violations */
    double row_sum_defect;     /* worst relative row-sum vs tail defect */
    double lambda_min;         /* smallest eigenvalue of the mixed operator */
    double lambda_min_local;   /* smallest eigenvalue of the local part */
    double lambda_max;         /* largest eigenvalue of the mixed operator */
} mln_operator_report;

mln_status mln_operator_diagnostics(const mln_operator* op,
                                    mln_operator_report* out);

/* ------------------------------------------------------------- elliptic */

typedef enum mln_elliptic_mode {
    MLN_ELLIPTIC_WEAK = 0,      /* zero boundary and exterior data */
    MLN_ELLIPTIC_LIFTED = 1,    /* compatible boundary/exterior data */
    MLN_ELLIPTIC_VERY_WEAK = 2  /* independent L2 boundary/exterior data */
} mln_elliptic_mode;

/*
 * Solves  L w = f in Omega,  w = g1 on the boundary,  w = g2 on the collar.
 * f has interior length, g1 two entries, g2 collar length; NULL means zero.
 * w_extended receives the full extended-node solution.
 */
mln_status mln_elliptic_solve(const mln_operator* op, mln_elliptic_mode mode,
                              const double* f_interior, const double* g1,
                              const double* g2_collar, double* w_extended);

/* ------------------------------------------------------------ parabolic */

/*
 * Theta-scheme march of  psi_t + L psi = f  with boundary control u1 and
 * exterior control u2.  u1 is (n_steps+1) x 2 row-major, u2 is
 * (n_steps+1) x n_collar_nodes, f is (n_steps+1) x n_interior_nodes and
 * psi0 has interior length; NULL means zero.  theta lies in [1/2, 1].
 */
mln_status mln_forward_solve(const mln_operator* op, double t_final,
                             int n_steps, double theta, const double* u1,
                             const double* u2, const double* psi0,
                             const double* f, mln_trajectory** out);
void mln_trajectory_destroy(mln_trajectory* t);
int mln_trajectory_frames(const mln_trajectory* t);
mln_status mln_trajectory_frame(const mln_trajectory* t, int m,
                                double* extended_values, int capacity);

/* ------------------------------------------------------------- spectrum */

/* k smallest eigenvalues of the interior operator with their residuals. */
mln_status mln_spectrum(const mln_operator* op, int k, double* lambdas,
                        double* residuals);

/* -------------------------------------------------------------- control */

typedef struct mln_control_options {
    int variant;      /* 1: track the state over space-time (J1);
                         2: track the final state in H^{-1} (J2) */
    double beta;      /* Tikhonov weight, > 0 */
    double tol;       /* fixed-point residual tolerance, default 1e-8 */
    int max_iters;    /* iteration cap, default 2000 */
    double u1_min, u1_max, u2_min, u2_max; /* box bounds; +-HUGE_VAL = none */
} mln_control_options;

/*
 * Projected gradient descent with Armijo backtracking for the chosen cost.
 * target is (n_steps+1) x n_interior row-major for J1 and n_interior for J2;
 * NULL means zero.  Hitting the iteration cap is reported through
 * mln_control_result_converged, not as an error.
 */
mln_status mln_control_solve(const mln_operator* op, double t_final,
                             int n_steps, double theta,
                             const mln_control_options* opts,
                             const double* target, mln_control_result** out);
void mln_control_result_destroy(mln_control_result* r);
int mln_control_result_converged(const mln_control_result* r);
int mln_control_result_iterations(const mln_control_result* r);
double mln_control_result_cost(const mln_control_result* r);
double mln_control_result_vi_residual(const mln_control_result* r);
double mln_control_result_projection_residual(const mln_control_result* r);
/* u1: (n_steps+1) x 2 row-major; u2: (n_steps+1) x n_collar_nodes. */
mln_status mln_control_result_u1(const mln_control_result* r, double* out,
                                 int capacity);
mln_status mln_control_result_u2(const mln_control_result* r, double* out,
                                 int capacity);

/* ------------------------------------------------------------ experiment */

/*
 * Parses a JSON config and runs the named experiment, writing CSV artifacts
 * and manifest.json into the output directory.  subcommand may be NULL when
 * the config names the experiment itself.  seed_override may be NULL.
 * trajectory_format may be NULL, "long" or "frames".  On success *summary
 * receives a malloc'd report (free with mln_string_free) and *ok is 1 when
 * every hard check passed.
 */
mln_status mln_run_experiment(const char* config_path, const char* subcommand,
                              const char* out_dir,
                              const uint64_t* seed_override, int workers,
                              const char* trajectory_format, char** summary,
                              int* ok);
void mln_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* MLN_H */
