#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "parabolic.hpp"

namespace mln {

// Low spectrum of the interior stiffness.  Eigenvalues solve A v = lambda v
// (collocated operator); eigenvectors are h-orthonormal with the first
// nonzero component positive, so reports are reproducible bit for bit.
// residuals[j] = ||A v - lambda v||_h / max(1, lambda).
struct SpectralReport {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // nI x k
    Eigen::VectorXd residuals;
    double lambda1_local = 0;      // smallest eigenvalue of the local part
};

// k smallest eigenpairs by shift-invert Lanczos with full
// reorthogonalization.  Relative residual tolerance 1e-10, iteration cap
// 10*n; non-convergence raises SolverError carrying the achieved residuals.
SpectralReport low_spectrum(const MixedStiffness& K, int k);

// Same contract on an arbitrary SPD matrix (used for the local-only study).
Eigen::VectorXd smallest_eigenvalues(const Eigen::MatrixXd& A, int k,
                                     double h);

// Largest eigenvalue by plain Lanczos (diagnostics only).
double largest_eigenvalue(const Eigen::MatrixXd& A);

// Semigroup property probes: positivity preservation, L^inf contraction and
// energy decay over random trials, plus the heat-spike decay record.
// Failures are reported, never thrown.
struct SemigroupAudit {
    int trials = 0;
    bool positivity_pass = true;
    double positivity_worst = 0;    // most negative value reached
    bool contraction_pass = true;
    double contraction_worst = 0;   // largest sup-norm growth per step
    bool energy_pass = true;
    double energy_worst = 0;        // largest energy growth per step
    std::vector<std::pair<double, double>> spike;  // (t, sup norm)
    bool spike_decreasing = true;
    double spike_sup_tsqrt = 0;     // max of sup * sqrt(t) over the record
};

SemigroupAudit semigroup_audit(const MixedStiffness& K, const SchemeConfig& sc,
                               int trials, std::uint64_t seed);

}  // namespace mln
