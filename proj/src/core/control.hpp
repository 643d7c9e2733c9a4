#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "parabolic.hpp"

namespace mln {

// Boundary control u1 on Gamma and exterior control u2 on Sigma, stored at
// the M+1 time nodes.
struct ControlPair {
    TimeGrid time;
    std::vector<Eigen::Vector2d> u1;
    std::vector<Eigen::VectorXd> u2;

    static ControlPair zero(const Geometry& g, TimeGrid time);
};

// Norm and inner product of the control space: sum_m tau (u1_l^2 + u1_r^2)
// + sum_m tau h sum_collar u2^2 over all time nodes.
double zd_inner(const Geometry& g, const ControlPair& a, const ControlPair& b);
double zd_norm(const Geometry& g, const ControlPair& a);

// Box constraints per control family; infinities mean unconstrained.
struct AdmissibleSet {
    double a1 = -std::numeric_limits<double>::infinity();
    double b1 = std::numeric_limits<double>::infinity();
    double a2 = -std::numeric_limits<double>::infinity();
    double b2 = std::numeric_limits<double>::infinity();

    void validate() const {
        if (a1 > b1 || a2 > b2)
            throw ConfigError("admissible set bounds must satisfy a <= b");
    }
    bool unbounded() const {
        return !(std::isfinite(a1) || std::isfinite(b1) || std::isfinite(a2) ||
                 std::isfinite(b2));
    }
};

enum class CostVariant { J1, J2 };

// J1 tracks the state over Q in L^2; J2 tracks the final state in the
// discrete H^{-1} norm.  Both add (beta/2) ||u||_ZD^2.
struct CostSpec {
    CostVariant variant = CostVariant::J1;
    double beta = 1.0;
    std::vector<Eigen::VectorXd> zd1;  // M+1 interior slices (J1)
    Eigen::VectorXd zd2;               // interior (J2)

    void validate(const Geometry& g, const TimeGrid& time) const;
};

struct CostEval {
    double cost = 0;
    Trajectory state;
};

// Runs the forward solve from zero initial data with the given controls and
// evaluates the chosen functional.  Time integrals over Q use the
// left-endpoint tau rule.
CostEval evaluate_cost(const ControlPair& u, const CostSpec& spec,
                       const MixedStiffness& K, const SchemeConfig& sc);

struct Gradient {
    ControlPair g;
    Trajectory adjoint;  // reported with the sign conventions of the
                         // optimality systems (J1: source zd1 - psi;
                         // J2: terminal Riesz representative)
};

// Exact gradient of the discrete cost via the multiplier march; the boundary
// component is beta*u1 plus the discrete boundary flux of the adjoint, the
// exterior component beta*u2 plus its nonlocal normal derivative.
Gradient reduced_gradient(const ControlPair& u, const CostSpec& spec,
                          const MixedStiffness& K, const SchemeConfig& sc);

ControlPair project(const ControlPair& u, const AdmissibleSet& adm);

struct SolveOptions {
    double tol = 1e-8;          // fixed-point residual in the ZD norm
    int max_iters = 2000;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double gamma0 = 0;          // 0 means 1/beta
    int max_backtracks = 60;
};

struct OptimizationResult {
    ControlPair controls;
    Trajectory state;
    Trajectory adjoint;
    std::vector<double> cost_history;
    std::vector<double> grad_norm_history;
    std::vector<double> step_history;
    double vi_residual = 0;
    double projection_residual = 0;  // ||u - P(-beta^{-1} flux)|| / max(1,||u||)
    int iterations = 0;
    bool converged = false;
};

// Projected gradient descent with Armijo backtracking; stops when
// ||u - P(u - gamma0 g)||_ZD <= tol.  Hitting the iteration cap returns
// converged = false rather than throwing.
OptimizationResult solve_control(const CostSpec& spec, const AdmissibleSet& adm,
                                 const ControlPair& init,
                                 const SolveOptions& opts,
                                 const MixedStiffness& K,
                                 const SchemeConfig& sc);

// ||u - P(u - g)||_ZD: zero exactly when the discrete variational
// inequality holds for all admissible directions.
double vi_residual(const ControlPair& u, const CostSpec& spec,
                   const AdmissibleSet& adm, const MixedStiffness& K,
                   const SchemeConfig& sc);

}  // namespace mln
