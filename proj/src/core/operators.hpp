#pragma once

#include <Eigen/Dense>
#include <memory>

#include "geometry.hpp"
#include "kernel.hpp"

namespace mln {

struct FractionalOrder {
    double s;
    bool very_weak_valid;  // transposition theory is proved only for s <= 3/4

    explicit FractionalOrder(double s_) : s(s_), very_weak_valid(s_ <= 0.75) {
        if (!(s > 0.0 && s < 1.0))
            throw ConfigError("fractional order s must lie in (0,1), got " +
                              std::to_string(s));
    }
};

// Discrete mixed operator -Delta + (-Delta)^s collocated at interior nodes.
// A_II acts on interior values, A_Ib on the two boundary values and A_Ic on
// the collar values; local and fractional parts are kept separately for
// diagnostics.  All off-diagonal entries are <= 0 and each interior row sums
// to its tail correction (the kernel mass lost to the truncated far field).
struct MixedStiffness {
    std::shared_ptr<const Geometry> geom;
    double s = 0.5;
    double C = 0;  // C_{1,s}

    Eigen::MatrixXd A_II, A_Ib, A_Ic;
    Eigen::MatrixXd L_loc_II, L_loc_Ib;
    Eigen::MatrixXd L_frac_II, L_frac_Ib, L_frac_Ic;
    Eigen::VectorXd tail;  // per interior row

    FractionalWeights weights;
};

void assemble_local(const Geometry& g, Eigen::MatrixXd& L_II,
                    Eigen::MatrixXd& L_Ib);

void assemble_fractional(const Geometry& g, double s, Eigen::MatrixXd& F_II,
                         Eigen::MatrixXd& F_Ib, Eigen::MatrixXd& F_Ic,
                         Eigen::VectorXd& tail);

MixedStiffness assemble_mixed(std::shared_ptr<const Geometry> g, double s);

// F(u,v) = (C/2) sum_{i,j} w_|i-j| (u_i-u_j)(v_i-v_j) h + tail terms; the
// discrete form of the double-integral bilinear form on extended functions.
double bilinear_form(const Geometry& g, double s, const GridFunction& u,
                     const GridFunction& v);

struct H1NormReport {
    double dirichlet_energy = 0;  // int_Omega |grad u|^2
    double fractional_energy = 0;  // F(u,u)
    double total = 0;
};

H1NormReport h1_norm_report(const Geometry& g, double s, const GridFunction& u);

// N_s u at collar nodes: C int_Omega (u(x)-u(y)) |x-y|^{-1-2s} dy with the
// same hat-cell integrals as the assembly, restricted to Omega.
GridFunction nonlocal_normal_derivative(const Geometry& g, double s,
                                        const GridFunction& u);

// Outward normal derivative at the two boundary nodes by second-order
// one-sided differences from the interior.
GridFunction normal_derivative(const Geometry& g, const GridFunction& u);

// Discrete boundary flux h * A_Ib^T p of an interior function: the
// summation-by-parts companion of the assembled operator.  Consistent with
// the normal derivative of p (first order) and exactly adjoint to the
// boundary coupling of the forward solves.
Eigen::Vector2d boundary_flux(const MixedStiffness& K,
                              const Eigen::VectorXd& p_interior);

// <(-Delta_D)^{-1} u, v> with the rectangle-rule weight h: one tridiagonal
// Dirichlet solve of the purely local Laplacian.
double h_minus1_inner(const Geometry& g, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v);

// Riesz representative rho solving L_loc rho = u (interior values).
Eigen::VectorXd dirichlet_laplacian_solve(const Geometry& g,
                                          const Eigen::VectorXd& u);

// |LHS - RHS| of the discrete fractional integration-by-parts identity
// relating the pair form to psi (-Delta)^s phi on Omega plus psi N_s phi on
// the collar.  Converges to zero under refinement for smooth inputs.
double ibp_residual(const Geometry& g, double s, const GridFunction& phi,
                    const GridFunction& psi);

}  // namespace mln
