#pragma once

#include <Eigen/Dense>

#include "geometry.hpp"

namespace mln {

// Normalization constant C_{1,s} = s 4^s Gamma(s + 1/2) / (sqrt(pi) Gamma(1-s)).
double kernel_constant(double s);

// Exact interval integrals of the kernel r^{-1-2s} and of r^{-2s}, stable for
// all s in (0,1) including s = 1/2.
double kernel_mass(double a, double b, double s);        // int_a^b r^{-1-2s} dr
double kernel_mass_inf(double a, double s);              // int_a^inf
double kernel_first_moment(double a, double b, double s);  // int_a^b r^{-2s} dr

// Quadrature tables for the 1D fractional operator on a uniform grid.
//
// Grid values are identified with their piecewise-linear hat interpolant,
// extended by zero beyond the support of the outermost hats.  w[k] is the
// kernel mass of a full hat centered k cells away; the first cell uses the
// quadratic model (r/h)^2 of the symmetric second difference so the singular
// integral stays finite for every s in (0,1).  tail(K) is the kernel mass of
// the region where the interpolant vanishes, seen from a node K cells away
// from the last node on that side.
struct FractionalWeights {
    double s = 0.5;
    double C = 0;  // C_{1,s}
    double h = 0;
    Eigen::VectorXd w;  // w[k] for k = 1..n-1 (w[0] unused)

    double tail(int K) const;

    static FractionalWeights build(const Geometry& g, double s);
};

}  // namespace mln
