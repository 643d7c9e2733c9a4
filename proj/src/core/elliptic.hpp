#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "operators.hpp"

namespace mln {

// Data of the stationary problem Lw = f in Omega, w = g1 on the boundary,
// w = g2 on the collar (zero beyond).  `compatible` is computed: g1 must
// agree with the collar-side limit of g2 at both ends.
struct EllipticData {
    Eigen::VectorXd f;   // interior; empty means zero
    Eigen::Vector2d g1 = Eigen::Vector2d::Zero();
    Eigen::VectorXd g2;  // collar; empty means zero

    bool compatible(const Geometry& g) const;
};

// Homogeneous Dirichlet/exterior problem: A_II w = f, zero-extended.
GridFunction solve_weak(const MixedStiffness& K, const Eigen::VectorXd& f);

// Compatible nonzero data, solved through the lifting of the boundary and
// collar values.  Throws if the data are incompatible.
GridFunction solve_lifted(const MixedStiffness& K, const EllipticData& data);

// Independent L^2 boundary/exterior data; same linear system with g1 and g2
// imposed on their own node sets.  Well-defined for every s; the
// transposition interpretation is backed by theory only for s <= 3/4
// (see FractionalOrder::very_weak_valid).
GridFunction solve_very_weak(const MixedStiffness& K, const EllipticData& data);

// Max over `test_count` smooth random interior-supported test functions of
// the defect in the transposition identity
//   h sum_I w (L phi) = h sum_I f phi - sum_G g1 dnu(phi) - h sum_C g2 Ns(phi).
double transposition_residual(const MixedStiffness& K, const GridFunction& w,
                              const EllipticData& data, int test_count,
                              std::uint64_t seed);

}  // namespace mln
