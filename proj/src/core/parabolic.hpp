#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "operators.hpp"

namespace mln {

// theta = 1 is implicit Euler (default; preserves positivity and the L^inf
// contraction), theta = 1/2 is Crank-Nicolson for accuracy studies.
struct SchemeConfig {
    double theta = 1.0;

    void validate() const {
        if (!(theta >= 0.5 && theta <= 1.0))
            throw ConfigError("scheme.theta must lie in [1/2, 1]");
    }
};

// Time-dependent data of the forward problem.  All arrays hold M+1 slices
// (one per time node); empty vectors mean zero.
struct ParabolicData {
    TimeGrid time;
    std::vector<Eigen::Vector2d> u1;      // boundary control on Gamma
    std::vector<Eigen::VectorXd> u2;      // exterior control on Sigma (collar)
    Eigen::VectorXd psi0;                 // interior initial value
    std::vector<Eigen::VectorXd> f;       // interior forcing
};

// Marches of the theta scheme with one cached factorization of I + tau*theta*A.
// Boundary/collar data enter at the theta-weighted time level.
class ParabolicSolver {
public:
    ParabolicSolver(const MixedStiffness& K, TimeGrid time, SchemeConfig sc);

    const TimeGrid& time() const { return time_; }

    Trajectory forward(const ParabolicData& data) const;

    // Backward march of -p_t + L p = eta with zero boundary/collar/terminal
    // data; eta indexed by time node, consumed at the reversed theta level.
    Trajectory dual(const std::vector<Eigen::VectorXd>& eta) const;

    // Backward march with zero sources from a given interior terminal frame.
    Trajectory backward_homogeneous(const Eigen::VectorXd& terminal) const;

    // Lagrange multipliers of the discrete march: q^M = (I+tau*theta*A)^{-1}
    // terminal, then (I+tau*theta*A) q^k = (I-tau(1-theta)A) q^{k+1} +
    // tau*eta^k down to k=0.  Pointwise sources make the reduced gradient of
    // the discrete cost exact for every theta.
    std::vector<Eigen::VectorXd> multipliers(
        const std::vector<Eigen::VectorXd>& eta,
        const Eigen::VectorXd* terminal) const;

    const MixedStiffness& stiffness() const { return *K_; }
    double theta() const { return sc_.theta; }

private:
    const MixedStiffness* K_;
    TimeGrid time_;
    SchemeConfig sc_;
    Eigen::LLT<Eigen::MatrixXd> lhs_;     // I + tau*theta*A_II
    Eigen::MatrixXd rhs_;                 // I - tau*(1-theta)*A_II
};

Trajectory solve_forward(const MixedStiffness& K, const ParabolicData& data,
                         const SchemeConfig& sc);

Trajectory solve_dual(const MixedStiffness& K, TimeGrid time,
                      const std::vector<Eigen::VectorXd>& eta,
                      const SchemeConfig& sc);

// Adjoint of the tracking cost: solve_dual with eta = zd1 - psi.
Trajectory solve_adjoint_j1(const MixedStiffness& K, const Trajectory& state,
                            const std::vector<Eigen::VectorXd>& zd1,
                            const SchemeConfig& sc);

// Adjoint of the final-time cost: terminal value (-Delta_D)^{-1}[psi_T - zd2],
// then a homogeneous backward march.
Trajectory solve_adjoint_j2(const MixedStiffness& K,
                            const Eigen::VectorXd& state_T,
                            const Eigen::VectorXd& zd2, TimeGrid time,
                            const SchemeConfig& sc);

// Defect of the discrete very-weak identity pairing the forward state with
// the dual of a given source: |int_Q psi eta + int_G u1 dnu(phi) +
// int_S u2 Ns(phi)|.  Requires psi0 = 0.
double duality_residual(const MixedStiffness& K, const ParabolicData& data,
                        const std::vector<Eigen::VectorXd>& eta,
                        const SchemeConfig& sc);

}  // namespace mln
