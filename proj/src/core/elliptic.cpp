#include "elliptic.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "rng.hpp"

namespace mln {

namespace {

Eigen::VectorXd interior_or_zero(const Geometry& g, const Eigen::VectorXd& f) {
    if (f.size() == 0) return Eigen::VectorXd::Zero(g.interior_nodes());
    if (f.size() != g.interior_nodes())
        throw TagMismatchError("elliptic source must be an interior function");
    return f;
}

Eigen::VectorXd collar_or_zero(const Geometry& g, const Eigen::VectorXd& g2) {
    if (g2.size() == 0) return Eigen::VectorXd::Zero(g.collar_nodes());
    if (g2.size() != g.collar_nodes())
        throw TagMismatchError("exterior datum must be a collar function");
    return g2;
}

GridFunction solve_with_data(const MixedStiffness& K, const Eigen::VectorXd& f,
                             const Eigen::Vector2d& g1,
                             const Eigen::VectorXd& g2) {
    const Geometry& g = *K.geom;
    Eigen::VectorXd rhs = f - K.A_Ib * g1 - K.A_Ic * g2;
    Eigen::LLT<Eigen::MatrixXd> llt(K.A_II);
    if (llt.info() != Eigen::Success)
        throw SolverError("stiffness factorization failed");
    Eigen::VectorXd w = llt.solve(rhs);

    GridFunction out = make_grid_function(g, Tag::Extended);
    for (int i = 0; i < g.interior_nodes(); ++i)
        out.values[g.ext_interior(i)] = w[i];
    out.values[g.ext_left_boundary()] = g1[0];
    out.values[g.ext_right_boundary()] = g1[1];
    for (int c = 0; c < g.collar_nodes(); ++c)
        out.values[g.ext_collar(c)] = g2[c];
    return out;
}

}  // namespace

bool EllipticData::compatible(const Geometry& g) const {
    Eigen::VectorXd gc = collar_or_zero(g, g2);
    // Collar-side limits: innermost collar node on each side.
    const double left = gc[g.n_collar() - 1];
    const double right = gc[g.n_collar()];
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b));
    };
    return close(left, g1[0]) && close(right, g1[1]);
}

GridFunction solve_weak(const MixedStiffness& K, const Eigen::VectorXd& f) {
    const Geometry& g = *K.geom;
    return solve_with_data(K, interior_or_zero(g, f), Eigen::Vector2d::Zero(),
                           Eigen::VectorXd::Zero(g.collar_nodes()));
}

GridFunction solve_lifted(const MixedStiffness& K, const EllipticData& data) {
    const Geometry& g = *K.geom;
    if (!data.compatible(g))
        throw ConfigError(
            "boundary and exterior data are incompatible; use the very-weak "
            "solver");
    return solve_with_data(K, interior_or_zero(g, data.f), data.g1,
                           collar_or_zero(g, data.g2));
}

GridFunction solve_very_weak(const MixedStiffness& K,
                             const EllipticData& data) {
    const Geometry& g = *K.geom;
    return solve_with_data(K, interior_or_zero(g, data.f), data.g1,
                           collar_or_zero(g, data.g2));
}

double transposition_residual(const MixedStiffness& K, const GridFunction& w,
                              const EllipticData& data, int test_count,
                              std::uint64_t seed) {
    const Geometry& g = *K.geom;
    if (w.tag != Tag::Extended)
        throw TagMismatchError("transposition residual expects an extended w");
    const Eigen::VectorXd f = interior_or_zero(g, data.f);
    const Eigen::VectorXd g2 = collar_or_zero(g, data.g2);
    const int nI = g.interior_nodes();
    const double h = g.h();
    const double span = g.x_right() - g.x_left();
    Eigen::VectorXd xs = g.coords(Tag::Interior);
    GridFunction w_I = restrict_to(g, w, Tag::Interior);

    auto engine = make_engine(seed, 0x7261);
    std::uniform_real_distribution<double> coef(0.25, 1.0);
    constexpr int modes = 4;

    double worst = 0.0;
    for (int trial = 0; trial < test_count; ++trial) {
        // One random-amplitude sine mode per trial: smooth, interior
        // supported, and refinement studies see each mode's defect directly.
        GridFunction phi_I = make_grid_function(g, Tag::Interior);
        const int k = 1 + trial % modes;
        const double ck = coef(engine);
        for (int i = 0; i < nI; ++i)
            phi_I.values[i] =
                ck * std::sin(k * M_PI * (xs[i] - g.x_left()) / span);
        GridFunction phi = extend_by_zero(g, phi_I);
        Eigen::VectorXd Lphi = K.A_II * phi_I.values;
        double lhs = h * w_I.values.dot(Lphi);
        double rhs = h * f.dot(phi_I.values);
        GridFunction dnu = normal_derivative(g, phi);
        rhs -= data.g1[0] * dnu.values[0] + data.g1[1] * dnu.values[1];
        GridFunction ns = nonlocal_normal_derivative(g, K.s, phi);
        rhs -= h * g2.dot(ns.values);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace mln
