#include "kernel.hpp"

#include <cmath>

namespace mln {

double kernel_constant(double s) {
    if (!(s > 0.0 && s < 1.0))
        throw ConfigError("fractional order s must lie in (0,1), got " +
                          std::to_string(s));
    return s * std::pow(2.0, 2.0 * s) * std::tgamma(s + 0.5) /
           (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

namespace {

// expm1(x)/x with the x -> 0 limit.
double expm1x(double x) {
    if (std::abs(x) < 1e-12) return 1.0 + 0.5 * x;
    return std::expm1(x) / x;
}

}  // namespace

double kernel_mass(double a, double b, double s) {
    // (a^{-2s} - b^{-2s})/(2s), written to avoid cancellation for b near a.
    const double x = 2.0 * s * std::log(a / b);
    return std::pow(a, -2.0 * s) * (-std::log(a / b)) * expm1x(x);
}

double kernel_mass_inf(double a, double s) {
    return std::pow(a, -2.0 * s) / (2.0 * s);
}

double kernel_first_moment(double a, double b, double s) {
    // (b^{1-2s} - a^{1-2s})/(1-2s) with the log branch at s = 1/2.
    const double eps = 1.0 - 2.0 * s;
    const double x = eps * std::log(b / a);
    return std::pow(a, eps) * std::log(b / a) * expm1x(x);
}

namespace {

// Hat weights over one kernel cell (kh, (k+1)h): the descending and
// ascending halves of the two hats straddling the cell.
double cell_lower(int k, double h, double s) {  // int ((k+1) - r/h) K dr
    const double a = k * h, b = (k + 1) * h;
    return (k + 1) * kernel_mass(a, b, s) - kernel_first_moment(a, b, s) / h;
}

double cell_upper(int k, double h, double s) {  // int (r/h - k) K dr
    const double a = k * h, b = (k + 1) * h;
    return kernel_first_moment(a, b, s) / h - k * kernel_mass(a, b, s);
}

}  // namespace

double FractionalWeights::tail(int K) const {
    if (K == 0)  // quadratic model of the descent cell at the node itself
        return std::pow(h, -2.0 * s) / (2.0 - 2.0 * s) + kernel_mass_inf(h, s);
    return cell_upper(K, h, s) + kernel_mass_inf((K + 1) * h, s);
}

FractionalWeights FractionalWeights::build(const Geometry& g, double s) {
    FractionalWeights fw;
    fw.s = s;
    fw.C = kernel_constant(s);
    fw.h = g.h();
    const int n = g.extended_nodes();
    fw.w.setZero(n);
    const double sigma1 = std::pow(fw.h, -2.0 * s) / (2.0 - 2.0 * s);
    for (int k = 1; k < n; ++k) {
        double wk = cell_lower(k, fw.h, s);
        wk += (k == 1) ? sigma1 : cell_upper(k - 1, fw.h, s);
        fw.w[k] = std::max(wk, 0.0);
    }
    return fw;
}

}  // namespace mln
