#pragma once

#include "szego/domain.hpp"
#include "szego/geometry.hpp"

#include <cstdint>
#include <vector>

namespace szego {

inline constexpr QuadratureConfig kernel_quadrature{1e-300, 1e-7, 40, 40.0, 4000};

// Regularized Szego kernel S^eps(a, b) of the tube {Im z2 > b(Re z)}.
// lift_a / lift_b move z2 / w2 vertically by that amount above the boundary.
struct KernelQuery {
    TubeProfile profile;
    BoundaryPoint a;
    BoundaryPoint b;
    double epsilon = 1.0;
    int deriv_order_k = 0;
    double lift_a = 0.0;
    double lift_b = 0.0;
    QuadratureConfig quad = kernel_quadrature;
};

struct KernelStats {
    long inner_integrals = 0;   // evaluations of I(eta, tau)
    long profile_evaluations = 0;
    long tau_nodes = 0;
};

struct KernelValue {
    Complex value{};
    double error_estimate = 0.0;
    KernelStats stats;
};

// I(eta, tau) = int exp(2 [eta theta - tau b(theta)]) dtheta and its logarithm.
double inner_weight_integral(const TubeProfile& tp, double eta, double tau, const QuadratureConfig& q = {});
double log_inner_weight_integral(const TubeProfile& tp, double eta, double tau, const QuadratureConfig& q = {});

// K(p, q) = int_0^inf int_R tau^p eta^q exp(i tau (z2 + i eps - conj(w2)) + eta (z + conj(w))) / I(eta, tau).
KernelValue tube_kernel_moment(const KernelQuery& query, int p, int q);

// K(0,0) / (4 pi^2).
KernelValue tube_szego_kernel(const KernelQuery& query);

// conj(Z)^k Z S^eps in the first variable. For k >= 1 this is
// -b^{(k+1)}(x_a) K(1,0) / (2^{k+2} pi^2); for k = 0, Z S = (K(0,1) - b'(x_a) K(1,0)) / (4 pi^2).
KernelValue tube_szego_derivative(const KernelQuery& query);

// 2i d/d conj(w2) S^eps = K(1,0) / (2 pi^2).
KernelValue bergman_kernel(const KernelQuery& query);

// Convex-Laplace data of phi(theta) = 2 [tau b(theta) - eta theta].
struct LaplaceScales {
    double theta0;
    double phi_min;
    double level_width;  // |L|: width of {phi <= phi_min + 1}
};
LaplaceScales laplace_scales(const TubeProfile& tp, double eta, double tau);

struct SharpnessRow {
    int n;
    double value;     // b^{(k+1)}(n) K(1,0) at z_n, z_{-n}
    double gap;       // b(n) + b(-n) + eps
    double distance;  // d(z_n, z_{-n})
    double ball;      // |B(z_n, d)|
    double product;   // value * ball * distance^2
};

struct SharpnessReport {
    int k = 1;
    double epsilon = 0.0;
    std::vector<SharpnessRow> rows;
    double slope_gap = 0.0;   // log-log slope of value against gap
    double slope_n = 0.0;     // log-log slope of value against n
    double min_product = 0.0;
};

SharpnessReport sharpness_scan(const TubeProfile& tp, int k, int n_lo, int n_hi, double epsilon,
                               const QuadratureConfig& q = kernel_quadrature);

struct EnvelopePair {
    BoundaryPoint a;
    BoundaryPoint b;
};

// count pairs with x, y in [-1.5, 1.5] and t in [-2.5, 2.5] (so |x_a - x_b| <= 3,
// |t_a - t_b| <= 5), from a seeded generator.
std::vector<EnvelopePair> sample_envelope_pairs(std::size_t count, std::uint64_t seed);

struct EnvelopeReport {
    std::vector<double> ratios;  // |S_eps(a,b)| |B(a, d_eps(a,b))| per pair
    double max_ratio = 0.0;
    std::size_t argmax = 0;
    double constant = 0.0;
    bool pass = false;
};

// d_eps(a, b) = |z_a - z_b| + mu(z_b, |t_a - t_b - T(z_a, z_b)| + eps).
EnvelopeReport growth_envelope(const TubeProfile& tp, const std::vector<EnvelopePair>& pairs, double epsilon,
                               double constant = 10.0, const QuadratureConfig& q = kernel_quadrature);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace szego
