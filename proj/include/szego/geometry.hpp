#pragma once

#include "szego/domain.hpp"

#include <optional>
#include <vector>

namespace szego {

// (z, t) stands for the boundary point (z, t + i P(z)).
struct BoundaryPoint {
    Complex z{};
    double t = 0.0;
};

struct MetricContext {
    MetricContext(Weight weight, Potential potential, int m, std::optional<double> nu = std::nullopt);

    Weight weight;
    Potential potential;
    // Set for tube domains: disk integrals then reduce to chords of b''.
    std::optional<TubeProfile> profile;
    int m;
    double nu;  // exponent of the quasimetric rho~, default 1/m
    QuadratureConfig quad{1e-14, 1e-11, 40, 40.0, 4000};
    double mu_rel_tol = 1e-12;
    double delta0 = 1.0;
    int lambda2_directions = 256;
    int max_direction_grid = 1024;
    double dstar_eps = 1.0;
};

MetricContext make_heisenberg_context();
MetricContext make_tube_context(const TubeProfile& tp, int m = 2);

// Integral of h over the disk |eta - z| < delta.
double lambda_integral(const MetricContext& ctx, Complex z, double delta);

// Polynomial surrogates of Lambda (variants 2, 3, 4), built from derivatives of
// h at z up to order m - 2.
double lambda_poly(const MetricContext& ctx, Complex z, double delta, int variant);
// delta^j coefficients (j = 2..m, index j - 2) of the chosen polynomial surrogate.
std::vector<double> lambda_poly_coefficients(const MetricContext& ctx, Complex z, int variant);

// Inverse of delta -> lambda_integral(z, delta); mu(z, 0) = 0.
double mu_invert(const MetricContext& ctx, Complex z, double target);

// Inverse of the model Lambda*(delta) = sum a_j delta^j (delta <= 1, a_j the
// normalized Lambda_3 coefficients) and delta^2 (delta >= 1).
double lambda_star(const MetricContext& ctx, Complex z, double delta);
double mu_star(const MetricContext& ctx, Complex z, double target);

struct TwistChoice {
    enum class Kind { exact, taylor } kind = Kind::exact;
    int kappa = 2;  // Taylor order for Kind::taylor
    static TwistChoice exact_line() { return {}; }
    static TwistChoice taylor(int k) { return {Kind::taylor, k}; }
};

double twist_value(const MetricContext& ctx, Complex z, Complex w, const TwistChoice& twist);

// |z_a - z_b| + mu(z_b, |t_a - t_b - twist(z_a, z_b)| + gap_offset).
double cc_distance(const MetricContext& ctx, const BoundaryPoint& a, const BoundaryPoint& b,
                   const TwistChoice& twist = {}, double gap_offset = 0.0);

// delta^2 Lambda(z, delta).
double ball_volume(const MetricContext& ctx, const BoundaryPoint& a, double delta);

// Smooth surrogate d*(a, w0) built around w0.
double smooth_distance(const MetricContext& ctx, const BoundaryPoint& a, const BoundaryPoint& w0);

// mu(w, 1 / tau).
double sigma_tau(const MetricContext& ctx, const BoundaryPoint& w, double tau);

// (tau Lambda(w, |z - w|) + tau Lambda(z, |z - w|))^nu.
double rho_tilde(const MetricContext& ctx, const BoundaryPoint& a, const BoundaryPoint& b, double tau);

struct VandermondeTable {
    int j = 0;
    std::vector<Complex> directions;
    // a[n][k]: d^j f / dz^k dzbar^{j-k} = sum_n a[n][k] grad_{nu_n}^j f.
    std::vector<std::vector<Complex>> a;
    double min_gap = 0.0;    // min |nu_a^2 - nu_b^2|
    double bound = 0.0;      // (j!)^2 min_gap^{-j(j+1)/2}
    double max_abs = 0.0;    // max |a(n,k)|
    bool bound_holds = false;

    // Recovers the mixed partials from directional derivatives D_n.
    std::vector<Complex> apply(const std::vector<Complex>& directional) const;
};

VandermondeTable vandermonde_coeffs(int j, const std::vector<Complex>& directions);
// nu_n = exp(i pi n / (m + 1)), n = 0..count-1.
std::vector<Complex> default_directions(int m, int count);

struct MaxDirection {
    Complex nu{1.0, 0.0};
    // min over j of |grad_nu^j h| / sum_k |d^j h / dz^k dzbar^{j-k}| at nu (+inf if every
    // denominator vanishes).
    double constant = 0.0;
};

MaxDirection max_direction(const Weight& w, Complex z, int J, int grid = 1024);

}  // namespace szego
