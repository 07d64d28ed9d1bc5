#pragma once

#include "szego/quadrature.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace szego {

// Nonnegative density h = Laplacian of a potential, with mixed Wirtinger partials
// d^{a+b} h / dz^a dzbar^b. Orders up to analytic_order use the supplied
// evaluator; orders up to max_order fall back to central finite differences.
class Weight {
public:
    using Density = std::function<double(Complex)>;
    using Partials = std::function<Complex(int, int, Complex)>;

    Weight(std::string name, Density eval, Partials partials = {}, int analytic_order = 0,
           int max_order = 4, double fd_step = 1e-4);

    double eval(Complex z) const { return eval_(z); }
    Complex partial(int a, int b, Complex z) const;
    // Highest derivative order that partial() will answer.
    int max_order() const { return max_order_; }
    int analytic_order() const { return analytic_order_; }
    double fd_step() const { return fd_step_; }
    const std::string& name() const { return name_; }
    // Finite-difference step used for derivatives of total order n.
    double fd_step_for(int n) const;
    // Finite-difference partial regardless of analytic availability.
    Complex fd_partial(int a, int b, Complex z) const;
    // z -> h(z + s)
    Weight shifted(Complex s) const;

private:
    std::string name_;
    Density eval_;
    Partials partials_;
    int analytic_order_;
    int max_order_;
    double fd_step_;
};

// Directional derivative of order j along the unit vector nu:
// sum_k C(j,k) nu^k conj(nu)^{j-k} d^j h / dz^k dzbar^{j-k}.
Complex directional_derivative(const Weight& w, int j, Complex nu, Complex z);

// Subharmonic potential P with dP/dz, holomorphic derivatives d^j P / dz^j and
// its Laplacian weight.
class Potential {
public:
    using Value = std::function<double(Complex)>;
    using Gradient = std::function<Complex(Complex)>;
    using HoloDeriv = std::function<Complex(int, Complex)>;

    // holo may be empty; holomorphic derivatives then come from circle
    // averages of eval (see cauchy_holo_deriv).
    Potential(std::string name, Value eval, Gradient grad_z, HoloDeriv holo, Weight weight);

    double eval(Complex z) const { return eval_(z); }
    Complex grad_z(Complex z) const { return grad_(z); }
    Complex holo_deriv(int j, Complex z) const;
    const Weight& weight() const { return weight_; }
    const std::string& name() const { return name_; }
    bool has_analytic_holo() const { return static_cast<bool>(holo_); }

private:
    std::string name_;
    Value eval_;
    Gradient grad_;
    HoloDeriv holo_;
    Weight weight_;
};

// d^j P / dz^j at z from Fourier coefficients of P on circles of radius
// r, r/2, r/4 (64-node trapezoid rule) with Richardson extrapolation in r^2.
Complex cauchy_holo_deriv(const Potential::Value& p, int j, Complex z, double radius = 0.5,
                          int nodes = 64);

// Central-difference Laplacian of P at z.
double fd_laplacian(const Potential::Value& p, Complex z, double step);

// Convex profile b of a tube {Im z2 > b(Re z1)}.
class TubeProfile {
public:
    // derivs(k, x) = b^{(k)}(x) for 0 <= k <= analytic_order.
    using Derivs = std::function<double(int, double)>;

    TubeProfile(std::string name, Derivs derivs, int analytic_order, double a, double A);

    double b(double x) const { return derivs_(0, x); }
    double deriv(int k, double x) const;
    std::pair<double, double> convexity_bounds() const { return {a_, A_}; }
    const std::string& name() const { return name_; }
    int analytic_order() const { return analytic_order_; }
    // Solves b'(theta) = y.
    double slope_inverse(double y) const;
    // h(z) = b''(Re z) with analytic partials.
    Weight weight() const;
    // P(z) = b(Re z).
    Potential potential() const;

private:
    std::string name_;
    Derivs derivs_;
    int analytic_order_;
    double a_;
    double A_;
};

std::pair<Weight, Potential> make_heisenberg();
TubeProfile make_parabolic_tube();
TubeProfile make_sharpness_tube();
// The Laplacian |z|^2 of Q(z) = |z|^4 / 16.
Weight make_quartic_laplacian();
// z -> chi(q(z)) with chi(t) = t for t <= 1, 3/2 for t >= 2, smooth and
// nondecreasing in between.
Weight make_smoothed_polynomial(const Weight& q_laplacian);
// h(r e^{i theta}) = 1 + chi(r) f(theta) with chi a smooth step from 0 (r <= 1) to
// 1 (r >= 2) and f a bump of height 1 supported in |theta| <= 1/100.
Weight make_h3_counterexample();
// Real polynomial weight sum c x^p y^q; terms are (p, q, c).
struct PolyTerm {
    int p;
    int q;
    double c;
};
Weight make_polynomial_weight(std::vector<PolyTerm> terms);

// Smooth transition used by the example constructions: 0 for u <= 0, 1 for
// u >= 1, derivative available.
double smooth_step(double u);
double smooth_step_derivative(double u);
// chi of the smoothed-polynomial example and its first two derivatives.
double smoothed_chi(double t, int order = 0);

struct UftGrid {
    std::vector<Complex> centers;
    int directions = 64;
    int ck_order = 2;
    int h3_max_exponent = 10;  // radii 2^0 .. 2^J
    int angular_panels = 64;

    // n x n centers on [-half_width, half_width]^2.
    static UftGrid box(double half_width, int n);
};

struct UftThresholds {
    double c1_min = 1e-6;
    double ck_max = 1e6;
    double c2_max = 50.0;
    // Maximal slope of the annulus-integral curve against log r over the upper
    // half of the dyadic radii.
    double h3_log_slope_max = 1e-3;
};

struct UftReport {
    int m = 0;
    double h1_infimum = 0.0;
    Complex h1_argmin{};
    std::vector<double> ck_norms;
    double h3_supremum = 0.0;
    std::vector<double> h3_radii;
    std::vector<double> h3_curve;  // sup over centers of |I(z, r)| per radius
    double h3_log_slope = 0.0;
    UftGrid grid;
    UftThresholds thresholds;
    struct {
        bool h1 = false;
        bool h2 = false;
        bool h3 = false;
    } verdicts;
};

UftReport verify_uft(const Weight& w, int m, const UftGrid& grid, const UftThresholds& thr = {},
                     const QuadratureConfig& q = {1e-10, 1e-8, 40, 40.0, 4000});

// |I(z, r)| curve: integral of h(z + eta) / eta^2 over 1 <= |eta| <= r for r = 2^j.
std::vector<Complex> h3_annulus_curve(const Weight& w, Complex z, int max_exponent,
                                      int angular_panels, const QuadratureConfig& q);

// Fit of sup_z int_{|eta| <= r} |h(z + eta) - A| dm <= B r^{2 - C} over sampled
// centers and radii; returns (B, C).
std::pair<double, double> fit_perturbation_exponents(const Weight& w, double A,
                                                     const std::vector<Complex>& centers,
                                                     const std::vector<double>& radii,
                                                     const QuadratureConfig& q);

struct PotentialOptions {
    QuadratureConfig quad{1e-11, 1e-11, 40, 40.0, 4000};
    // Tail tolerance for the outer truncation.
    double tail_tol = 1e-10;
    double grad_step = 1e-3;
};

// P(z) = int_{|eta|<=1} K1(z,eta) h(eta) dm + int_{|eta|>1} K2(z,eta) h(eta) dm,
// K1 = (1/2pi) Re(log(1 - z/eta) + z/eta), K2 = K1 + (1/2pi) Re(z^2 / (2 eta^2)).
Potential build_potential(const Weight& w, const PotentialOptions& opt = {});

}  // namespace szego
