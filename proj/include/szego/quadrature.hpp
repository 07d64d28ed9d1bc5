#pragma once

#include <complex>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

namespace szego {

using Complex = std::complex<double>;

struct QuadratureConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_depth = 40;
    double truncation_log_cut = 40.0;
    int max_intervals = 4000;

    void validate() const;
    // Same config with both tolerances scaled by `factor`.
    QuadratureConfig tightened(double factor) const;
};

template <class T>
struct IntegralResult {
    T value{};
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = true;
};

using RealIntegral = IntegralResult<double>;
using ComplexIntegral = IntegralResult<Complex>;

// Either endpoint may be infinite; infinite ranges are mapped onto bounded ones.
struct Interval {
    double lo;
    double hi;
};

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<Complex(double)>;

// Globally adaptive Gauss-Kronrod (10/21 point) integration. Breakpoints inside
// the interval seed the initial partition.
RealIntegral integrate_real(const RealFn& f, Interval iv, const QuadratureConfig& cfg,
                            std::span<const double> breakpoints = {});
ComplexIntegral integrate_complex(const ComplexFn& f, Interval iv, const QuadratureConfig& cfg,
                                  std::span<const double> breakpoints = {});

template <class F>
inline constexpr bool returns_complex_v = std::is_same_v<std::decay_t<std::invoke_result_t<F, double>>, Complex>;

template <class F>
auto integrate_1d(F&& f, Interval iv, const QuadratureConfig& cfg, std::span<const double> breakpoints = {}) {
    if constexpr (returns_complex_v<F>)
        return integrate_complex(ComplexFn(std::forward<F>(f)), iv, cfg, breakpoints);
    else
        return integrate_real(RealFn(std::forward<F>(f)), iv, cfg, breakpoints);
}

void throw_if_unconverged(bool converged, double error_estimate, long evaluations, const char* what);

// Like integrate_1d but throws IntegralFailure when the result did not converge.
template <class F>
auto integrate_1d_strict(F&& f, Interval iv, const QuadratureConfig& cfg,
                         std::span<const double> breakpoints = {}) {
    auto r = integrate_1d(std::forward<F>(f), iv, cfg, breakpoints);
    throw_if_unconverged(r.converged, r.error_estimate, r.evaluations, "integrate_1d");
    return r;
}

// Integral of g(rho, theta) * rho over the annulus r0 <= rho <= r1 in polar
// coordinates (theta over [0, 2pi) split into `angular_panels` initial panels).
struct PolarOptions {
    int angular_panels = 8;
    std::vector<double> radial_breaks;
    std::vector<double> angular_breaks;
};
RealIntegral polar_real(const std::function<double(double, double)>& g, double r0, double r1,
                        const QuadratureConfig& cfg, const PolarOptions& opt = {});
ComplexIntegral polar_complex(const std::function<Complex(double, double)>& g, double r0, double r1,
                              const QuadratureConfig& cfg, const PolarOptions& opt = {});

template <class G>
auto integrate_polar(G&& g, double r0, double r1, const QuadratureConfig& cfg, const PolarOptions& opt = {}) {
    using R = std::decay_t<std::invoke_result_t<G, double, double>>;
    if constexpr (std::is_same_v<R, Complex>)
        return polar_complex(std::forward<G>(g), r0, r1, cfg, opt);
    else
        return polar_real(std::forward<G>(g), r0, r1, cfg, opt);
}

struct Minimum {
    double argmin;
    double value;
    long evaluations;
};

// Minimizes a convex function. The starting bracket is expanded by doubling
// until the finite-difference slope changes sign.
Minimum minimize_convex(const RealFn& phi, Interval bracket, double x_tol = 1e-10);

struct LevelSet {
    double minus;   // theta_- >= 0
    double plus;    // theta_+ >= 0
    double width;   // theta_- + theta_+
    long evaluations;
};

// Distances from theta0 to where phi exceeds phi(theta0) by `level` on each side.
LevelSet level_set_width(const RealFn& phi, double theta0, double level = 1.0);

struct ConvexLaplace {
    double theta0;
    double phi_min;
    double width;            // |L|
    double surrogate;        // |L| exp(-phi_min)
    double log_surrogate;
    double refined;          // direct quadrature of exp(-phi) over the truncated window
    double log_refined;
    RealIntegral shifted;    // integral of exp(-(phi - phi_min)) over the window
    double window_lo;
    double window_hi;
};

// Laplace-type approximation of the integral of exp(-phi) for convex phi,
// together with a refined value by direct quadrature truncated where
// phi - phi_min exceeds cfg.truncation_log_cut.
ConvexLaplace convex_laplace(const RealFn& phi, const QuadratureConfig& cfg,
                             Interval bracket = {-1.0, 1.0});

// Refined branch only, when the minimizer and a window are already known.
// Returns log of the integral of exp(-phi) over [lo, hi].
struct LogIntegral {
    double log_value;
    RealIntegral shifted;
};
LogIntegral log_integral_exp(const RealFn& phi, double theta0, double lo, double hi,
                             const QuadratureConfig& cfg);

// Integral over [0, inf) using panels [0,1], [1,2], [2,4], ... The caller
// asserts |f(tau)| <= M exp(-damping tau / 2) for large tau.
RealIntegral halfline_real(const RealFn& f, double damping, const QuadratureConfig& cfg);
ComplexIntegral halfline_complex(const ComplexFn& f, double damping, const QuadratureConfig& cfg);

template <class F>
auto integrate_halfline_damped(F&& f, double damping, const QuadratureConfig& cfg) {
    if constexpr (returns_complex_v<F>)
        return halfline_complex(ComplexFn(std::forward<F>(f)), damping, cfg);
    else
        return halfline_real(RealFn(std::forward<F>(f)), damping, cfg);
}

}  // namespace szego
