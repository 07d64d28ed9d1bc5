#include "szego/domain.hpp"

#include "primitive_table.hpp"
#include "szego/errors.hpp"
#include "szego/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace szego {

namespace {

constexpr double kPi = std::numbers::pi;

double binom(int n, int k) { return boost::math::binomial_coefficient<double>(n, k); }

// Wirtinger partial d^a dbar^b from real partials D_x^p D_y^q.
template <class RealPartial>
Complex wirtinger(int a, int b, const RealPartial& real_partial) {
    const Complex mi(0.0, -1.0), pi_(0.0, 1.0);
    Complex sum = 0.0;
    for (int r = 0; r <= a; ++r)
        for (int s = 0; s <= b; ++s) {
            const Complex c = binom(a, r) * binom(b, s) * std::pow(mi, r) * std::pow(pi_, s);
            sum += c * real_partial(a + b - r - s, r + s);
        }
    return sum * std::ldexp(1.0, -(a + b));
}

// Central difference delta^p / s^p (second-order accurate) of a 1D slice.
template <class F>
double central_difference(const F& f, int p, double s) {
    double acc = 0.0;
    for (int i = 0; i <= p; ++i) {
        const double c = ((i % 2) ? -1.0 : 1.0) * binom(p, i);
        acc += c * f((0.5 * p - i) * s);
    }
    return acc / std::pow(s, p);
}

double psi(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

// Cutoff of the sharpness profile: 1 for s <= 1/4, 0 for s >= 0.45.
double sharp_cutoff(double s) { return 1.0 - smooth_step((s - 0.25) / 0.2); }
double sharp_cutoff_derivative(double s) { return -smooth_step_derivative((s - 0.25) / 0.2) / 0.2; }

double beta(double t) { return std::exp(t * sharp_cutoff(std::abs(t))); }
double beta_derivative(double t) {
    const double s = std::abs(t);
    return beta(t) * (sharp_cutoff(s) + s * sharp_cutoff_derivative(s));
}

const detail::PrimitiveTable& chi_table() {
    static const detail::PrimitiveTable table([](double u) { return 1.0 - smooth_step(u); }, 0.0, 1.0, 2048,
                                              0.0);
    return table;
}

}  // namespace

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = psi(u), b = psi(1.0 - u);
    return a / (a + b);
}

double smooth_step_derivative(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double a = psi(u), b = psi(1.0 - u);
    const double da = a / (u * u), db = b / ((1.0 - u) * (1.0 - u));
    return (da * b + a * db) / ((a + b) * (a + b));
}

double smoothed_chi(double t, int order) {
    if (order == 0) {
        if (t <= 1.0) return t;
        if (t >= 2.0) return 1.5;
        return 1.0 + chi_table().first(t - 1.0);
    }
    if (order == 1) {
        if (t <= 1.0) return 1.0;
        return 1.0 - smooth_step(t - 1.0);
    }
    if (order == 2) return -smooth_step_derivative(t - 1.0);
    throw CapabilityError("smoothed_chi: derivative order > 2 unavailable");
}

// ---------------------------------------------------------------- Weight

Weight::Weight(std::string name, Density eval, Partials partials, int analytic_order, int max_order,
               double fd_step)
    : name_(std::move(name)), eval_(std::move(eval)), partials_(std::move(partials)),
      analytic_order_(partials_ ? analytic_order : 0), max_order_(std::max(max_order, analytic_order_)),
      fd_step_(fd_step) {
    if (!eval_) throw InvalidArgument("Weight needs a density evaluator");
    if (!(fd_step_ > 0.0)) throw InvalidArgument("Weight finite-difference step must be > 0");
}

double Weight::fd_step_for(int n) const {
    return std::max(fd_step_, std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (n + 2)));
}

Complex Weight::fd_partial(int a, int b, Complex z) const {
    const int n = a + b;
    const double s = fd_step_for(n);
    auto real_partial = [&](int p, int q) {
        auto along_x = [&](double dx) {
            return central_difference([&](double dy) { return eval_(z + Complex(dx, dy)); }, q, s);
        };
        return central_difference(along_x, p, s);
    };
    return wirtinger(a, b, real_partial);
}

Complex Weight::partial(int a, int b, Complex z) const {
    if (a < 0 || b < 0) throw InvalidArgument("partial: negative order");
    if (a == 0 && b == 0) return eval_(z);
    const int n = a + b;
    if (n > max_order_)
        throw CapabilityError("weight '" + name_ + "': derivative order " + std::to_string(n) +
                              " exceeds max_order " + std::to_string(max_order_));
    if (n <= analytic_order_) return partials_(a, b, z);
    return fd_partial(a, b, z);
}

Weight Weight::shifted(Complex s) const {
    Density e = [f = eval_, s](Complex z) { return f(z + s); };
    Partials p;
    if (partials_) p = [f = partials_, s](int a, int b, Complex z) { return f(a, b, z + s); };
    return Weight(name_, std::move(e), std::move(p), analytic_order_, max_order_, fd_step_);
}

Complex directional_derivative(const Weight& w, int j, Complex nu, Complex z) {
    if (j == 0) return w.eval(z);
    Complex sum = 0.0;
    const Complex nub = std::conj(nu);
    for (int k = 0; k <= j; ++k) sum += binom(j, k) * std::pow(nu, k) * std::pow(nub, j - k) * w.partial(k, j - k, z);
    return sum;
}

// ---------------------------------------------------------------- Potential

Potential::Potential(std::string name, Value eval, Gradient grad_z, HoloDeriv holo, Weight weight)
    : name_(std::move(name)), eval_(std::move(eval)), grad_(std::move(grad_z)), holo_(std::move(holo)),
      weight_(std::move(weight)) {
    if (!eval_ || !grad_) throw InvalidArgument("Potential needs value and gradient evaluators");
}

Complex Potential::holo_deriv(int j, Complex z) const {
    if (j < 1) throw InvalidArgument("holo_deriv: order must be >= 1");
    if (j == 1) return grad_(z);
    if (holo_) return holo_(j, z);
    return cauchy_holo_deriv(eval_, j, z);
}

Complex cauchy_holo_deriv(const Potential::Value& p, int j, Complex z, double radius, int nodes) {
    if (j < 1) throw InvalidArgument("cauchy_holo_deriv: order must be >= 1");
    auto mode = [&](double r) {
        Complex acc = 0.0;
        for (int k = 0; k < nodes; ++k) {
            const double th = 2.0 * kPi * k / nodes;
            acc += p(z + std::polar(r, th)) * std::polar(1.0, -j * th);
        }
        return acc / (static_cast<double>(nodes) * std::pow(r, j));
    };
    const Complex g1 = mode(radius), g2 = mode(0.5 * radius), g3 = mode(0.25 * radius);
    const Complex r1 = (4.0 * g2 - g1) / 3.0, r2 = (4.0 * g3 - g2) / 3.0;
    return std::tgamma(j + 1.0) * (16.0 * r2 - r1) / 15.0;
}

double fd_laplacian(const Potential::Value& p, Complex z, double s) {
    return (p(z + s) + p(z - s) + p(z + Complex(0, s)) + p(z - Complex(0, s)) - 4.0 * p(z)) / (s * s);
}

// ---------------------------------------------------------------- TubeProfile

TubeProfile::TubeProfile(std::string name, Derivs derivs, int analytic_order, double a, double A)
    : name_(std::move(name)), derivs_(std::move(derivs)), analytic_order_(analytic_order), a_(a), A_(A) {
    if (!derivs_) throw InvalidArgument("TubeProfile needs a derivative evaluator");
    if (!(a > 0.0) || !(A >= a)) throw InvalidArgument("TubeProfile needs 0 < a <= A");
    if (analytic_order_ < 2) throw InvalidArgument("TubeProfile needs b, b', b'' analytically");
}

double TubeProfile::deriv(int k, double x) const {
    if (k < 0) throw InvalidArgument("TubeProfile::deriv: negative order");
    if (k <= analytic_order_) return derivs_(k, x);
    const int n = k - analytic_order_;
    const double s = std::max(1e-4, std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (n + 2)));
    return central_difference([&](double dx) { return derivs_(analytic_order_, x + dx); }, n, s);
}

double TubeProfile::slope_inverse(double y) const {
    if (y == 0.0) return 0.0;
    double lo = y > 0 ? y / A_ : y / a_;
    double hi = y > 0 ? y / a_ : y / A_;
    auto f = [&](double t) { return derivs_(1, t) - y; };
    double flo = f(lo), fhi = f(hi);
    const double pad = 1e-12 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
    while (flo > 0.0) {
        lo -= pad + std::abs(hi - lo);
        flo = f(lo);
    }
    while (fhi < 0.0) {
        hi += pad + std::abs(hi - lo);
        fhi = f(hi);
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52),
                                                iters);
    return 0.5 * (r.first + r.second);
}

Weight TubeProfile::weight() const {
    TubeProfile self = *this;
    Weight::Density e = [self](Complex z) { return self.deriv(2, z.real()); };
    Weight::Partials p = [self](int a, int b, Complex z) -> Complex {
        return self.deriv(2 + a + b, z.real()) * std::ldexp(1.0, -(a + b));
    };
    return Weight(name_, std::move(e), std::move(p), 6, 6);
}

Potential TubeProfile::potential() const {
    TubeProfile self = *this;
    return Potential(
        name_, [self](Complex z) { return self.b(z.real()); },
        [self](Complex z) { return Complex(0.5 * self.deriv(1, z.real()), 0.0); },
        [self](int j, Complex z) { return Complex(self.deriv(j, z.real()) * std::ldexp(1.0, -j), 0.0); }, weight());
}

// ---------------------------------------------------------------- examples

std::pair<Weight, Potential> make_heisenberg() {
    Weight w(
        "heisenberg", [](Complex) { return 4.0; },
        [](int a, int b, Complex) { return Complex(a + b == 0 ? 4.0 : 0.0); }, 64, 64);
    Potential p(
        "heisenberg", [](Complex z) { return std::norm(z); }, [](Complex z) { return std::conj(z); },
        [](int j, Complex z) { return j == 1 ? std::conj(z) : Complex(0.0); }, w);
    return {w, p};
}

TubeProfile make_parabolic_tube() {
    return TubeProfile(
        "parabolic-tube",
        [](int k, double x) {
            switch (k) {
                case 0: return 0.5 * x * x;
                case 1: return x;
                case 2: return 1.0;
                default: return 0.0;
            }
        },
        64, 1.0, 1.0);
}

TubeProfile make_sharpness_tube() {
    struct Data {
        detail::PrimitiveTable table{beta, -0.5, 0.5, 4096, 0.0};
        double m1 = 0.0;
        double c = 0.0;
    };
    auto d = std::make_shared<Data>();
    d->m1 = d->table.first(0.5) - d->table.first(-0.5);
    d->c = 0.5 * d->m1 + d->table.second(0.5) - d->table.second(-0.5);
    auto derivs = [d](int k, double x) -> double {
        const double n = std::round(x);
        const double u = x - n;
        switch (k) {
            case 0: return d->m1 * n * (n - 1.0) * 0.5 + n * d->c + n * d->m1 * u + d->table.second(u);
            case 1: return n * d->m1 + d->table.first(u);
            case 2: return beta(u);
            case 3: return beta_derivative(u);
            default: throw std::logic_error("sharpness profile: analytic order exceeded");
        }
    };
    return TubeProfile("sharpness-tube", derivs, 3, std::exp(-0.5), std::exp(0.5));
}

Weight make_quartic_laplacian() {
    return Weight(
        "quartic-laplacian", [](Complex z) { return std::norm(z); },
        [](int a, int b, Complex z) -> Complex {
            if (a == 0 && b == 0) return std::norm(z);
            if (a == 1 && b == 0) return std::conj(z);
            if (a == 0 && b == 1) return z;
            if (a == 1 && b == 1) return 1.0;
            return 0.0;
        },
        64, 64);
}

Weight make_smoothed_polynomial(const Weight& q) {
    if (q.max_order() < 2) throw CapabilityError("make_smoothed_polynomial: Laplacian needs order-2 partials");
    Weight::Density e = [q](Complex z) { return smoothed_chi(q.eval(z)); };
    Weight::Partials p = [q](int a, int b, Complex z) -> Complex {
        const double t = q.eval(z);
        const double c1 = smoothed_chi(t, 1);
        if (a + b == 1) return c1 * q.partial(a, b, z);
        const double c2 = smoothed_chi(t, 2);
        if (a == 1 && b == 1) return c2 * q.partial(1, 0, z) * q.partial(0, 1, z) + c1 * q.partial(1, 1, z);
        return c2 * q.partial(a / 2, b / 2, z) * q.partial(a / 2, b / 2, z) + c1 * q.partial(a, b, z);
    };
    return Weight("smoothed-polynomial", std::move(e), std::move(p), 2, 4);
}

Weight make_h3_counterexample() {
    return Weight("h3-counterexample", [](Complex z) {
        const double r = std::abs(z);
        if (r <= 1.0) return 1.0;
        return 1.0 + smooth_step(r - 1.0) * bump(100.0 * std::arg(z));
    });
}

Weight make_polynomial_weight(std::vector<PolyTerm> terms) {
    for (const auto& t : terms)
        if (t.p < 0 || t.q < 0) throw InvalidArgument("polynomial weight: negative exponent");
    auto falling = [](int n, int k) {
        double r = 1.0;
        for (int i = 0; i < k; ++i) r *= (n - i);
        return r;
    };
    auto real_partial = [terms, falling](int dp, int dq, Complex z) {
        double acc = 0.0;
        for (const auto& t : terms) {
            if (dp > t.p || dq > t.q) continue;
            acc += t.c * falling(t.p, dp) * falling(t.q, dq) * std::pow(z.real(), t.p - dp) *
                   std::pow(z.imag(), t.q - dq);
        }
        return acc;
    };
    Weight::Density e = [real_partial](Complex z) { return real_partial(0, 0, z); };
    Weight::Partials p = [real_partial](int a, int b, Complex z) {
        return wirtinger(a, b, [&](int dp, int dq) { return real_partial(dp, dq, z); });
    };
    return Weight("polynomial", std::move(e), std::move(p), 64, 64);
}

// ---------------------------------------------------------------- UFT checks

UftGrid UftGrid::box(double half_width, int n) {
    if (n < 1) throw InvalidArgument("UftGrid::box: n must be >= 1");
    UftGrid g;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double x = n == 1 ? 0.0 : -half_width + 2.0 * half_width * i / (n - 1);
            const double y = n == 1 ? 0.0 : -half_width + 2.0 * half_width * k / (n - 1);
            g.centers.emplace_back(x, y);
        }
    return g;
}

std::vector<Complex> h3_annulus_curve(const Weight& w, Complex z, int max_exponent, int angular_panels,
                                      const QuadratureConfig& q) {
    std::vector<Complex> curve{0.0};
    Complex acc = 0.0;
    PolarOptions opt;
    opt.angular_panels = angular_panels;
    for (int j = 1; j <= max_exponent; ++j) {
        const double r0 = std::ldexp(1.0, j - 1), r1 = std::ldexp(1.0, j);
        auto g = [&](double rho, double th) {
            return w.eval(z + std::polar(rho, th)) * std::polar(1.0 / (rho * rho), -2.0 * th);
        };
        // The shell integral cancels for growing weights, so its tolerance is taken
        // relative to the mass of |integrand| rather than to the result.
        auto mass_fn = [&](double rho, double th) { return std::abs(w.eval(z + std::polar(rho, th))) / (rho * rho); };
        QuadratureConfig loose = q;
        loose.rel_tol = 1e-3;
        const RealIntegral mass = integrate_polar(mass_fn, r0, r1, loose, opt);
        QuadratureConfig qs = q;
        qs.abs_tol = std::max(q.abs_tol, q.rel_tol * mass.value);
        ComplexIntegral shell = integrate_polar(g, r0, r1, qs, opt);
        throw_if_unconverged(shell.converged, shell.error_estimate, shell.evaluations, "h3 annulus integral");
        acc += shell.value;
        curve.push_back(acc);
    }
    return curve;
}

UftReport verify_uft(const Weight& w, int m, const UftGrid& grid, const UftThresholds& thr,
                     const QuadratureConfig& q) {
    if (grid.centers.empty()) throw InvalidArgument("verify_uft: sample grid is empty");
    if (m < 2) throw InvalidArgument("verify_uft: m must be >= 2");
    if (grid.directions < 64) throw InvalidArgument("verify_uft: at least 64 directions required");
    if (grid.ck_order < 0 || grid.h3_max_exponent < 1 || grid.angular_panels < 1)
        throw InvalidArgument("verify_uft: invalid grid orders");
    if (w.max_order() < m - 2)
        throw CapabilityError("verify_uft: weight '" + w.name() + "' lacks derivatives of order " +
                              std::to_string(m - 2));
    if (w.max_order() < grid.ck_order)
        throw CapabilityError("verify_uft: weight '" + w.name() + "' lacks derivatives of order " +
                              std::to_string(grid.ck_order));
    q.validate();

    UftReport rep;
    rep.m = m;
    rep.grid = grid;
    rep.thresholds = thr;
    const std::size_t nc = grid.centers.size();

    struct CenterResult {
        double h1;
        std::vector<double> ck;
        std::vector<Complex> curve;
    };
    auto per_center = [&](std::size_t i) {
        const Complex z = grid.centers[i];
        CenterResult cr;
        std::vector<std::vector<Complex>> parts(std::max(m - 1, grid.ck_order + 1));
        for (int j = 0; j < static_cast<int>(parts.size()); ++j)
            for (int k = 0; k <= j; ++k) parts[j].push_back(w.partial(k, j - k, z));
        double best = 0.0;
        for (int d = 0; d < grid.directions; ++d) {
            const Complex nu = std::polar(1.0, 2.0 * kPi * d / grid.directions);
            double sum = 0.0;
            for (int j = 0; j <= m - 2; ++j) {
                Complex dd = 0.0;
                for (int k = 0; k <= j; ++k)
                    dd += binom(j, k) * std::pow(nu, k) * std::pow(std::conj(nu), j - k) * parts[j][k];
                sum += std::abs(dd);
            }
            best = std::max(best, sum);
        }
        cr.h1 = best;
        double run = 0.0;
        for (int j = 0; j <= grid.ck_order; ++j) {
            for (const auto& v : parts[j]) run = std::max(run, std::abs(v));
            cr.ck.push_back(run);
        }
        cr.curve = h3_annulus_curve(w, z, grid.h3_max_exponent, grid.angular_panels, q);
        return cr;
    };
    std::vector<CenterResult> results = parallel_map(nc, per_center);

    rep.h1_infimum = std::numeric_limits<double>::infinity();
    rep.ck_norms.assign(grid.ck_order + 1, 0.0);
    rep.h3_curve.assign(grid.h3_max_exponent + 1, 0.0);
    for (int j = 0; j <= grid.h3_max_exponent; ++j) rep.h3_radii.push_back(std::ldexp(1.0, j));
    for (std::size_t i = 0; i < nc; ++i) {
        if (results[i].h1 < rep.h1_infimum) {
            rep.h1_infimum = results[i].h1;
            rep.h1_argmin = grid.centers[i];
        }
        for (int j = 0; j <= grid.ck_order; ++j) rep.ck_norms[j] = std::max(rep.ck_norms[j], results[i].ck[j]);
        for (int j = 0; j <= grid.h3_max_exponent; ++j)
            rep.h3_curve[j] = std::max(rep.h3_curve[j], std::abs(results[i].curve[j]));
    }
    rep.h3_supremum = *std::max_element(rep.h3_curve.begin(), rep.h3_curve.end());

    // Least-squares slope of the curve against log r over the upper dyadic radii.
    const int j0 = (grid.h3_max_exponent + 1) / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = j0; j <= grid.h3_max_exponent; ++j) {
        const double x = std::log(rep.h3_radii[j]), y = rep.h3_curve[j];
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++n;
    }
    rep.h3_log_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;

    rep.verdicts.h1 = rep.h1_infimum >= thr.c1_min;
    rep.verdicts.h2 = std::all_of(rep.ck_norms.begin(), rep.ck_norms.end(),
                                  [&](double v) { return std::isfinite(v) && v <= thr.ck_max; });
    rep.verdicts.h3 = rep.h3_supremum <= thr.c2_max && rep.h3_log_slope <= thr.h3_log_slope_max;
    return rep;
}

std::pair<double, double> fit_perturbation_exponents(const Weight& w, double A, const std::vector<Complex>& centers,
                                                     const std::vector<double>& radii, const QuadratureConfig& q) {
    if (centers.empty() || radii.size() < 2) throw InvalidArgument("fit_perturbation_exponents: need samples");
    std::vector<double> sup(radii.size(), 0.0);
    PolarOptions opt;
    opt.angular_panels = 16;
    for (const Complex z : centers)
        for (std::size_t i = 0; i < radii.size(); ++i) {
            auto g = [&](double rho, double th) { return std::abs(w.eval(z + std::polar(rho, th)) - A); };
            RealIntegral r = integrate_polar(g, 0.0, radii[i], q, opt);
            sup[i] = std::max(sup[i], r.value);
        }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double floor = 1e-300;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double x = std::log(radii[i]), y = std::log(std::max(sup[i], floor));
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = static_cast<double>(radii.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double C = 2.0 - slope;
    double B = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) B = std::max(B, sup[i] / std::pow(radii[i], 2.0 - C));
    return {B, C};
}

// ---------------------------------------------------------------- potential construction

namespace {

// Re(log(1 - w) + w [+ w^2 / 2]) / 2pi, via the tail series for small |w|.
double green_kernel(Complex w, bool second_order) {
    if (std::abs(w) < 0.5) {
        Complex term = w, acc = 0.0;
        const int start = second_order ? 3 : 2;
        for (int k = 1; k < start; ++k) term *= w;
        for (int k = start; k < 80; ++k) {
            acc -= term / static_cast<double>(k);
            term *= w;
            if (std::abs(term) < 1e-18 * std::abs(acc)) break;
        }
        return acc.real() / (2.0 * kPi);
    }
    Complex v = std::log(1.0 - w) + w;
    if (second_order) v += 0.5 * w * w;
    return v.real() / (2.0 * kPi);
}

// Integral of log|z - eta| over r0 <= |eta| <= r1, using that the circle mean of
// log|z - eta| over |eta| = rho is log max(rho, |z|).
double log_distance_integral(double rz, double r0, double r1) {
    auto inside = [](double a, double b) {  // int_a^b 2 pi rho log rho
        auto F = [](double r) { return r == 0.0 ? 0.0 : kPi * (r * r * std::log(r) - 0.5 * r * r); };
        return F(b) - F(a);
    };
    if (rz <= r0) return inside(r0, r1);
    if (rz >= r1) return kPi * (r1 * r1 - r0 * r0) * std::log(rz);
    return kPi * (rz * rz - r0 * r0) * std::log(rz) + inside(rz, r1);
}

// Kernel integral over the annulus r0 <= |eta| <= r1. Near z the log|z - eta|
// singularity is subtracted with weight h(z) and added back in closed form.
RealIntegral shell_integral(const Weight& w, Complex z, double hz, double r0, double r1, bool second_order,
                            const QuadratureConfig& q) {
    const double rz = std::abs(z);
    PolarOptions po;
    po.angular_breaks = {std::arg(z)};
    if (rz > r0 && rz < r1) po.radial_breaks = {rz};
    const bool split = rz > r0 - 0.5 * std::max(r0, 1.0) && rz < 1.5 * r1;
    if (!split) {
        auto g = [&](double rho, double th) {
            const Complex eta = std::polar(rho, th);
            return green_kernel(z / eta, second_order) * w.eval(eta);
        };
        return integrate_polar(g, r0, r1, q, po);
    }
    auto g = [&](double rho, double th) {
        const Complex eta = std::polar(rho, th);
        const Complex wq = z / eta;
        const double he = w.eval(eta);
        double regular = -std::log(rho) + wq.real();
        if (second_order) regular += 0.5 * (wq * wq).real();
        const double d = std::abs(z - eta);
        const double sing = he == hz || d == 0.0 ? 0.0 : std::log(d) * (he - hz);
        return (sing + regular * he) / (2.0 * kPi);
    };
    RealIntegral r = integrate_polar(g, r0, r1, q, po);
    r.value += hz * log_distance_integral(rz, r0, r1) / (2.0 * kPi);
    return r;
}

double potential_value(const Weight& w, Complex z, const PotentialOptions& opt) {
    const double rz = std::abs(z);
    if (rz == 0.0) return 0.0;
    const double hz = w.eval(z);
    auto fail = [](const RealIntegral& r, const char* what) {
        throw_if_unconverged(r.converged, r.error_estimate, r.evaluations, what);
    };
    RealIntegral disk = shell_integral(w, z, hz, 0.0, 1.0, false, opt.quad);
    fail(disk, "potential: unit-disk integral");
    double total = disk.value;
    double r0 = 1.0;
    int small = 0;
    for (int k = 0; k < 80; ++k) {
        const double r1 = 2.0 * r0;
        RealIntegral shell = shell_integral(w, z, hz, r0, r1, true, opt.quad);
        fail(shell, "potential: outer shell integral");
        total += shell.value;
        small = std::abs(shell.value) <= 0.25 * opt.tail_tol ? small + 1 : 0;
        if (small >= 2 && r1 >= 4.0 * rz) return total;
        r0 = r1;
    }
    throw IntegralFailure("potential: outer integral tail did not decay", 0.0, 0);
}

}  // namespace

Potential build_potential(const Weight& w, const PotentialOptions& opt) {
    opt.quad.validate();
    if (!(opt.tail_tol > 0.0) || !(opt.grad_step > 0.0)) throw InvalidArgument("build_potential: bad options");
    Potential::Value val = [w, opt](Complex z) { return potential_value(w, z, opt); };
    Potential::Gradient grad = [val, s = opt.grad_step](Complex z) {
        const double px = (val(z + s) - val(z - s)) / (2.0 * s);
        const double py = (val(z + Complex(0, s)) - val(z - Complex(0, s))) / (2.0 * s);
        return Complex(0.5 * px, -0.5 * py);
    };
    return Potential("constructed(" + w.name() + ")", val, grad, {}, w);
}

}  // namespace szego
