#include "szego/quadrature.hpp"

#include "szego/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace szego {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod nodes x[0..10] (x[0] = 0) with weights wk; Gauss weights wg at odd nodes.
struct Gk21 {
    std::array<double, 11> x{};
    std::array<double, 11> wk{};
    std::array<double, 11> wg{};
};

const Gk21& gk21() {
    static const Gk21 rule = [] {
        Gk21 r;
        const auto& kx = boost::math::quadrature::gauss_kronrod<double, 21>::abscissa();
        const auto& kw = boost::math::quadrature::gauss_kronrod<double, 21>::weights();
        const auto& gx = boost::math::quadrature::gauss<double, 10>::abscissa();
        const auto& gw = boost::math::quadrature::gauss<double, 10>::weights();
        for (std::size_t i = 0; i < 11; ++i) {
            r.x[i] = kx[i];
            r.wk[i] = kw[i];
        }
        for (std::size_t j = 0; j < gx.size(); ++j) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < 11; ++i)
                if (std::abs(r.x[i] - gx[j]) < std::abs(r.x[best] - gx[j])) best = i;
            if (std::abs(r.x[best] - gx[j]) > 1e-14)
                throw std::logic_error("Gauss nodes are not embedded in the Kronrod rule");
            r.wg[best] = gw[j];
        }
        return r;
    }();
    return rule;
}

template <class T>
struct Panel {
    double a;
    double b;
    T value;
    double error;
    int depth;
};

template <class T>
struct PanelOrder {
    bool operator()(const Panel<T>& p, const Panel<T>& q) const { return p.error < q.error; }
};

template <class T, class F>
T checked_eval(const F& f, double x, double report_x) {
    T v = f(x);
    bool finite;
    if constexpr (std::is_same_v<T, Complex>)
        finite = std::isfinite(v.real()) && std::isfinite(v.imag());
    else
        finite = std::isfinite(v);
    if (!finite) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite integrand value at x = " << report_x;
        throw IntegrandError(os.str(), report_x);
    }
    return v;
}

// One Gauss-Kronrod panel with the QUADPACK error heuristic.
template <class T, class F, class Locate>
Panel<T> gk_panel(const F& f, const Locate& locate, double a, double b, int depth, long& evals) {
    const Gk21& r = gk21();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<T, 21> fv{};
    fv[0] = checked_eval<T>(f, c, locate(c));
    for (std::size_t i = 1; i < 11; ++i) {
        const double dx = h * r.x[i];
        fv[2 * i - 1] = checked_eval<T>(f, c - dx, locate(c - dx));
        fv[2 * i] = checked_eval<T>(f, c + dx, locate(c + dx));
    }
    evals += 21;
    T rk = fv[0] * r.wk[0];
    T rg = fv[0] * r.wg[0];
    double resabs = std::abs(fv[0]) * r.wk[0];
    for (std::size_t i = 1; i < 11; ++i) {
        const T s = fv[2 * i - 1] + fv[2 * i];
        rk += s * r.wk[i];
        rg += s * r.wg[i];
        resabs += (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i])) * r.wk[i];
    }
    const T mean = rk * 0.5;
    double resasc = std::abs(fv[0] - mean) * r.wk[0];
    for (std::size_t i = 1; i < 11; ++i)
        resasc += (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean)) * r.wk[i];
    const double ah = std::abs(h);
    resabs *= ah;
    resasc *= ah;
    double err = std::abs((rk - rg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(50.0 * kEps * resabs, err);
    return {a, b, rk * h, err, depth};
}

template <class T, class F, class Locate>
IntegralResult<T> adaptive(const F& f, const Locate& locate, std::vector<double> cuts,
                           const QuadratureConfig& cfg) {
    IntegralResult<T> out;
    std::priority_queue<Panel<T>, std::vector<Panel<T>>, PanelOrder<T>> active;
    std::vector<Panel<T>> frozen;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        active.push(gk_panel<T>(f, locate, cuts[i], cuts[i + 1], 0, out.evaluations));

    auto totals = [&](T& value, double& error) {
        value = T{};
        error = 0.0;
        auto copy = active;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            copy.pop();
        }
        for (const auto& p : frozen) {
            value += p.value;
            error += p.error;
        }
    };

    T value{};
    double error = 0.0;
    totals(value, error);
    std::size_t count = active.size();
    while (true) {
        if (error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value))) {
            out.converged = true;
            break;
        }
        if (active.empty() || static_cast<int>(count) >= cfg.max_intervals) {
            out.converged = false;
            break;
        }
        Panel<T> p = active.top();
        active.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (p.depth >= cfg.max_depth || !(mid > p.a && mid < p.b) ||
            (p.b - p.a) <= 8.0 * kEps * std::max(std::abs(p.a), std::abs(p.b))) {
            frozen.push_back(p);
            continue;
        }
        Panel<T> left = gk_panel<T>(f, locate, p.a, mid, p.depth + 1, out.evaluations);
        Panel<T> right = gk_panel<T>(f, locate, mid, p.b, p.depth + 1, out.evaluations);
        value += left.value + right.value - p.value;
        error += left.error + right.error - p.error;
        active.push(left);
        active.push(right);
        ++count;
        if (count % 64 == 0) totals(value, error);
    }
    totals(out.value, out.error_estimate);
    if (out.converged && out.error_estimate > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value)))
        out.converged = false;
    return out;
}

std::vector<double> sorted_cuts(double lo, double hi, std::span<const double> breaks) {
    std::vector<double> cuts{lo};
    for (double b : breaks)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

template <class T, class Fn>
IntegralResult<T> integrate_any(const Fn& f, Interval iv, const QuadratureConfig& cfg,
                                std::span<const double> breaks) {
    cfg.validate();
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw InvalidArgument("integration bound is NaN");
    double sign = 1.0;
    if (iv.lo > iv.hi) {
        std::swap(iv.lo, iv.hi);
        sign = -1.0;
    }
    if (iv.lo == iv.hi) return {};
    const bool lo_inf = std::isinf(iv.lo);
    const bool hi_inf = std::isinf(iv.hi);
    IntegralResult<T> r;
    if (!lo_inf && !hi_inf) {
        auto id = [](double x) { return x; };
        r = adaptive<T>(f, id, sorted_cuts(iv.lo, iv.hi, breaks), cfg);
    } else if (lo_inf && hi_inf) {
        auto x_of = [](double t) { return t / ((1.0 - t) * (1.0 + t)); };
        auto g = [&](double t) -> T {
            const double q = (1.0 - t) * (1.0 + t);
            if (q <= 0.0) return T{};
            const double x = t / q;
            if (!std::isfinite(x)) return T{};
            return f(x) * ((1.0 + t * t) / (q * q));
        };
        std::vector<double> tb;
        for (double b : breaks)
            if (std::isfinite(b)) tb.push_back(b == 0.0 ? 0.0 : 2.0 * b / (1.0 + std::sqrt(1.0 + 4.0 * b * b)));
        r = adaptive<T>(g, x_of, sorted_cuts(-1.0, 1.0, tb), cfg);
    } else {
        const double base = lo_inf ? iv.hi : iv.lo;
        const double dir = lo_inf ? -1.0 : 1.0;
        auto x_of = [=](double t) { return base + dir * t / (1.0 - t); };
        auto g = [&](double t) -> T {
            const double q = 1.0 - t;
            if (q <= 0.0) return T{};
            const double x = base + dir * t / q;
            if (!std::isfinite(x)) return T{};
            return f(x) * (1.0 / (q * q));
        };
        std::vector<double> tb;
        for (double b : breaks) {
            const double u = dir * (b - base);
            if (std::isfinite(b) && u > 0.0) tb.push_back(u / (1.0 + u));
        }
        r = adaptive<T>(g, x_of, sorted_cuts(0.0, 1.0, tb), cfg);
    }
    r.value = r.value * sign;
    return r;
}

template <class T, class G>
IntegralResult<T> polar_any(const G& g, double r0, double r1, const QuadratureConfig& cfg,
                            const PolarOptions& opt) {
    if (!(r0 >= 0.0) || !(r1 >= r0)) throw InvalidArgument("polar integration needs 0 <= r0 <= r1");
    if (opt.angular_panels < 1) throw InvalidArgument("angular_panels must be >= 1");
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> abreaks;
    for (int k = 1; k < opt.angular_panels; ++k) abreaks.push_back(two_pi * k / opt.angular_panels);
    for (double b : opt.angular_breaks) {
        double t = std::fmod(b, two_pi);
        if (t < 0) t += two_pi;
        abreaks.push_back(t);
    }
    const QuadratureConfig inner_cfg = cfg.tightened(0.1);
    long inner_evals = 0;
    bool inner_ok = true;
    auto radial = [&](double rho) -> T {
        auto ang = [&](double th) -> T { return g(rho, th) * rho; };
        IntegralResult<T> in = integrate_any<T>(ang, {0.0, two_pi}, inner_cfg, abreaks);
        inner_evals += in.evaluations;
        inner_ok = inner_ok && in.converged;
        return in.value;
    };
    IntegralResult<T> out = integrate_any<T>(radial, {r0, r1}, cfg, opt.radial_breaks);
    out.evaluations = inner_evals;
    out.converged = out.converged && inner_ok;
    return out;
}

template <class T, class F>
IntegralResult<T> halfline_any(const F& f, double damping, const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(damping > 0.0)) throw InvalidArgument("damping must be > 0");
    IntegralResult<T> out;
    double lo = 0.0;
    double hi = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    int small_run = 0;
    for (int k = 0; k < 2000; ++k) {
        QuadratureConfig pc = cfg;
        pc.abs_tol = std::max(cfg.abs_tol, 0.1 * cfg.rel_tol * std::abs(out.value));
        IntegralResult<T> p = integrate_any<T>(f, {lo, hi}, pc, {});
        out.value += p.value;
        out.error_estimate += p.error_estimate;
        out.evaluations += p.evaluations;
        out.converged = out.converged && p.converged;
        const double mag = std::abs(p.value);
        const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value));
        const double decay = 0.5 * damping * hi;
        small_run = (mag <= tol) ? small_run + 1 : 0;
        if ((small_run >= 2 && damping * hi >= 2.0) ||
            (small_run >= 1 && decay >= cfg.truncation_log_cut + 10.0))
            return out;
        if (decay > cfg.truncation_log_cut && mag > prev && mag > tol)
            throw DivergenceError("half-line integral: panel contributions are not shrinking");
        if (decay > 2.0 * cfg.truncation_log_cut + 20.0)
            throw DivergenceError("half-line integral: tail does not decay at the asserted rate");
        prev = mag;
        lo = hi;
        hi *= 2.0;
    }
    throw DivergenceError("half-line integral: panel limit reached");
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw InvalidArgument("quadrature tolerances must be > 0");
    if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
    if (!(truncation_log_cut > 0.0)) throw InvalidArgument("truncation_log_cut must be > 0");
    if (max_intervals < 1) throw InvalidArgument("max_intervals must be >= 1");
}

QuadratureConfig QuadratureConfig::tightened(double factor) const {
    QuadratureConfig c = *this;
    c.abs_tol *= factor;
    c.rel_tol = std::max(c.rel_tol * factor, 4.0 * kEps);
    return c;
}

RealIntegral integrate_real(const RealFn& f, Interval iv, const QuadratureConfig& cfg,
                            std::span<const double> breakpoints) {
    return integrate_any<double>(f, iv, cfg, breakpoints);
}

ComplexIntegral integrate_complex(const ComplexFn& f, Interval iv, const QuadratureConfig& cfg,
                                  std::span<const double> breakpoints) {
    return integrate_any<Complex>(f, iv, cfg, breakpoints);
}

void throw_if_unconverged(bool converged, double error_estimate, long evaluations, const char* what) {
    if (!converged) {
        std::ostringstream os;
        os.precision(6);
        os << what << ": adaptive quadrature did not converge (error estimate " << error_estimate
           << ", " << evaluations << " evaluations)";
        throw IntegralFailure(os.str(), error_estimate, evaluations);
    }
}

RealIntegral polar_real(const std::function<double(double, double)>& g, double r0, double r1,
                        const QuadratureConfig& cfg, const PolarOptions& opt) {
    return polar_any<double>(g, r0, r1, cfg, opt);
}

ComplexIntegral polar_complex(const std::function<Complex(double, double)>& g, double r0, double r1,
                              const QuadratureConfig& cfg, const PolarOptions& opt) {
    return polar_any<Complex>(g, r0, r1, cfg, opt);
}

Minimum minimize_convex(const RealFn& phi, Interval bracket, double x_tol) {
    if (!(bracket.hi > bracket.lo)) throw InvalidArgument("minimize_convex: empty bracket");
    long evals = 0;
    auto f = [&](double x) {
        ++evals;
        const double v = phi(x);
        if (std::isnan(v)) throw IntegrandError("minimize_convex: NaN objective", x);
        return v;
    };
    double a = bracket.lo;
    double c = bracket.hi;
    double b = 0.5 * (a + c);
    double fa = f(a), fb = f(b), fc = f(c);
    double step = c - b;
    int expansions = 0;
    while (!(fb <= fa && fb <= fc)) {
        if (++expansions > 1100 || !std::isfinite(step))
            throw UnboundedBelow("minimize_convex: no interior minimum in expanded bracket");
        step *= 2.0;
        if (fc < fb) {
            a = b, fa = fb;
            b = c, fb = fc;
            c = b + step;
            fc = f(c);
        } else {
            c = b, fc = fb;
            b = a, fb = fa;
            a = b - step;
            fa = f(a);
        }
        if (!std::isfinite(a) || !std::isfinite(c))
            throw UnboundedBelow("minimize_convex: no interior minimum in expanded bracket");
    }
    // Brent's method (golden section with parabolic steps), then a golden-section
    // polish to reach x_tol where the parabola stalls.
    std::uintmax_t iters = 500;
    auto best = boost::math::tools::brent_find_minima(f, a, c, std::numeric_limits<double>::digits / 2,
                                                      iters);
    double x = best.first;
    double fx = best.second;
    double lo = std::max(a, x - 1e-6 * std::max(1.0, std::abs(x)));
    double hi = std::min(c, x + 1e-6 * std::max(1.0, std::abs(x)));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > x_tol * std::max(1.0, std::abs(x)) && hi - lo > 4.0 * kEps * std::abs(x)) {
        if (f1 <= f2) {
            hi = x2, x2 = x1, f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1, x1 = x2, f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    const double xm = 0.5 * (lo + hi);
    const double fm = f(xm);
    if (fm <= fx) {
        x = xm;
        fx = fm;
    }
    return {x, fx, evals};
}

LevelSet level_set_width(const RealFn& phi, double theta0, double level) {
    if (!(level > 0.0)) throw InvalidArgument("level_set_width: level must be > 0");
    long evals = 1;
    const double f0 = phi(theta0);
    auto side = [&](double dir) {
        auto g = [&](double s) {
            ++evals;
            return phi(theta0 + dir * s) - f0 - level;
        };
        double lo = 0.0;
        double hi = 1.0;
        double ghi = g(hi);
        int n = 0;
        while (ghi < 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++n > 1000 || !std::isfinite(hi))
                throw InfiniteWidth("level_set_width: level never reached (flat objective)");
            ghi = g(hi);
        }
        if (std::isnan(ghi)) throw IntegrandError("level_set_width: NaN objective", theta0 + dir * hi);
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(g, lo, hi, -level, ghi,
                                                    boost::math::tools::eps_tolerance<double>(50), iters);
        return 0.5 * (r.first + r.second);
    };
    const double plus = side(1.0);
    const double minus = side(-1.0);
    return {minus, plus, minus + plus, evals};
}

LogIntegral log_integral_exp(const RealFn& phi, double theta0, double lo, double hi,
                             const QuadratureConfig& cfg) {
    const double phi0 = phi(theta0);
    auto g = [&](double th) { return std::exp(-(phi(th) - phi0)); };
    const double br[1] = {theta0};
    RealIntegral r = integrate_1d(g, {lo, hi}, cfg, br);
    r.evaluations += 1;
    if (!(r.value > 0.0)) throw IntegralFailure("log_integral_exp: non-positive integral", r.error_estimate, r.evaluations);
    return {-phi0 + std::log(r.value), r};
}

ConvexLaplace convex_laplace(const RealFn& phi, const QuadratureConfig& cfg, Interval bracket) {
    cfg.validate();
    const Minimum m = minimize_convex(phi, bracket);
    const LevelSet unit = level_set_width(phi, m.argmin, 1.0);
    const LevelSet cut = level_set_width(phi, m.argmin, cfg.truncation_log_cut);
    ConvexLaplace out{};
    out.theta0 = m.argmin;
    out.phi_min = phi(m.argmin);
    out.width = unit.width;
    out.log_surrogate = std::log(unit.width) - out.phi_min;
    out.surrogate = std::exp(out.log_surrogate);
    out.window_lo = m.argmin - cut.minus;
    out.window_hi = m.argmin + cut.plus;
    LogIntegral li = log_integral_exp(phi, m.argmin, out.window_lo, out.window_hi, cfg);
    out.shifted = li.shifted;
    out.shifted.evaluations += m.evaluations + unit.evaluations + cut.evaluations;
    out.log_refined = li.log_value;
    out.refined = std::exp(li.log_value);
    return out;
}

RealIntegral halfline_real(const RealFn& f, double damping, const QuadratureConfig& cfg) {
    return halfline_any<double>(f, damping, cfg);
}

ComplexIntegral halfline_complex(const ComplexFn& f, double damping, const QuadratureConfig& cfg) {
    return halfline_any<Complex>(f, damping, cfg);
}

}  // namespace szego
