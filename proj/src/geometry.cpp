#include "szego/geometry.hpp"

#include "szego/errors.hpp"
#include "szego/normalize.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace szego {

namespace {

using std::numbers::pi;

double binom(int n, int k) { return boost::math::binomial_coefficient<double>(n, k); }

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

// Root of an increasing f on [lo, hi] with f(lo) <= 0 <= f(hi).
template <class F>
double increasing_root(F&& f, double lo, double hi, double rel_tol) {
    double flo = f(lo), fhi = f(hi);
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;
    std::uintmax_t iters = 200;
    auto tol = [rel_tol](double a, double b) { return std::abs(b - a) <= rel_tol * std::min(std::abs(a), std::abs(b)); };
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    const double fa = std::abs(f(a)), fb = std::abs(f(b));
    return fa <= fb ? a : b;
}

}  // namespace

MetricContext::MetricContext(Weight w, Potential p, int m_, std::optional<double> nu_)
    : weight(std::move(w)), potential(std::move(p)), m(m_), nu(nu_.value_or(1.0 / m_)) {
    if (m < 2) throw InvalidArgument("MetricContext: m must be >= 2");
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("MetricContext: nu must lie in (0, 1]");
}

MetricContext make_heisenberg_context() {
    auto [w, p] = make_heisenberg();
    return MetricContext(w, p, 2);
}

MetricContext make_tube_context(const TubeProfile& tp, int m) {
    MetricContext ctx(tp.weight(), tp.potential(), m);
    ctx.profile = tp;
    return ctx;
}

namespace {

// int_{|x - x0| < delta} b''(x) 2 sqrt(delta^2 - (x - x0)^2) dx with x = x0 + delta sin(phi),
// split at the half-integers crossed by the chord.
double tube_lambda(const MetricContext& ctx, double x0, double delta) {
    const TubeProfile& tp = *ctx.profile;
    std::vector<double> br;
    const double first = std::ceil(x0 - delta - 0.5), last = std::floor(x0 + delta - 0.5);
    if (last - first < 1e5)
        for (double k = first; k <= last; k += 1.0) {
            const double s = (k + 0.5 - x0) / delta;
            if (s > -1.0 && s < 1.0) br.push_back(std::asin(s));
        }
    auto f = [&](double phi) {
        const double c = std::cos(phi);
        return tp.deriv(2, x0 + delta * std::sin(phi)) * 2.0 * delta * delta * c * c;
    };
    return integrate_1d_strict(f, {-0.5 * pi, 0.5 * pi}, ctx.quad, br).value;
}

}  // namespace

double lambda_integral(const MetricContext& ctx, Complex z, double delta) {
    require_positive(delta, "lambda_integral: delta");
    if (ctx.profile) return tube_lambda(ctx, z.real(), delta);
    auto g = [&](double r, double th) { return ctx.weight.eval(z + std::polar(r, th)); };
    auto res = integrate_polar(g, 0.0, delta, ctx.quad);
    throw_if_unconverged(res.converged, res.error_estimate, res.evaluations, "lambda_integral");
    return res.value;
}

std::vector<double> lambda_poly_coefficients(const MetricContext& ctx, Complex z, int variant) {
    const int m = ctx.m;
    if (m - 2 > ctx.weight.max_order())
        throw CapabilityError("lambda_poly: weight derivatives of order " + std::to_string(m - 2) + " unavailable");
    std::vector<double> c(m - 1, 0.0);
    if (variant == 3) {
        const auto dirs = default_directions(m, m + 1);
        for (int j = 2; j <= m; ++j)
            for (const Complex& nu : dirs) c[j - 2] += std::abs(directional_derivative(ctx.weight, j - 2, nu, z));
    } else if (variant == 4) {
        for (int j = 2; j <= m; ++j)
            for (int k = 0; k <= j - 2; ++k) c[j - 2] += std::abs(ctx.weight.partial(k, j - 2 - k, z));
    } else {
        throw InvalidArgument("lambda_poly_coefficients: variant must be 3 or 4");
    }
    return c;
}

double lambda_poly(const MetricContext& ctx, Complex z, double delta, int variant) {
    require_positive(delta, "lambda_poly: delta");
    if (delta > ctx.delta0) throw InvalidArgument("lambda_poly: delta exceeds delta0");
    if (variant == 2) {
        const int m = ctx.m;
        if (m - 2 > ctx.weight.max_order())
            throw CapabilityError("lambda_poly: weight derivatives of order " + std::to_string(m - 2) + " unavailable");
        // Mixed partials once, then every grid direction by the binomial expansion.
        std::vector<std::vector<Complex>> parts(m - 1);
        for (int j = 0; j <= m - 2; ++j)
            for (int k = 0; k <= j; ++k) parts[j].push_back(ctx.weight.partial(k, j - k, z));
        double best = 0.0;
        for (int i = 0; i < ctx.lambda2_directions; ++i) {
            const Complex nu = std::polar(1.0, 2.0 * pi * i / ctx.lambda2_directions);
            double s = 0.0;
            for (int j = 0; j <= m - 2; ++j) {
                Complex d = 0.0;
                for (int k = 0; k <= j; ++k) d += binom(j, k) * std::pow(nu, k) * std::pow(std::conj(nu), j - k) * parts[j][k];
                s += std::abs(d) * std::pow(delta, j + 2);
            }
            best = std::max(best, s);
        }
        return best;
    }
    const auto c = lambda_poly_coefficients(ctx, z, variant);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * std::pow(delta, static_cast<double>(i + 2));
    return s;
}

double mu_invert(const MetricContext& ctx, Complex z, double target) {
    if (target == 0.0) return 0.0;
    require_positive(target, "mu_invert: target");
    auto f = [&](double d) { return d <= 0.0 ? -target : lambda_integral(ctx, z, d) - target; };
    double lo = 0.0, hi = 1e-12;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) throw DomainError("mu_invert: target " + std::to_string(target) + " not reached below delta = 1e9");
    }
    return increasing_root(f, lo, hi, ctx.mu_rel_tol);
}

namespace {

std::vector<double> star_coefficients(const MetricContext& ctx, Complex z) {
    auto c = lambda_poly_coefficients(ctx, z, 3);
    double sum = 0.0;
    for (double v : c) sum += v;
    if (!(sum > 0.0)) throw DomainError("mu_star: all polynomial coefficients vanish at z");
    for (double& v : c) v /= sum;
    return c;
}

double star_poly(const std::vector<double>& c, double delta) {
    double s = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) s = s * delta + c[i];
    return s * delta * delta;
}

}  // namespace

double lambda_star(const MetricContext& ctx, Complex z, double delta) {
    if (delta < 0.0) throw InvalidArgument("lambda_star: delta must be >= 0");
    if (delta >= 1.0) return delta * delta;
    return star_poly(star_coefficients(ctx, z), delta);
}

double mu_star(const MetricContext& ctx, Complex z, double target) {
    if (target == 0.0) return 0.0;
    require_positive(target, "mu_star: target");
    if (target >= 1.0) return std::sqrt(target);
    const auto c = star_coefficients(ctx, z);
    return increasing_root([&](double d) { return star_poly(c, d) - target; }, 0.0, 1.0, 4e-16);
}

double twist_value(const MetricContext& ctx, Complex z, Complex w, const TwistChoice& twist) {
    if (twist.kind == TwistChoice::Kind::taylor) return twist_Tkappa(ctx.potential, z, w, twist.kappa);
    return twist_T(ctx.potential, z, w);
}

double cc_distance(const MetricContext& ctx, const BoundaryPoint& a, const BoundaryPoint& b, const TwistChoice& twist,
                   double gap_offset) {
    if (gap_offset < 0.0) throw InvalidArgument("cc_distance: gap offset must be >= 0");
    const double gap = std::abs(a.t - b.t - twist_value(ctx, a.z, b.z, twist)) + gap_offset;
    return std::abs(a.z - b.z) + mu_invert(ctx, b.z, gap);
}

double ball_volume(const MetricContext& ctx, const BoundaryPoint& a, double delta) {
    return delta * delta * lambda_integral(ctx, a.z, delta);
}

double smooth_distance(const MetricContext& ctx, const BoundaryPoint& a, const BoundaryPoint& w0) {
    const Complex z = a.z - w0.z;
    const double r = std::abs(z);
    const double g = a.t - w0.t - twist_value(ctx, a.z, w0.z, TwistChoice::exact_line());
    if (r == 0.0 && g == 0.0) return 0.0;
    const double lt = lambda_star(ctx, w0.z, r);
    const double d_small = mu_star(ctx, w0.z, std::hypot(lt, g));
    const double d_large = std::pow(r * r * r * r + g * g, 0.25);
    auto chi = [](double s) { return 1.0 - smooth_step(s - 1.0); };
    return chi(d_small) * d_small + (1.0 - chi(ctx.dstar_eps * d_large)) * d_large;
}

double sigma_tau(const MetricContext& ctx, const BoundaryPoint& w, double tau) {
    require_positive(tau, "sigma_tau: tau");
    return mu_invert(ctx, w.z, 1.0 / tau);
}

double rho_tilde(const MetricContext& ctx, const BoundaryPoint& a, const BoundaryPoint& b, double tau) {
    require_positive(tau, "rho_tilde: tau");
    const double r = std::abs(a.z - b.z);
    if (r == 0.0) return 0.0;
    const double la = tau * lambda_integral(ctx, a.z, r), lb = tau * lambda_integral(ctx, b.z, r);
    return std::pow(la + lb, ctx.nu);
}

std::vector<Complex> default_directions(int m, int count) {
    std::vector<Complex> v;
    for (int n = 0; n < count; ++n) v.push_back(std::polar(1.0, pi * n / (m + 1)));
    return v;
}

std::vector<Complex> VandermondeTable::apply(const std::vector<Complex>& directional) const {
    if (static_cast<int>(directional.size()) != j + 1)
        throw InvalidArgument("VandermondeTable::apply: expected j + 1 directional derivatives");
    std::vector<Complex> out(j + 1, 0.0);
    for (int k = 0; k <= j; ++k)
        for (int n = 0; n <= j; ++n) out[k] += a[n][k] * directional[n];
    return out;
}

VandermondeTable vandermonde_coeffs(int j, const std::vector<Complex>& directions) {
    if (j < 0) throw InvalidArgument("vandermonde_coeffs: j must be >= 0");
    if (static_cast<int>(directions.size()) != j + 1)
        throw InvalidArgument("vandermonde_coeffs: need exactly j + 1 directions");
    for (const Complex& nu : directions)
        if (std::abs(std::abs(nu) - 1.0) > 1e-12) throw InvalidArgument("vandermonde_coeffs: directions must be unit");
    VandermondeTable t;
    t.j = j;
    t.directions = directions;
    t.min_gap = std::numeric_limits<double>::infinity();
    for (int x = 0; x <= j; ++x)
        for (int y = x + 1; y <= j; ++y)
            t.min_gap = std::min(t.min_gap, std::abs(directions[x] * directions[x] - directions[y] * directions[y]));
    if (t.min_gap < 1e-14) throw SingularSystem("vandermonde_coeffs: squared directions coincide");
    Eigen::MatrixXcd A(j + 1, j + 1);
    for (int n = 0; n <= j; ++n)
        for (int k = 0; k <= j; ++k) A(n, k) = std::pow(directions[n], k) * std::pow(std::conj(directions[n]), j - k);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) throw SingularSystem("vandermonde_coeffs: matrix is singular");
    const Eigen::MatrixXcd inv = lu.inverse();
    t.a.assign(j + 1, std::vector<Complex>(j + 1));
    for (int n = 0; n <= j; ++n)
        for (int k = 0; k <= j; ++k) {
            t.a[n][k] = inv(k, n) / binom(j, k);
            t.max_abs = std::max(t.max_abs, std::abs(t.a[n][k]));
        }
    const double jf = std::tgamma(j + 1.0);
    t.bound = j == 0 ? 1.0 : jf * jf * std::pow(t.min_gap, -0.5 * j * (j + 1));
    t.bound_holds = t.max_abs <= t.bound * (1.0 + 1e-12);
    return t;
}

MaxDirection max_direction(const Weight& w, Complex z, int J, int grid) {
    if (J < 0) throw InvalidArgument("max_direction: J must be >= 0");
    if (grid < 1) throw InvalidArgument("max_direction: grid must be positive");
    if (J > w.max_order()) throw CapabilityError("max_direction: weight derivatives of order " + std::to_string(J) + " unavailable");
    // Denominators below this floor count as vanishing.
    constexpr double vanish = 1e-12;
    std::vector<std::vector<Complex>> parts(J + 1);
    std::vector<double> denom(J + 1, 0.0);
    for (int j = 0; j <= J; ++j)
        for (int k = 0; k <= j; ++k) {
            parts[j].push_back(w.partial(k, j - k, z));
            denom[j] += std::abs(parts[j].back());
        }
    const double inf = std::numeric_limits<double>::infinity();
    MaxDirection best{Complex(1.0, 0.0), -1.0};
    for (int i = 0; i < grid; ++i) {
        const Complex nu = std::polar(1.0, 2.0 * pi * i / grid);
        double c = inf;
        for (int j = 0; j <= J; ++j) {
            if (denom[j] <= vanish) continue;
            Complex d = 0.0;
            for (int k = 0; k <= j; ++k) d += binom(j, k) * std::pow(nu, k) * std::pow(std::conj(nu), j - k) * parts[j][k];
            c = std::min(c, std::abs(d) / denom[j]);
        }
        if (c > best.constant) best = {i == 0 ? Complex(1.0, 0.0) : nu, c};
    }
    return best;
}

}  // namespace szego
