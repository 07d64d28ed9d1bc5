#include "szego/szego.hpp"

#include "szego/errors.hpp"
#include "szego/parallel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace szego {

namespace {

using std::numbers::pi;

QuadratureConfig inner_config(const QuadratureConfig& q) {
    QuadratureConfig c = q;
    c.abs_tol = 1e-300;
    c.rel_tol = std::min(q.rel_tol * 1e-2, 1e-9);
    return c;
}

struct LogI {
    double value;
    long evaluations;
};

LogI log_inner(const TubeProfile& tp, double eta, double tau, const QuadratureConfig& q) {
    if (!(tau > 0.0)) throw InvalidArgument("inner_weight_integral: tau must be > 0");
    const auto [a, A] = tp.convexity_bounds();
    long evals = 0;
    const double theta0 = tp.slope_inverse(eta / tau);
    auto phi = [&](double th) {
        ++evals;
        return 2.0 * (tau * tp.b(th) - eta * th);
    };
    // phi - phi_min >= tau a (theta - theta0)^2.
    const double w = std::sqrt((q.truncation_log_cut + 10.0) / (tau * a));
    const LogIntegral li = log_integral_exp(phi, theta0, theta0 - w, theta0 + w, inner_config(q));
    if (!li.shifted.converged)
        throw IntegralFailure("inner_weight_integral did not converge", li.shifted.error_estimate, evals);
    return {li.log_value, evals};
}

class MomentEngine {
public:
    MomentEngine(const KernelQuery& kq, int p, int q) : kq_(kq), p_(p), q_(q) {
        if (!(kq.epsilon > 0.0)) throw InvalidArgument("kernel: epsilon must be > 0");
        if (p < 0 || q < 0) throw InvalidArgument("kernel: moment orders must be >= 0");
        kq.quad.validate();
        const TubeProfile& tp = kq.profile;
        const double xa = kq.a.z.real(), xb = kq.b.z.real();
        s_ = xa + xb;
        dy_ = kq.a.z.imag() - kq.b.z.imag();
        dt_ = kq.a.t - kq.b.t;
        d_ = tp.b(xa) + kq.lift_a + tp.b(xb) + kq.lift_b + kq.epsilon;
        damping_ = kq.epsilon + kq.lift_a + kq.lift_b;
        if (!(damping_ > 0.0))
            throw DivergenceError("kernel: points below the regularized boundary (eps + lifts <= 0)");
        slope_ = tp.deriv(1, 0.5 * s_);
        A_ = tp.convexity_bounds().second;
        a_ = tp.convexity_bounds().first;
    }

    KernelValue run() {
        auto f = [this](double tau) { return tau_integrand(tau); };
        ComplexIntegral r = integrate_halfline_damped(f, damping_, kq_.quad);
        throw_if_unconverged(r.converged, r.error_estimate, r.evaluations, "kernel tau integral");
        KernelValue out;
        out.value = r.value;
        out.error_estimate = r.error_estimate + kq_.quad.rel_tol * std::abs(r.value);
        out.stats = stats_;
        out.stats.tau_nodes = r.evaluations;
        return out;
    }

private:
    // eta s - log I(eta, tau)
    double exponent(double eta, double tau) {
        const LogI li = log_inner(kq_.profile, eta, tau, kq_.quad);
        ++stats_.inner_integrals;
        stats_.profile_evaluations += li.evaluations;
        return eta * s_ - li.value;
    }

    Complex tau_integrand(double tau) {
        const double cut = kq_.quad.truncation_log_cut;
        const double center = tau * slope_;
        const double e0 = exponent(center, tau);
        // The exponent is concave in eta with curvature at least 2 / (tau A).
        double half = std::sqrt(tau * A_ * (cut + 10.0));
        for (int k = 0;; ++k) {
            if (exponent(center - half, tau) < e0 - cut && exponent(center + half, tau) < e0 - cut) break;
            if (k == 60) throw DivergenceError("kernel: eta integrand does not decay");
            half *= 2.0;
        }
        auto g = [&](double eta) -> Complex {
            const double mag = std::exp(exponent(eta, tau) - e0);
            return std::pow(eta, q_) * mag * std::polar(1.0, eta * dy_);
        };
        QuadratureConfig c = kq_.quad;
        c.abs_tol = 1e-3 * kq_.quad.rel_tol * std::sqrt(tau * a_) * std::pow(std::max(std::abs(center), half), q_);
        const double br[1] = {center};
        ComplexIntegral in = integrate_1d(g, {center - half, center + half}, c, br);
        throw_if_unconverged(in.converged, in.error_estimate, in.evaluations, "kernel eta integral");
        const double log_scale = e0 - tau * d_ + p_ * std::log(tau);
        return in.value * std::exp(log_scale) * std::polar(1.0, tau * dt_);
    }

    const KernelQuery& kq_;
    int p_;
    int q_;
    double s_ = 0.0;
    double dy_ = 0.0;
    double dt_ = 0.0;
    double d_ = 0.0;
    double damping_ = 0.0;
    double slope_ = 0.0;
    double a_ = 1.0;
    double A_ = 1.0;
    KernelStats stats_;
};

KernelValue scaled(KernelValue v, Complex factor) {
    v.value *= factor;
    v.error_estimate *= std::abs(factor);
    return v;
}

}  // namespace

double log_inner_weight_integral(const TubeProfile& tp, double eta, double tau, const QuadratureConfig& q) {
    return log_inner(tp, eta, tau, q).value;
}

double inner_weight_integral(const TubeProfile& tp, double eta, double tau, const QuadratureConfig& q) {
    return std::exp(log_inner_weight_integral(tp, eta, tau, q));
}

KernelValue tube_kernel_moment(const KernelQuery& query, int p, int q) { return MomentEngine(query, p, q).run(); }

KernelValue tube_szego_kernel(const KernelQuery& query) {
    return scaled(tube_kernel_moment(query, 0, 0), 1.0 / (4.0 * pi * pi));
}

KernelValue tube_szego_derivative(const KernelQuery& query) {
    const int k = query.deriv_order_k;
    if (k < 0) throw InvalidArgument("tube_szego_derivative: k must be >= 0");
    const double xa = query.a.z.real();
    if (k == 0) {
        KernelValue k01 = tube_kernel_moment(query, 0, 1);
        KernelValue k10 = tube_kernel_moment(query, 1, 0);
        const double b1 = query.profile.deriv(1, xa);
        KernelValue out;
        out.value = (k01.value - b1 * k10.value) / (4.0 * pi * pi);
        out.error_estimate = (k01.error_estimate + std::abs(b1) * k10.error_estimate) / (4.0 * pi * pi);
        out.stats.inner_integrals = k01.stats.inner_integrals + k10.stats.inner_integrals;
        out.stats.profile_evaluations = k01.stats.profile_evaluations + k10.stats.profile_evaluations;
        out.stats.tau_nodes = k01.stats.tau_nodes + k10.stats.tau_nodes;
        return out;
    }
    const double bk = query.profile.deriv(k + 1, xa);
    if (bk == 0.0) return KernelValue{};
    return scaled(tube_kernel_moment(query, 1, 0), -bk / (std::ldexp(1.0, k + 2) * pi * pi));
}

KernelValue bergman_kernel(const KernelQuery& query) {
    return scaled(tube_kernel_moment(query, 1, 0), 1.0 / (2.0 * pi * pi));
}

LaplaceScales laplace_scales(const TubeProfile& tp, double eta, double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("laplace_scales: tau must be > 0");
    auto phi = [&](double th) { return 2.0 * (tau * tp.b(th) - eta * th); };
    const double theta0 = tp.slope_inverse(eta / tau);
    const LevelSet l = level_set_width(phi, theta0, 1.0);
    return {theta0, phi(theta0), l.width};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need >= 2 matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_slope: samples must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SharpnessReport sharpness_scan(const TubeProfile& tp, int k, int n_lo, int n_hi, double epsilon,
                               const QuadratureConfig& q) {
    if (k < 1) throw InvalidArgument("sharpness_scan: k must be >= 1");
    if (n_lo < 1 || n_hi < n_lo) throw InvalidArgument("sharpness_scan: need 1 <= n_lo <= n_hi");
    if (!(epsilon > 0.0)) throw InvalidArgument("sharpness_scan: epsilon must be > 0");
    const MetricContext ctx = make_tube_context(tp);
    const std::size_t count = static_cast<std::size_t>(n_hi - n_lo + 1);
    auto rows = parallel_map(count, [&](std::size_t i) {
        const int n = n_lo + static_cast<int>(i);
        KernelQuery kq{tp, {Complex(n, 0.0), 0.0}, {Complex(-n, 0.0), 0.0}, epsilon, k, 0.0, 0.0, q};
        SharpnessRow r{};
        r.n = n;
        r.value = tp.deriv(k + 1, n) * tube_kernel_moment(kq, 1, 0).value.real();
        r.gap = tp.b(n) + tp.b(-n) + epsilon;
        r.distance = cc_distance(ctx, kq.a, kq.b);
        r.ball = ball_volume(ctx, kq.a, r.distance);
        r.product = r.value * r.ball * r.distance * r.distance;
        return r;
    });
    SharpnessReport rep;
    rep.k = k;
    rep.epsilon = epsilon;
    rep.rows = rows;
    std::vector<double> v, g, ns;
    rep.min_product = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        v.push_back(r.value);
        g.push_back(r.gap);
        ns.push_back(r.n);
        rep.min_product = std::min(rep.min_product, r.product);
    }
    if (rows.size() >= 2) {
        rep.slope_gap = loglog_slope(g, v);
        rep.slope_n = loglog_slope(ns, v);
    }
    return rep;
}

std::vector<EnvelopePair> sample_envelope_pairs(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-1.5, 1.5), ut(-2.5, 2.5);
    std::vector<EnvelopePair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        EnvelopePair p;
        p.a.z = {ux(rng), ux(rng)};
        p.a.t = ut(rng);
        p.b.z = {ux(rng), ux(rng)};
        p.b.t = ut(rng);
        out.push_back(p);
    }
    return out;
}

EnvelopeReport growth_envelope(const TubeProfile& tp, const std::vector<EnvelopePair>& pairs, double epsilon,
                               double constant, const QuadratureConfig& q) {
    if (pairs.empty()) throw InvalidArgument("growth_envelope: no pairs");
    if (!(epsilon > 0.0)) throw InvalidArgument("growth_envelope: epsilon must be > 0");
    const MetricContext ctx = make_tube_context(tp);
    EnvelopeReport rep;
    rep.constant = constant;
    rep.ratios = parallel_map(pairs.size(), [&](std::size_t i) {
        const auto& pr = pairs[i];
        KernelQuery kq{tp, pr.a, pr.b, epsilon, 0, 0.0, 0.0, q};
        const double s = std::abs(tube_szego_kernel(kq).value);
        const double d = cc_distance(ctx, pr.a, pr.b, TwistChoice::exact_line(), epsilon);
        return s * ball_volume(ctx, pr.a, d);
    });
    for (std::size_t i = 0; i < rep.ratios.size(); ++i)
        if (rep.ratios[i] > rep.max_ratio) {
            rep.max_ratio = rep.ratios[i];
            rep.argmax = i;
        }
    rep.pass = std::isfinite(rep.max_ratio) && rep.max_ratio < constant;
    return rep;
}

}  // namespace szego
