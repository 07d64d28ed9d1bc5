#include "doctest.h"

#include "szego/errors.hpp"
#include "szego/szego.hpp"

#include <cmath>
#include <numbers>

using namespace szego;
using std::numbers::pi;

namespace {

// b = x^2/2 + (1 - cos x)/10: even, 0.9 <= b'' <= 1.1.
TubeProfile wiggly_tube() {
    return TubeProfile(
        "wiggly",
        [](int k, double x) {
            switch (k) {
                case 0: return 0.5 * x * x + 0.1 * (1.0 - std::cos(x));
                case 1: return x + 0.1 * std::sin(x);
                case 2: return 1.0 + 0.1 * std::cos(x);
                default: return -0.1 * std::sin(x);
            }
        },
        3, 0.9, 1.1);
}

// Closed form on the parabolic tube with w lifted by `lift` above the boundary.
Complex parabolic_szego(const BoundaryPoint& a, const BoundaryPoint& b, double eps, double lift = 0.0) {
    const Complex dz = a.z - b.z;
    const double twist = -(a.z.imag() - b.z.imag()) * (a.z.real() + b.z.real()) / 2.0;
    const Complex q = std::norm(dz) / 4.0 + eps + lift - Complex(0.0, 1.0) * (a.t - b.t - twist);
    return 1.0 / (4.0 * pi * pi * q * q);
}

double brute_inner(const TubeProfile& tp, double eta, double tau) {
    QuadratureConfig c{1e-300, 1e-12, 40, 40.0, 4000};
    return integrate_1d([&](double th) { return std::exp(2.0 * (eta * th - tau * tp.b(th))); },
                        {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}, c)
        .value;
}

}  // namespace

TEST_CASE("inner weight integral") {
    TubeProfile par = make_parabolic_tube();
    CHECK(inner_weight_integral(par, 0.0, 1.0) == doctest::Approx(std::sqrt(pi)).epsilon(1e-9));
    CHECK(inner_weight_integral(par, 2.0, 1.0) == doctest::Approx(std::sqrt(pi) * std::exp(4.0)).epsilon(1e-3));
    CHECK(log_inner_weight_integral(par, 30.0, 0.5) ==
          doctest::Approx(0.5 * std::log(pi / 0.5) + 900.0 / 0.5).epsilon(1e-12));
    TubeProfile w = wiggly_tube();
    for (double tau : {0.05, 1.0, 20.0})
        for (double eta : {0.0, 0.7, 3.0}) {
            CHECK(inner_weight_integral(w, -eta, tau) == doctest::Approx(inner_weight_integral(w, eta, tau)).epsilon(1e-9));
            CHECK(inner_weight_integral(w, eta, tau) == doctest::Approx(brute_inner(w, eta, tau)).epsilon(1e-8));
        }
    TubeProfile st = make_sharpness_tube();
    CHECK(inner_weight_integral(st, 1.3, 2.0) == doctest::Approx(brute_inner(st, 1.3, 2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(inner_weight_integral(par, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("parabolic Szego kernel against the closed form") {
    TubeProfile par = make_parabolic_tube();
    for (double x : {0.0, 3.0})
        for (double eps : {0.5, 1.0, 2.0}) {
            const BoundaryPoint p{{x, -0.4}, 1.5};
            const auto v = tube_szego_kernel({par, p, p, eps});
            CHECK(v.value.real() == doctest::Approx(1.0 / (4.0 * pi * pi * eps * eps)).epsilon(1e-6));
            CHECK(std::abs(v.value.imag()) <= 1e-12);
            CHECK(v.error_estimate >= 0.0);
        }
    const BoundaryPoint pts[] = {{{0.3, 0.2}, 0.0}, {{-1.0, 0.5}, 1.2}, {{1.4, -0.7}, -2.0}, {{0.0, 0.0}, 4.0}};
    for (const auto& a : pts)
        for (const auto& b : pts) {
            const Complex expect = parabolic_szego(a, b, 0.7);
            const Complex got = tube_szego_kernel({par, a, b, 0.7}).value;
            CHECK(std::abs(got - expect) <= 1e-6 * std::abs(expect));
        }
    CHECK_THROWS_AS(tube_szego_kernel({par, pts[0], pts[1], 0.0}), InvalidArgument);
    CHECK_THROWS_AS(tube_szego_kernel({par, pts[0], pts[1], 0.5, 0, -0.3, -0.3}), DivergenceError);
}

TEST_CASE("general tube kernel: symmetry, positivity, monotonicity") {
    TubeProfile w = wiggly_tube();
    const BoundaryPoint a{{0.4, 0.3}, 0.2}, b{{-0.5, -0.1}, -0.4};
    const Complex ab = tube_szego_kernel({w, a, b, 0.5}).value, ba = tube_szego_kernel({w, b, a, 0.5}).value;
    CHECK(std::abs(ab - std::conj(ba)) <= 1e-6 * std::abs(ab));
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.25, 0.5, 1.0, 2.0}) {
        const Complex d = tube_szego_kernel({w, a, a, eps}).value;
        CHECK(d.real() > 0.0);
        CHECK(std::abs(d.imag()) <= 1e-8 * d.real());
        CHECK(d.real() < prev);
        prev = d.real();
    }
}

TEST_CASE("Bergman kernel") {
    TubeProfile par = make_parabolic_tube();
    const BoundaryPoint p{{0.5, 0.1}, 0.0};
    for (double eps : {1.0, 2.0})
        CHECK(bergman_kernel({par, p, p, eps}).value.real() == doctest::Approx(1.0 / (pi * pi * eps * eps * eps)).epsilon(1e-6));
    // 2i d/d conj(w2) = -2 d/d Im(w2) on functions of conj(w2).
    const BoundaryPoint a{{0.3, 0.2}, 0.4}, b{{-0.6, 0.5}, -0.3};
    const double h = 1e-3;
    KernelQuery up{par, a, b, 0.8, 0, 0.0, h}, down{par, a, b, 0.8, 0, 0.0, -h};
    const Complex fd = -2.0 * (tube_szego_kernel(up).value - tube_szego_kernel(down).value) / (2.0 * h);
    const Complex bk = bergman_kernel({par, a, b, 0.8}).value;
    CHECK(std::abs(bk - fd) <= 5e-3 * std::abs(bk));
    CHECK(std::abs(bk - fd) <= 1e-5 * std::abs(bk));
}

TEST_CASE("tangential derivatives") {
    TubeProfile par = make_parabolic_tube();
    const BoundaryPoint p{{0.5, 0.1}, 0.0};
    for (int k : {2, 3, 5}) CHECK(tube_szego_derivative({par, p, p, 1.0, k}).value == Complex(0.0));
    // k = 1 on the diagonal: -b''/(8 pi^2) * 2 / eps^3.
    CHECK(tube_szego_derivative({par, p, p, 0.5, 1}).value.real() ==
          doctest::Approx(-1.0 / (4.0 * pi * pi * 0.125)).epsilon(1e-6));
    // k = 0 against finite differences of Z = d/dz + i P_z d/dt with P_z = x / 2.
    const BoundaryPoint a{{0.3, 0.2}, 0.4}, b{{-0.6, 0.5}, -0.3};
    const double h = 1e-3, eps = 0.8;
    auto S = [&](double dx, double dy, double dt) {
        return tube_szego_kernel({par, {a.z + Complex(dx, dy), a.t + dt}, b, eps}).value;
    };
    const Complex sx = (S(h, 0, 0) - S(-h, 0, 0)) / (2 * h), sy = (S(0, h, 0) - S(0, -h, 0)) / (2 * h),
                  st = (S(0, 0, h) - S(0, 0, -h)) / (2 * h);
    const Complex fd = 0.5 * (sx - Complex(0, 1) * sy) + Complex(0, 1) * (a.z.real() / 2.0) * st;
    const Complex zs = tube_szego_derivative({par, a, b, eps, 0}).value;
    CHECK(std::abs(zs - fd) <= 1e-2 * std::abs(zs));
    // Z-bar annihilates the kernel in the first variable.
    const Complex zbar = 0.5 * (sx + Complex(0, 1) * sy) - Complex(0, 1) * (a.z.real() / 2.0) * st;
    CHECK(std::abs(zbar) <= 1e-5 * std::abs(zs));
}

TEST_CASE("sharpness value against a brute-force triple integral") {
    TubeProfile st = make_sharpness_tube();
    const double eps = 0.01;
    const int n = 1;
    const double gap = st.b(n) + st.b(-n) + eps;
    QuadratureConfig c{1e-300, 1e-7, 40, 40.0, 4000};
    auto eta_int = [&](double tau) {
        const double w = 12.0 * std::sqrt(tau * std::exp(0.5));
        return integrate_1d([&](double eta) { return 1.0 / brute_inner(st, eta, tau); }, {-w, w}, c).value;
    };
    const double oracle =
        integrate_1d([&](double tau) { return tau * std::exp(-tau * gap) * eta_int(tau); }, {0.0, 60.0 / gap}, c).value;
    KernelQuery kq{st, {Complex(n, 0.0), 0.0}, {Complex(-n, 0.0), 0.0}, eps, 1};
    const double derivative = tube_szego_derivative(kq).value.real();
    CHECK(-8.0 * pi * pi * derivative / st.deriv(2, n) == doctest::Approx(oracle).epsilon(1e-5));
    const auto rep = sharpness_scan(st, 1, 1, 2, eps);
    CHECK(rep.rows[0].value == doctest::Approx(oracle).epsilon(1e-5));
    CHECK(rep.rows[0].gap == doctest::Approx(gap));
    CHECK(rep.rows[1].distance == doctest::Approx(4.0));
    CHECK_THROWS_AS(sharpness_scan(st, 0, 1, 2, eps), InvalidArgument);
}

TEST_CASE("convex-Laplace scales") {
    TubeProfile par = make_parabolic_tube();
    const auto s = laplace_scales(par, 3.0, 2.0);
    CHECK(s.theta0 == doctest::Approx(1.5));
    CHECK(s.phi_min == doctest::Approx(-4.5));
    CHECK(s.level_width == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-8));
    TubeProfile st = make_sharpness_tube();
    for (double tau : {0.1, 1.0, 100.0}) {
        const auto l = laplace_scales(st, 1.7, tau);
        CHECK(l.level_width * std::sqrt(tau) > 2.0 * std::exp(-0.25));
        CHECK(l.level_width * std::sqrt(tau) < 2.0 * std::exp(0.25));
        // The truncated quadrature agrees with the surrogate up to the proposition's constants.
        const double ratio = inner_weight_integral(st, 1.7, tau) / (l.level_width * std::exp(-l.phi_min));
        CHECK(ratio > 0.5);
        CHECK(ratio < 2.0);
    }
}

TEST_CASE("growth envelope on the parabolic tube") {
    TubeProfile par = make_parabolic_tube();
    const auto pairs = sample_envelope_pairs(12, 42);
    CHECK(sample_envelope_pairs(12, 42)[7].b.t == pairs[7].b.t);
    const double eps = 0.5;
    const auto rep = growth_envelope(par, pairs, eps);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        CHECK(std::abs(p.a.z.real() - p.b.z.real()) <= 3.0);
        CHECK(std::abs(p.a.t - p.b.t) <= 5.0);
        const double twist = -(p.a.z.imag() - p.b.z.imag()) * (p.a.z.real() + p.b.z.real()) / 2.0;
        const double d = std::abs(p.a.z - p.b.z) + std::sqrt((std::abs(p.a.t - p.b.t - twist) + eps) / pi);
        CHECK(rep.ratios[i] == doctest::Approx(std::abs(parabolic_szego(p.a, p.b, eps)) * pi * std::pow(d, 4)).epsilon(1e-6));
    }
    CHECK(rep.pass);
    // Diagonal: S_eps(z,z) |B(z, mu(z, eps))| = 1 / (4 pi^3).
    const BoundaryPoint z{{0.2, 0.3}, 0.0};
    CHECK(growth_envelope(par, {{z, z}}, eps).max_ratio == doctest::Approx(1.0 / (4.0 * pi * pi * pi)).epsilon(1e-6));
    // Simultaneous real translation.
    std::vector<EnvelopePair> shifted;
    for (auto p : std::vector<EnvelopePair>(pairs.begin(), pairs.begin() + 3)) {
        p.a.z += 2.0;
        p.b.z += 2.0;
        const double c = 2.0;
        // P_z = x / 2: the twist changes by -(y_a - y_b) c; shift t_a accordingly.
        p.a.t += -(p.a.z.imag() - p.b.z.imag()) * c;
        shifted.push_back(p);
    }
    const auto rs = growth_envelope(par, shifted, eps);
    for (int i = 0; i < 3; ++i) CHECK(rs.ratios[i] == doctest::Approx(rep.ratios[i]).epsilon(1e-6));
}
