#include "doctest.h"

#include "szego/domain.hpp"
#include "szego/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace szego;
using std::numbers::pi;

namespace {

// b(x) = int_0^x (x - s) b''(s) ds, integrated piecewise between half-integers.
double profile_by_double_integration(const TubeProfile& tp, double x) {
    QuadratureConfig cfg;
    std::vector<double> br;
    for (double h = -0.5; h < std::abs(x) + 1.0; h += 1.0) {
        br.push_back(h);
        br.push_back(-h);
    }
    auto r = integrate_1d([&](double s) { return (x - s) * tp.deriv(2, s); }, {0.0, x}, cfg, br);
    return r.value;
}

}  // namespace

TEST_CASE("Heisenberg weight and potential") {
    auto [w, p] = make_heisenberg();
    CHECK(w.eval({1.0, 1.0}) == 4.0);
    CHECK(p.eval(0.0) == 0.0);
    CHECK(p.grad_z({1.5, -2.0}) == Complex(1.5, 2.0));
    const double lap = fd_laplacian([&](Complex z) { return p.eval(z); }, {0.3, 0.2}, 1e-3);
    CHECK(std::abs(lap - 4.0) <= 1e-6);
    CHECK(w.partial(0, 0, {2.0, 1.0}) == Complex(4.0));
    CHECK(w.partial(1, 1, {2.0, 1.0}) == Complex(0.0));
}

TEST_CASE("parabolic tube") {
    TubeProfile tp = make_parabolic_tube();
    CHECK(tp.b(2.0) == 2.0);
    CHECK(tp.deriv(2, 17.3) == 1.0);
    CHECK(tp.deriv(3, -4.0) == 0.0);
    CHECK(tp.convexity_bounds() == std::pair{1.0, 1.0});
    CHECK(tp.slope_inverse(2.5) == doctest::Approx(2.5).epsilon(1e-15));
    Potential p = tp.potential();
    CHECK(p.holo_deriv(2, {1.0, 3.0}) == Complex(0.25));
}

TEST_CASE("sharpness tube profile") {
    TubeProfile tp = make_sharpness_tube();
    const auto [a, A] = tp.convexity_bounds();
    CHECK(a == doctest::Approx(std::exp(-0.5)));
    CHECK(A == doctest::Approx(std::exp(0.5)));
    CHECK(tp.b(0.0) == 0.0);
    CHECK(tp.deriv(1, 0.0) == 0.0);
    for (int n = -4; n <= 4; ++n) {
        CHECK(tp.deriv(2, n) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(tp.deriv(2, n + 0.1) - std::exp(0.1)) <= 1e-10);
        CHECK(std::abs(tp.deriv(3, n + 0.1) - std::exp(0.1)) <= 1e-10);
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-20.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        const double x = ux(rng);
        const double h2 = tp.deriv(2, x);
        CHECK(h2 >= a);
        CHECK(h2 <= A);
        CHECK(std::abs(tp.deriv(2, x + 1.0) - h2) <= 1e-12);
    }
    const double b4 = tp.b(4.0);
    CHECK(b4 / 8.0 >= std::exp(-0.5));
    CHECK(b4 / 8.0 <= std::exp(0.5));
    for (double x : {4.0, -3.3, 0.7, 10.5, -10.5}) {
        CHECK(tp.b(x) == doctest::Approx(profile_by_double_integration(tp, x)).epsilon(1e-11));
        const double slope = integrate_1d([&](double s) { return tp.deriv(2, s); }, {0.0, x}, QuadratureConfig{},
                                          std::vector<double>{-9.5, -8.5, -7.5, -6.5, -5.5, -4.5, -3.5, -2.5, -1.5,
                                                              -0.5, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5, 9.5})
                                 .value;
        CHECK(tp.deriv(1, x) == doctest::Approx(slope).epsilon(1e-11));
    }
    // b is continuous across half-integers, where the table branch changes.
    CHECK(std::abs(tp.b(2.5 - 1e-12) - tp.b(2.5 + 1e-12)) <= 1e-10);
    CHECK(tp.slope_inverse(tp.deriv(1, 3.7)) == doctest::Approx(3.7).epsilon(1e-12));
    CHECK(tp.slope_inverse(tp.deriv(1, -2.2)) == doctest::Approx(-2.2).epsilon(1e-12));
    // Higher derivatives by finite differences of b'''.
    CHECK(tp.deriv(4, 2.1) == doctest::Approx(std::exp(0.1)).epsilon(1e-5));
}

TEST_CASE("smoothed polynomial example") {
    Weight q = make_quartic_laplacian();
    Weight h = make_smoothed_polynomial(q);
    CHECK(h.eval(std::sqrt(0.5)) == doctest::Approx(0.5));
    CHECK(h.eval(10.0) == 1.5);
    CHECK(smoothed_chi(2.0) == doctest::Approx(1.5).epsilon(1e-13));
    for (int i = 0; i <= 40; ++i)
        for (int k = 0; k <= 40; ++k) {
            const double v = h.eval({-2.0 + 0.1 * i, -2.0 + 0.1 * k});
            CHECK(v >= 0.0);
            CHECK(v <= 1.5);
        }
    for (Complex z : {Complex(0.9, 0.6), Complex(-1.1, 0.4), Complex(0.2, -0.3)}) {
        CHECK(std::abs(h.partial(1, 0, z) - h.fd_partial(1, 0, z)) <= 1e-6);
        CHECK(std::abs(h.partial(1, 1, z) - h.fd_partial(1, 1, z)) <= 1e-5);
        CHECK(std::abs(h.partial(2, 0, z) - h.fd_partial(2, 0, z)) <= 1e-5);
    }
}

TEST_CASE("weight partials: identities and conjugate symmetry") {
    std::vector<Weight> ws{make_sharpness_tube().weight(), make_h3_counterexample(),
                           make_polynomial_weight({{2, 0, 1.0}, {2, 2, 0.5}, {0, 4, 0.25}}),
                           make_smoothed_polynomial(make_quartic_laplacian())};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& w : ws) {
        for (int i = 0; i < 10; ++i) {
            const Complex z(u(rng), u(rng));
            CHECK(w.partial(0, 0, z) == Complex(w.eval(z)));
            CHECK(w.eval(z) >= 0.0);
            for (int n = 1; n <= 2; ++n)
                for (int a = 0; a <= n; ++a) {
                    const Complex lhs = w.partial(a, n - a, z), rhs = std::conj(w.partial(n - a, a, z));
                    CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs)));
                }
        }
    }
    Weight re2 = make_polynomial_weight({{2, 0, 1.0}});
    CHECK(std::abs(re2.partial(1, 1, 0.0) - 0.5) <= 1e-15);
    CHECK(std::abs(re2.partial(2, 0, 0.0) - 0.5) <= 1e-15);
    CHECK(std::abs(re2.fd_partial(1, 1, 0.3) - 0.5) <= 1e-6);
    CHECK_THROWS_AS(make_h3_counterexample().partial(3, 2, 0.5), CapabilityError);
}

TEST_CASE("cauchy holomorphic derivatives of a smooth potential") {
    // P = Re(e^z) + |z|^4: d/dz = e^z / 2 + 2 z zbar^2, d2 = e^z / 2 + 2 zbar^2, d3 = e^z / 2.
    auto val = [](Complex z) { return std::exp(z).real() + std::norm(z) * std::norm(z); };
    const Complex z0(0.7, -0.4);
    const Complex zb = std::conj(z0);
    const Complex expect[] = {0.5 * std::exp(z0) + 2.0 * z0 * zb * zb, 0.5 * std::exp(z0) + 2.0 * zb * zb,
                              0.5 * std::exp(z0)};
    for (int j = 1; j <= 3; ++j) CHECK(std::abs(cauchy_holo_deriv(val, j, z0) - expect[j - 1]) <= 1e-7);
    auto [w, heis] = make_heisenberg();
    CHECK(std::abs(cauchy_holo_deriv([&](Complex z) { return heis.eval(z); }, 1, {1.0, 2.0}) - Complex(1.0, -2.0)) <=
          1e-12);
    CHECK(std::abs(cauchy_holo_deriv([&](Complex z) { return heis.eval(z); }, 2, {1.0, 2.0})) <= 1e-10);
}

TEST_CASE("verify_uft basic verdicts") {
    auto [w, p] = make_heisenberg();
    UftGrid g = UftGrid::box(2.0, 3);
    g.h3_max_exponent = 6;
    UftReport r = verify_uft(w, 2, g);
    CHECK(r.h1_infimum == doctest::Approx(4.0));
    CHECK(r.verdicts.h1);
    CHECK(r.verdicts.h2);
    CHECK(r.verdicts.h3);
    CHECK(r.h3_supremum <= 1e-9);
    CHECK(r.h3_curve.size() == 7);

    Weight zero("zero", [](Complex) { return 0.0; }, [](int, int, Complex) { return Complex(0.0); }, 8, 8);
    UftReport rz = verify_uft(zero, 2, g);
    CHECK(rz.h1_infimum == 0.0);
    CHECK_FALSE(rz.verdicts.h1);

    UftGrid empty;
    CHECK_THROWS_AS(verify_uft(w, 2, empty), InvalidArgument);
    CHECK_THROWS_AS(verify_uft(make_h3_counterexample(), 8, g), CapabilityError);
    UftGrid few = g;
    few.directions = 16;
    CHECK_THROWS_AS(verify_uft(w, 2, few), InvalidArgument);
}

TEST_CASE("annulus integral of the counterexample grows like log r at the origin") {
    QuadratureConfig q{1e-10, 1e-8, 40, 40.0, 4000};
    auto curve = h3_annulus_curve(make_h3_counterexample(), 0.0, 8, 64, q);
    // Beyond r = 2 the increments are (int f(theta) e^{-2i theta}) * log 2 per octave.
    const double f_moment =
        integrate_1d([](double th) { return std::exp(1.0 - 1.0 / (1.0 - 1e4 * th * th)) * std::cos(2 * th); },
                     {-0.01 + 1e-15, 0.01 - 1e-15}, QuadratureConfig{})
            .value;
    for (int j = 3; j <= 8; ++j)
        CHECK(std::abs(curve[j] - curve[j - 1]) == doctest::Approx(f_moment * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("perturbation exponent fit for the smoothed polynomial") {
    Weight h = make_smoothed_polynomial(make_quartic_laplacian());
    QuadratureConfig q{1e-10, 1e-8, 40, 40.0, 4000};
    auto [B, C] = fit_perturbation_exponents(h, 1.5, {0.0, Complex(1.0, 0.5)}, {2.0, 4.0, 8.0, 16.0}, q);
    CHECK(C == doctest::Approx(2.0).epsilon(0.05));
    CHECK(B > 0.0);
}

TEST_CASE("constructed potential") {
    Weight zero("zero", [](Complex) { return 0.0; });
    Potential pz = build_potential(zero);
    CHECK(pz.eval({0.7, -1.2}) == 0.0);

    Weight four("four", [](Complex) { return 4.0; });
    Potential p4 = build_potential(four);
    auto v4 = [&](Complex z) { return p4.eval(z); };
    CHECK(std::abs(fd_laplacian(v4, {0.3, 0.2}, 1e-2) - 4.0) <= 1e-3);
    // For constant h the construction reproduces h |z|^2 / 4 exactly.
    CHECK(p4.eval({0.3, 0.2}) == doctest::Approx(0.13).epsilon(1e-9));
    CHECK(p4.eval({2.5, -1.0}) == doctest::Approx(7.25).epsilon(1e-9));

    Weight one("one", [](Complex) { return 1.0; });
    Potential p1 = build_potential(one);
    for (double r : {1.0, 2.5, 5.0}) {
        const Complex z = std::polar(r, 0.3);
        CHECK(2.0 * std::abs(p1.grad_z(z)) / r == doctest::Approx(0.5).epsilon(1e-6));
    }
}
