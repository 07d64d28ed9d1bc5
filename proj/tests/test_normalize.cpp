#include "doctest.h"

#include "szego/domain.hpp"
#include "szego/errors.hpp"
#include "szego/normalize.hpp"

#include <cmath>
#include <random>

using namespace szego;

TEST_CASE("normalized Heisenberg potential") {
    auto [w, p] = make_heisenberg();
    for (Complex sigma : {Complex(0.0), Complex(1.0, 1.0)}) {
        NormalizedPotential np = normalize_potential(p, sigma, 2);
        for (Complex z : {Complex(0.5, -1.0), Complex(2.0, 3.0), Complex(-1.5, 0.25)}) {
            CHECK(np.eval(z) == doctest::Approx(std::norm(z)).epsilon(1e-12));
            CHECK(std::abs(np.grad_z(z) - std::conj(z)) <= 1e-12);
        }
        CHECK(np.eval(0.0) == 0.0);
        CHECK(std::abs(np.holo_deriv(2, 0.0)) <= 1e-6);
    }
    CHECK_THROWS_AS(normalize_potential(p, 0.0, 1), InvalidArgument);
}

TEST_CASE("normalization invariants on non-trivial potentials") {
    std::vector<Potential> ps{make_sharpness_tube().potential(), make_parabolic_tube().potential()};
    // P = Re(e^z) + |z|^4 with no analytic holomorphic derivatives.
    Weight quartic("quartic", [](Complex z) { return 16.0 * std::norm(z); });
    ps.emplace_back(
        "exp-quartic", [](Complex z) { return std::exp(z).real() + std::norm(z) * std::norm(z); },
        [](Complex z) { return 0.5 * std::exp(z) + 2.0 * z * std::norm(z); }, Potential::HoloDeriv{}, quartic);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const auto& p : ps) {
        for (Complex sigma : {Complex(0.3, -0.2), Complex(1.7, 0.9)}) {
            for (int kappa : {2, 3, 4}) {
                NormalizedPotential np = normalize_potential(p, sigma, kappa);
                CHECK(std::abs(np.eval(0.0)) <= 1e-12);
                CHECK(std::abs(np.grad_z(0.0)) <= 1e-12);
                for (int j = 2; j <= kappa; ++j) CHECK(std::abs(np.holo_deriv(j, 0.0)) <= 1e-6);
                const Complex z(u(rng), u(rng));
                const double lap = fd_laplacian([&](Complex x) { return np.eval(x); }, z, 1e-3);
                const double h = p.weight().eval(z + sigma);
                CHECK(std::abs(lap - h) <= 1e-4 * (1.0 + h));
                CHECK(np.as_potential().weight().eval(z) == doctest::Approx(h));
            }
        }
    }
}

TEST_CASE("normalization is idempotent at the origin") {
    for (const Potential& p : {make_sharpness_tube().potential(), make_heisenberg().second}) {
        NormalizedPotential once = normalize_potential(p, {0.4, 0.6}, 3);
        NormalizedPotential twice = normalize_potential(once.as_potential(), 0.0, 3);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < 20; ++i) {
            const Complex z(u(rng), u(rng));
            CHECK(std::abs(twice.eval(z) - once.eval(z)) < 1e-10);
        }
    }
}

TEST_CASE("twist T") {
    auto [w, p] = make_heisenberg();
    CHECK(twist_T(p, {1.0, 1.0}, 2.0) == doctest::Approx(-4.0).epsilon(1e-13));
    CHECK(twist_T(p, {0.3, 0.7}, {0.3, 0.7}) == 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Complex z(u(rng), u(rng)), x(u(rng), u(rng));
        const double t = twist_T(p, z, x);
        CHECK(t == doctest::Approx(-twist_T(p, x, z)).epsilon(1e-12));
        CHECK(t == doctest::Approx(-2.0 * (z * std::conj(x)).imag()).epsilon(1e-12));
    }
    Potential tube = make_sharpness_tube().potential();
    CHECK(std::abs(twist_T(tube, 1.3, -2.7)) <= 1e-14);
    // Tube: T(z, w) = -2 Im((z - w) int b'(Re(...)) / 2 dr); compare with b(x_z) - b(x_w).
    const TubeProfile tp = make_sharpness_tube();
    const Complex z(1.3, 0.4), x(-0.8, 1.1);
    const double expect = -(z - x).imag() * (tp.b(z.real()) - tp.b(x.real())) / (z - x).real();
    CHECK(twist_T(tube, z, x) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("twist T_kappa") {
    auto [w, p] = make_heisenberg();
    CHECK(twist_Tkappa(p, {1.0, 1.0}, 2.0, 1) == doctest::Approx(-4.0).epsilon(1e-14));
    CHECK(twist_Tkappa(p, {1.0, 1.0}, 2.0, 2) == doctest::Approx(-4.0).epsilon(1e-14));
    CHECK(twist_Tkappa(p, {0.5, 0.5}, {0.5, 0.5}, 3) == 0.0);
    // Heisenberg twists agree exactly: the potential has no holomorphic part beyond order 1.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        const Complex z(u(rng), u(rng)), x(u(rng), u(rng));
        CHECK(twist_Tkappa(p, z, x, 2) == doctest::Approx(twist_T(p, z, x)).epsilon(1e-12));
    }
}
