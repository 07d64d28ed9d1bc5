#include "szego/normalize.hpp"

#include "szego/errors.hpp"

#include <cmath>

namespace szego {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

NormalizedPotential::NormalizedPotential(Potential base, Complex sigma, int kappa)
    : base_(std::move(base)), sigma_(sigma), kappa_(kappa) {
    if (kappa < 2) throw InvalidArgument("normalize_potential: kappa must be >= 2");
    p_sigma_ = base_.eval(sigma);
    for (int j = 1; j <= kappa; ++j) coeffs_.push_back(base_.holo_deriv(j, sigma));
}

double NormalizedPotential::eval(Complex z) const {
    Complex poly = 0.0, zj = 1.0;
    for (int j = 1; j <= kappa_; ++j) {
        zj *= z;
        poly += coeffs_[j - 1] * zj / factorial(j);
    }
    return base_.eval(z + sigma_) - p_sigma_ - 2.0 * poly.real();
}

Complex NormalizedPotential::grad_z(Complex z) const { return holo_deriv(1, z); }

Complex NormalizedPotential::holo_deriv(int j, Complex z) const {
    if (j < 1) throw InvalidArgument("holo_deriv: order must be >= 1");
    Complex v = base_.holo_deriv(j, z + sigma_);
    for (int i = j; i <= kappa_; ++i) v -= coeffs_[i - 1] * std::pow(z, i - j) / factorial(i - j);
    return v;
}

Potential NormalizedPotential::as_potential() const {
    NormalizedPotential self = *this;
    Potential::HoloDeriv holo;
    if (base_.has_analytic_holo()) holo = [self](int j, Complex z) { return self.holo_deriv(j, z); };
    return Potential(
        base_.name() + "-normalized", [self](Complex z) { return self.eval(z); },
        [self](Complex z) { return self.grad_z(z); }, holo, base_.weight().shifted(sigma_));
}

NormalizedPotential normalize_potential(const Potential& p, Complex sigma, int kappa) {
    return NormalizedPotential(p, sigma, kappa);
}

double twist_T(const Potential& p, Complex z, Complex w, const QuadratureConfig& q) {
    if (z == w) return 0.0;
    const Complex d = z - w;
    auto f = [&](double r) { return -2.0 * (d * p.grad_z(w + d * r)).imag(); };
    return integrate_1d_strict(f, {0.0, 1.0}, q).value;
}

double twist_Tkappa(const Potential& p, Complex zeta, Complex sigma, int kappa) {
    if (kappa < 1) throw InvalidArgument("twist_Tkappa: kappa must be >= 1");
    if (zeta == sigma) return 0.0;
    Complex sum = 0.0, dj = 1.0;
    const Complex d = zeta - sigma;
    for (int j = 1; j <= kappa; ++j) {
        dj *= d;
        sum += p.holo_deriv(j, sigma) * dj / factorial(j);
    }
    return -2.0 * sum.imag();
}

}  // namespace szego
