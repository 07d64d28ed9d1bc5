#pragma once

#include "szego/domain.hpp"

#include <vector>

namespace szego {

// P^{sigma,kappa}(z) = P(z + sigma) - P(sigma) - 2 Re(P_z(sigma) z)
//                      - 2 Re(sum_{j=2}^{kappa} d^j P(sigma) z^j / j!).
class NormalizedPotential {
public:
    NormalizedPotential(Potential base, Complex sigma, int kappa);

    double eval(Complex z) const;
    Complex grad_z(Complex z) const;
    Complex holo_deriv(int j, Complex z) const;

    const Potential& base() const { return base_; }
    Complex center() const { return sigma_; }
    int order() const { return kappa_; }
    // d^j P(sigma) for j = 1..kappa (index j - 1).
    const std::vector<Complex>& taylor_coefficients() const { return coeffs_; }
    // The normalized potential as a plain Potential with weight z -> h(z + sigma).
    Potential as_potential() const;

private:
    Potential base_;
    Complex sigma_;
    int kappa_;
    double p_sigma_;
    std::vector<Complex> coeffs_;
};

NormalizedPotential normalize_potential(const Potential& p, Complex sigma, int kappa);

// T(z, w) = -2 Im( int_0^1 (z - w) P_z(w + (z - w) r) dr ).
double twist_T(const Potential& p, Complex z, Complex w, const QuadratureConfig& q = {});

// T_kappa(zeta, sigma) = -2 Im( sum_{j=1}^{kappa} d^j P(sigma) (zeta - sigma)^j / j! ).
// Callers work with potentials already in P^{0,2} normal form.
double twist_Tkappa(const Potential& p, Complex zeta, Complex sigma, int kappa);

}  // namespace szego
