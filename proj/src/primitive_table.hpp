#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace szego::detail {

// First and second primitives of a smooth g on [lo, hi], anchored at `origin`
// (F(origin) = G(origin) = 0), stored on a uniform grid and evaluated by cubic
// Hermite interpolation with the exact slopes F' = g, G' = F.
class PrimitiveTable {
public:
    PrimitiveTable(std::function<double(double)> g, double lo, double hi, int intervals, double origin)
        : g_(std::move(g)), lo_(lo), h_((hi - lo) / intervals), f_(intervals + 1), gg_(intervals + 1), gn_(intervals + 1) {
        const int k0 = static_cast<int>(std::lround((origin - lo) / h_));
        if (std::abs(lo + k0 * h_ - origin) > 1e-12 * (hi - lo))
            throw std::logic_error("PrimitiveTable: origin must be a grid node");
        using gauss = boost::math::quadrature::gauss<double, 20>;
        for (int i = 0; i <= intervals; ++i) gn_[i] = g_(lo + i * h_);
        std::vector<double> d1(intervals), d2(intervals);
        for (int i = 0; i < intervals; ++i) {
            const double a = lo + i * h_;
            const double b = a + h_;
            d1[i] = gauss::integrate(g_, a, b);
            d2[i] = gauss::integrate([&](double s) { return (b - s) * g_(s); }, a, b);
        }
        f_[k0] = 0.0;
        for (int i = k0; i < intervals; ++i) f_[i + 1] = f_[i] + d1[i];
        for (int i = k0 - 1; i >= 0; --i) f_[i] = f_[i + 1] - d1[i];
        gg_[k0] = 0.0;
        for (int i = k0; i < intervals; ++i) gg_[i + 1] = gg_[i] + h_ * f_[i] + d2[i];
        for (int i = k0 - 1; i >= 0; --i) gg_[i] = gg_[i + 1] - (h_ * f_[i] + d2[i]);
    }

    double first(double x) const {
        const auto [i, t] = locate(x);
        return hermite(f_[i], f_[i + 1], gn_[i], gn_[i + 1], t);
    }

    double second(double x) const {
        const auto [i, t] = locate(x);
        return hermite(gg_[i], gg_[i + 1], f_[i], f_[i + 1], t);
    }

private:
    std::pair<int, double> locate(double x) const {
        const int n = static_cast<int>(f_.size()) - 1;
        double s = (x - lo_) / h_;
        int i = static_cast<int>(std::floor(s));
        if (i < 0) i = 0;
        if (i > n - 1) i = n - 1;
        return {i, s - i};
    }

    double hermite(double y0, double y1, double d0, double d1, double t) const {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h_ * d0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * h_ * d1;
    }

    std::function<double(double)> g_;
    double lo_;
    double h_;
    std::vector<double> f_;
    std::vector<double> gg_;
    std::vector<double> gn_;
};

}  // namespace szego::detail
