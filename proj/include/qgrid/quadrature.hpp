#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qgrid {

/// Gauss-Legendre rule on [-1, 1]. All nodes are strictly interior.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t order) {
        if (order == 0 || order > 64) throw std::invalid_argument("Gauss-Legendre order must be in [1, 64]");
        nodes.resize(order);
        weights.resize(order);
        const double n = static_cast<double>(order);
        for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
            // Newton on P_n from the Chebyshev-like initial guess.
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= order; ++k) {
                    const double kd = static_cast<double>(k);
                    const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
    }

    /// Composite rule over `panels` equal panels of [lo, hi].
    template <typename F>
    double integrate(F&& f, double lo, double hi, std::size_t panels) const {
        const double h = (hi - lo) / static_cast<double>(panels);
        double total = 0.0;
        for (std::size_t p = 0; p < panels; ++p) {
            const double mid = lo + (static_cast<double>(p) + 0.5) * h;
            double panel = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) panel += weights[i] * f(mid + 0.5 * h * nodes[i]);
            total += 0.5 * h * panel;
        }
        return total;
    }
};

}  // namespace qgrid
