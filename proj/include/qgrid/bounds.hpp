#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qgrid {

/// Open cost interval (a, b).
class BoundInterval {
public:
    BoundInterval(double a, double b) : a_(a), b_(b) {
        if (std::isnan(a) || std::isnan(b) || !(a < b))
            throw std::invalid_argument("bound interval needs a < b, got (" + std::to_string(a) + ", " +
                                        std::to_string(b) + ")");
    }

    double lower() const noexcept { return a_; }
    double upper() const noexcept { return b_; }
    double width() const noexcept { return b_ - a_; }
    double midpoint() const noexcept { return 0.5 * (a_ + b_); }

    /// Strict on both sides.
    bool contains(double cost) const noexcept { return a_ < cost && cost < b_; }
    /// Membership in [a, b].
    bool closure_contains(double cost) const noexcept { return a_ <= cost && cost <= b_; }

    friend bool operator==(const BoundInterval&, const BoundInterval&) = default;

private:
    double a_;
    double b_;
};

}  // namespace qgrid
