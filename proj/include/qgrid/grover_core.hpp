#pragma once

// Statevector simulation of one Grover register over n items (any n >= 1,
// not only powers of two) and the closed-form amplitude model it must agree
// with. Amplitudes are real: the phase-flip oracle and the inversion about
// the mean never leave the reals.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgrid/random.hpp"

namespace qgrid {

/// Componentwise agreement between simulated and closed-form amplitudes.
inline constexpr double kAmplitudeTolerance = 1e-10;
/// Exact identities (involutions, perfect rotations).
inline constexpr double kExactTolerance = 1e-12;

class SizeMismatch : public std::invalid_argument {
public:
    SizeMismatch(std::size_t a, std::size_t b)
        : std::invalid_argument("size mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

/// Simulated state of one search dimension.
class Register {
public:
    explicit Register(std::vector<double> amplitudes) : amp_(std::move(amplitudes)) {
        if (amp_.empty()) throw std::invalid_argument("register needs at least one amplitude");
    }

    std::size_t size() const noexcept { return amp_.size(); }
    std::span<const double> amplitudes() const noexcept { return amp_; }
    double operator[](std::size_t i) const { return amp_[i]; }

    double norm_squared() const {
        return std::inner_product(amp_.begin(), amp_.end(), amp_.begin(), 0.0);
    }

    std::vector<double>& mutable_amplitudes() noexcept { return amp_; }

private:
    std::vector<double> amp_;
};

/// The marked subset of a bucket {0, ..., n-1}. Stored as a membership mask
/// plus the sorted index list.
class MarkedSet {
public:
    MarkedSet(std::size_t n, std::vector<std::size_t> marked) : mask_(n, false) {
        if (n == 0) throw std::invalid_argument("marked set over an empty bucket");
        for (std::size_t x : marked) {
            if (x >= n) throw std::out_of_range("marked index " + std::to_string(x) + " >= " + std::to_string(n));
            mask_[x] = true;
        }
        for (std::size_t x = 0; x < n; ++x)
            if (mask_[x]) indices_.push_back(x);
    }

    static MarkedSet none(std::size_t n) { return MarkedSet(n, {}); }
    static MarkedSet all(std::size_t n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return MarkedSet(n, std::move(idx));
    }

    std::size_t size() const noexcept { return mask_.size(); }
    std::size_t count() const noexcept { return indices_.size(); }
    bool contains(std::size_t x) const { return x < mask_.size() && mask_[x]; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    friend bool operator==(const MarkedSet& a, const MarkedSet& b) { return a.mask_ == b.mask_; }

private:
    std::vector<bool> mask_;
    std::vector<std::size_t> indices_;
};

/// Rotation angle theta = asin(sqrt(M/N)) of a bucket with M of N marked.
struct AngleModel {
    double theta = 0.0;

    static AngleModel from_counts(std::size_t n, std::size_t marked) {
        if (n == 0 || marked > n) throw std::invalid_argument("angle model needs 0 <= M <= N, N > 0");
        return {std::asin(std::sqrt(static_cast<double>(marked) / static_cast<double>(n)))};
    }
};

inline Register uniform_init(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_init: n must be positive");
    return Register(std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))));
}

inline Register apply_oracle(Register r, const MarkedSet& m) {
    if (m.size() != r.size()) throw SizeMismatch(r.size(), m.size());
    auto& a = r.mutable_amplitudes();
    for (std::size_t x : m.indices()) a[x] = -a[x];
    return r;
}

/// a[k] -> 2 * mean(a) - a[k].
inline Register invert_about_mean(Register r) {
    auto& a = r.mutable_amplitudes();
    const double twice_mean = 2.0 * std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    for (double& v : a) v = twice_mean - v;
    return r;
}

/// Applies the Grover operator (oracle, then inversion about the mean) j times.
inline Register grover_iterate(Register r, const MarkedSet& m, std::size_t j) {
    if (m.size() != r.size()) throw SizeMismatch(r.size(), m.size());
    for (std::size_t step = 0; step < j; ++step) r = invert_about_mean(apply_oracle(std::move(r), m));
    return r;
}

struct ClassAmplitudes {
    double marked;
    double unmarked;
};

/// Per-item amplitudes after j Grover iterations from the uniform state:
/// (sin((2j+1)theta)/sqrt(M), cos((2j+1)theta)/sqrt(n-M)).
/// Undefined for M = 0 or M = n; those cases must use the statevector path.
inline ClassAmplitudes analytic_amplitudes(std::size_t n, std::size_t marked, std::size_t j) {
    if (marked == 0 || marked >= n)
        throw std::domain_error("analytic_amplitudes: degenerate bucket (M = " + std::to_string(marked) +
                                ", n = " + std::to_string(n) + ")");
    const double theta = AngleModel::from_counts(n, marked).theta;
    const double angle = static_cast<double>(2 * j + 1) * theta;
    return {std::sin(angle) / std::sqrt(static_cast<double>(marked)),
            std::cos(angle) / std::sqrt(static_cast<double>(n - marked))};
}

inline double success_probability(const Register& r, const MarkedSet& m) {
    if (m.size() != r.size()) throw SizeMismatch(r.size(), m.size());
    double p = 0.0;
    for (std::size_t x : m.indices()) p += r[x] * r[x];
    return p;
}

/// Samples index x with probability r[x]^2. The register is left untouched.
inline std::size_t measure(const Register& r, Rng& rng) {
    const double total = r.norm_squared();
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::optional<std::size_t> last_nonzero;
    for (std::size_t x = 0; x < r.size(); ++x) {
        const double p = r[x] * r[x];
        if (p == 0.0) continue;
        acc += p;
        last_nonzero = x;
        if (u < acc) return x;
    }
    // Rounding can leave u just above the final partial sum.
    return last_nonzero.value_or(0);
}

}  // namespace qgrid
