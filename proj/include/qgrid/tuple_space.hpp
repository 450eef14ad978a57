#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace qgrid {

/// One index per bucket / grid column.
using Tuple = std::vector<std::size_t>;

/// Default ceiling on exhaustive enumeration.
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

class CapExceeded : public std::runtime_error {
public:
    CapExceeded(std::uint64_t needed, std::uint64_t cap)
        : std::runtime_error("enumeration of " + std::to_string(needed) +
                             " tuples exceeds cap " + std::to_string(cap)) {}
};

/// Product of the sizes, saturating at UINT64_MAX.
inline std::uint64_t tuple_count(std::span<const std::size_t> shape) {
    std::uint64_t total = 1;
    for (std::size_t n : shape) {
        if (n == 0) return 0;
        if (total > std::numeric_limits<std::uint64_t>::max() / n)
            return std::numeric_limits<std::uint64_t>::max();
        total *= n;
    }
    return total;
}

inline void check_cap(std::span<const std::size_t> shape, std::uint64_t cap) {
    const auto count = tuple_count(shape);
    if (count > cap) throw CapExceeded(count, cap);
}

/// Row-major (last index fastest) flat position of `t`.
inline std::uint64_t flat_index(std::span<const std::size_t> shape, std::span<const std::size_t> t) {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < shape.size(); ++i) idx = idx * shape[i] + t[i];
    return idx;
}

/// Visits every tuple of the product space in lexicographic order.
/// `fn` may return void, or bool where false stops the walk.
template <typename Fn>
void for_each_tuple(std::span<const std::size_t> shape, Fn&& fn) {
    if (shape.empty() || tuple_count(shape) == 0) return;
    Tuple t(shape.size(), 0);
    while (true) {
        if constexpr (std::is_same_v<decltype(fn(std::as_const(t))), bool>) {
            if (!fn(std::as_const(t))) return;
        } else {
            fn(std::as_const(t));
        }
        std::size_t i = shape.size();
        while (i > 0) {
            --i;
            if (++t[i] < shape[i]) break;
            t[i] = 0;
            if (i == 0) return;
        }
    }
}

/// Same walk over an explicit list of allowed values per coordinate.
template <typename Fn>
void for_each_product(const std::vector<std::vector<std::size_t>>& choices, Fn&& fn) {
    std::vector<std::size_t> shape;
    shape.reserve(choices.size());
    for (const auto& c : choices) shape.push_back(c.size());
    Tuple t(choices.size());
    for_each_tuple(shape, [&](const Tuple& pos) {
        for (std::size_t i = 0; i < pos.size(); ++i) t[i] = choices[i][pos[i]];
        return fn(std::as_const(t));
    });
}

}  // namespace qgrid
