#pragma once

#include <clonekit/error.hpp>

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace clonekit {

/// An element of a finite domain {0, ..., k-1}.
using Value = std::uint8_t;

/// A finite carrier set {0, ..., k-1}.
///
/// k is limited to 64 so that sets of elements fit a single 64-bit mask
/// (the formula evaluator relies on this).
class Domain {
public:
    static constexpr int max_size = 64;

    explicit Domain(int k) : k_(k)
    {
        if (k < 2 || k > max_size)
            throw InvalidArgument("domain size must be in 2.." + std::to_string(max_size) + ", got " +
                                  std::to_string(k));
    }

    int size() const noexcept { return k_; }
    bool contains(int v) const noexcept { return v >= 0 && v < k_; }

    friend auto operator<=>(const Domain&, const Domain&) = default;

private:
    int k_;
};

inline constexpr std::uint64_t saturated = std::numeric_limits<std::uint64_t>::max();

/// base^exp, saturating at UINT64_MAX instead of overflowing.
inline std::uint64_t power(std::uint64_t base, std::uint64_t exp) noexcept
{
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > saturated / base)
            return saturated;
        r *= base;
    }
    return r;
}

/// a*b, saturating.
inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) noexcept
{
    if (a != 0 && b > saturated / a)
        return saturated;
    return a * b;
}

/// a+b, saturating.
inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) noexcept
{
    return a > saturated - b ? saturated : a + b;
}

/// Advances `t` to the lexicographic successor in A^n (last coordinate fastest).
/// Returns false, leaving `t` all zero, after the last tuple.
inline bool next_tuple(std::span<Value> t, int k) noexcept
{
    for (std::size_t i = t.size(); i-- > 0;) {
        if (++t[i] < k)
            return true;
        t[i] = 0;
    }
    return false;
}

/// Same as next_tuple for tuples of indices with per-position bounds.
inline bool next_index_tuple(std::span<std::size_t> t, std::span<const std::size_t> bound) noexcept
{
    for (std::size_t i = t.size(); i-- > 0;) {
        if (++t[i] < bound[i])
            return true;
        t[i] = 0;
    }
    return false;
}

/// Position of `t` in the lexicographic order of A^n, first coordinate most significant.
inline std::uint64_t encode_tuple(std::span<const Value> t, int k) noexcept
{
    std::uint64_t code = 0;
    for (Value v : t)
        code = code * static_cast<std::uint64_t>(k) + v;
    return code;
}

inline void decode_tuple(std::uint64_t code, int k, std::span<Value> out) noexcept
{
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = static_cast<Value>(code % static_cast<std::uint64_t>(k));
        code /= static_cast<std::uint64_t>(k);
    }
}

inline std::vector<Value> decode_tuple(std::uint64_t code, int k, int n)
{
    std::vector<Value> t(static_cast<std::size_t>(n));
    decode_tuple(code, k, t);
    return t;
}

} // namespace clonekit
