#pragma once

#include <clonekit/operation.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

namespace clonekit {

/// A finitary relation: a set of m-tuples over a domain.
///
/// Tuples are kept flat, sorted lexicographically and deduplicated, so two
/// relations are equal as sets iff they compare equal.
class Relation {
public:
    Relation(Domain domain, int arity, std::vector<Value> flat) : domain_(domain), arity_(arity)
    {
        if (arity < 1)
            throw InvalidArgument("relations must have arity >= 1");
        if (flat.size() % static_cast<std::size_t>(arity) != 0)
            throw InvalidArgument("flat tuple data is not a multiple of the arity");
        const int k = domain.size();
        if (std::any_of(flat.begin(), flat.end(), [k](Value v) { return v >= k; }))
            throw InvalidArgument("relation entry out of range");
        canonicalise(std::move(flat));
    }

    Relation(Domain domain, int arity, const std::vector<std::vector<Value>>& tuples)
        : Relation(domain, arity, flatten(arity, tuples))
    {
    }

    static Relation full(Domain domain, int arity)
    {
        const auto count = power(static_cast<std::uint64_t>(domain.size()), static_cast<std::uint64_t>(arity));
        if (saturating_mul(count, static_cast<std::uint64_t>(arity)) > Operation::max_table_entries)
            throw ResourceExceeded("full relation too large to materialise");
        std::vector<Value> flat;
        flat.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(arity));
        std::vector<Value> t(static_cast<std::size_t>(arity), 0);
        do
            flat.insert(flat.end(), t.begin(), t.end());
        while (next_tuple(t, domain.size()));
        return Relation(domain, arity, std::move(flat));
    }

    Domain domain() const noexcept { return domain_; }
    int arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return data_.size() / static_cast<std::size_t>(arity_); }
    bool empty() const noexcept { return data_.empty(); }
    std::span<const Value> flat() const noexcept { return data_; }

    std::span<const Value> tuple(std::size_t i) const noexcept
    {
        return std::span<const Value>(data_).subspan(i * static_cast<std::size_t>(arity_),
                                                     static_cast<std::size_t>(arity_));
    }

    std::vector<std::vector<Value>> tuples() const
    {
        std::vector<std::vector<Value>> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i)
            out.emplace_back(tuple(i).begin(), tuple(i).end());
        return out;
    }

    /// Binary search; O(m log |rel|).
    bool contains(std::span<const Value> t) const noexcept
    {
        if (t.size() != static_cast<std::size_t>(arity_))
            return false;
        std::size_t lo = 0, hi = size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            const auto cur = tuple(mid);
            if (std::lexicographical_compare(cur.begin(), cur.end(), t.begin(), t.end()))
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo < size() && std::equal(t.begin(), t.end(), tuple(lo).begin());
    }

    friend bool operator==(const Relation&, const Relation&) = default;

private:
    static std::vector<Value> flatten(int arity, const std::vector<std::vector<Value>>& tuples)
    {
        std::vector<Value> flat;
        flat.reserve(tuples.size() * static_cast<std::size_t>(std::max(arity, 0)));
        for (const auto& t : tuples) {
            if (t.size() != static_cast<std::size_t>(arity))
                throw InvalidArgument("tuple length " + std::to_string(t.size()) + " does not match arity " +
                                      std::to_string(arity));
            flat.insert(flat.end(), t.begin(), t.end());
        }
        return flat;
    }

    void canonicalise(std::vector<Value> flat)
    {
        const auto m = static_cast<std::size_t>(arity_);
        const std::size_t count = flat.size() / m;
        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto row = [&](std::size_t i) { return flat.begin() + static_cast<std::ptrdiff_t>(i * m); };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(m), row(b),
                                                row(b) + static_cast<std::ptrdiff_t>(m));
        });
        data_.reserve(flat.size());
        for (std::size_t i = 0; i < count; ++i) {
            if (i > 0 && std::equal(row(order[i]), row(order[i]) + static_cast<std::ptrdiff_t>(m), row(order[i - 1])))
                continue;
            data_.insert(data_.end(), row(order[i]), row(order[i]) + static_cast<std::ptrdiff_t>(m));
        }
    }

    Domain domain_;
    int arity_;
    std::vector<Value> data_;
};

/// Constant-time membership for a relation: a bitmap over A^m when that is
/// small, a hash set of tuple codes otherwise.
class TupleSet {
public:
    static constexpr std::uint64_t max_bitmap_bits = std::uint64_t{1} << 27;

    explicit TupleSet(const Relation& rel) : k_(rel.domain().size()), arity_(rel.arity())
    {
        const auto space = power(static_cast<std::uint64_t>(k_), static_cast<std::uint64_t>(arity_));
        if (space <= max_bitmap_bits) {
            bits_.assign(static_cast<std::size_t>((space + 63) / 64), 0);
            for (std::size_t i = 0; i < rel.size(); ++i) {
                const auto c = encode_tuple(rel.tuple(i), k_);
                bits_[c / 64] |= std::uint64_t{1} << (c % 64);
            }
        } else if (space != saturated) {
            codes_.reserve(rel.size());
            for (std::size_t i = 0; i < rel.size(); ++i)
                codes_.insert(encode_tuple(rel.tuple(i), k_));
            hashed_ = true;
        } else {
            fallback_.emplace(rel);
        }
    }

    bool contains(std::span<const Value> t) const noexcept
    {
        if (fallback_)
            return fallback_->contains(t);
        return contains_code(encode_tuple(t, k_));
    }

    /// Only valid when the relation's tuple space fits 64-bit codes.
    bool contains_code(std::uint64_t c) const noexcept
    {
        if (hashed_)
            return codes_.count(c) != 0;
        return (bits_[c / 64] >> (c % 64)) & 1u;
    }

    int arity() const noexcept { return arity_; }

private:
    int k_;
    int arity_;
    bool hashed_ = false;
    std::vector<std::uint64_t> bits_;
    std::unordered_set<std::uint64_t> codes_;
    std::optional<Relation> fallback_;
};

/// {(x, op(x)) : x in A^n}, an (n+1)-ary relation.
inline Relation graph_of(const Operation& op)
{
    const auto n = static_cast<std::size_t>(op.arity());
    std::vector<Value> flat;
    flat.reserve(op.size() * (n + 1));
    std::vector<Value> x(n, 0);
    for (std::size_t i = 0; i < op.size(); ++i) {
        flat.insert(flat.end(), x.begin(), x.end());
        flat.push_back(op.at(i));
        next_tuple(x, op.domain().size());
    }
    return Relation(op.domain(), op.arity() + 1, std::move(flat));
}

inline Relation image_of(const Operation& op)
{
    std::vector<Value> seen(op.table().begin(), op.table().end());
    return Relation(op.domain(), 1, std::move(seen));
}

/// {z : op(z, ..., z) = z}.
inline Relation fix_of(const Operation& op)
{
    std::vector<Value> fixed;
    std::vector<Value> diag(static_cast<std::size_t>(op.arity()));
    for (int z = 0; z < op.domain().size(); ++z) {
        std::fill(diag.begin(), diag.end(), static_cast<Value>(z));
        if (op(diag) == z)
            fixed.push_back(static_cast<Value>(z));
    }
    return Relation(op.domain(), 1, std::move(fixed));
}

/// The kernel of an operation as a 2n-ary relation.
///
/// Tuples are only materialised when their entry count stays under the cap;
/// membership queries work either way.
class Kernel {
public:
    static constexpr std::uint64_t default_entry_cap = 10'000'000;

    explicit Kernel(const Operation& op, std::uint64_t entry_cap = default_entry_cap) : op_(op)
    {
        std::vector<std::uint64_t> fibre(static_cast<std::size_t>(op.domain().size()), 0);
        for (Value v : op.table())
            ++fibre[v];
        std::uint64_t count = 0;
        for (auto f : fibre)
            count = saturating_add(count, saturating_mul(f, f));
        tuple_count_ = count;
        if (saturating_mul(count, 2 * static_cast<std::uint64_t>(op.arity())) > entry_cap)
            return;

        const auto n = static_cast<std::size_t>(op.arity());
        std::vector<std::vector<std::size_t>> by_value(fibre.size());
        for (std::size_t i = 0; i < op.size(); ++i)
            by_value[op.at(i)].push_back(i);
        std::vector<Value> flat;
        flat.reserve(static_cast<std::size_t>(count) * 2 * n);
        std::vector<Value> a(n), b(n);
        for (const auto& block : by_value)
            for (auto i : block) {
                decode_tuple(i, op.domain().size(), a);
                for (auto j : block) {
                    decode_tuple(j, op.domain().size(), b);
                    flat.insert(flat.end(), a.begin(), a.end());
                    flat.insert(flat.end(), b.begin(), b.end());
                }
            }
        tuples_.emplace(op.domain(), 2 * op.arity(), std::move(flat));
    }

    bool materialised() const noexcept { return tuples_.has_value(); }
    std::uint64_t tuple_count() const noexcept { return tuple_count_; }

    /// Throws ResourceExceeded for an implicit kernel.
    const Relation& relation() const
    {
        if (!tuples_)
            throw ResourceExceeded("kernel has " + std::to_string(tuple_count_) +
                                   " tuples, above the materialisation cap");
        return *tuples_;
    }

    bool contains(std::span<const Value> t) const noexcept
    {
        const auto n = static_cast<std::size_t>(op_.arity());
        if (t.size() != 2 * n)
            return false;
        for (Value v : t)
            if (!op_.domain().contains(v))
                return false;
        return op_(t.first(n)) == op_(t.subspan(n));
    }

private:
    Operation op_;
    std::uint64_t tuple_count_ = 0;
    std::optional<Relation> tuples_;
};

inline Kernel kernel_of(const Operation& op, std::uint64_t entry_cap = Kernel::default_entry_cap)
{
    return Kernel(op, entry_cap);
}

} // namespace clonekit
