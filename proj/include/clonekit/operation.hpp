#pragma once

#include <clonekit/domain.hpp>

#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clonekit {

/// A finitary operation A^n -> A stored as its full value table.
///
/// Entry i of the table is the value at the argument tuple whose base-k
/// expansion (first argument most significant) is i.  Operations are
/// immutable; equality is equality of (domain, arity, table).
class Operation {
public:
    /// Largest table the library is willing to materialise.
    static constexpr std::uint64_t max_table_entries = std::uint64_t{1} << 28;

    Operation(Domain domain, int arity, std::vector<Value> table)
        : domain_(domain), arity_(arity), table_(std::move(table))
    {
        if (arity < 1)
            throw InvalidArgument("operations must have arity >= 1");
        const auto expected = table_size(domain, arity);
        if (table_.size() != expected)
            throw InvalidArgument("table of an " + std::to_string(arity) + "-ary operation on " +
                                  std::to_string(domain.size()) + " elements needs " + std::to_string(expected) +
                                  " entries, got " + std::to_string(table_.size()));
        const int k = domain.size();
        if (std::any_of(table_.begin(), table_.end(), [k](Value v) { return v >= k; }))
            throw InvalidArgument("table entry out of range");
    }

    /// Tabulates `rule(args)` over all of A^arity.
    template <typename Rule>
    static Operation tabulate(Domain domain, int arity, Rule&& rule)
    {
        std::vector<Value> table(table_size(domain, arity));
        std::vector<Value> args(static_cast<std::size_t>(arity), 0);
        for (auto& entry : table) {
            entry = static_cast<Value>(rule(std::span<const Value>(args)));
            next_tuple(args, domain.size());
        }
        return Operation(domain, arity, std::move(table));
    }

    /// Number of table entries k^n; throws ResourceExceeded above max_table_entries.
    static std::size_t table_size(Domain domain, int arity)
    {
        if (arity < 1)
            throw InvalidArgument("operations must have arity >= 1");
        const auto n = power(static_cast<std::uint64_t>(domain.size()), static_cast<std::uint64_t>(arity));
        if (n > max_table_entries)
            throw ResourceExceeded("table of " + std::to_string(domain.size()) + "^" + std::to_string(arity) +
                                   " entries exceeds the materialisation cap");
        return static_cast<std::size_t>(n);
    }

    Domain domain() const noexcept { return domain_; }
    int arity() const noexcept { return arity_; }
    std::span<const Value> table() const noexcept { return table_; }
    std::size_t size() const noexcept { return table_.size(); }

    Value at(std::size_t index) const noexcept { return table_[index]; }

    /// Unchecked lookup; see evaluate() for the validating variant.
    Value operator()(std::span<const Value> args) const noexcept
    {
        return table_[static_cast<std::size_t>(encode_tuple(args, domain_.size()))];
    }

    Value operator()(std::initializer_list<Value> args) const noexcept
    {
        return (*this)(std::span<const Value>(args.begin(), args.size()));
    }

    friend bool operator==(const Operation&, const Operation&) = default;
    friend auto operator<=>(const Operation&, const Operation&) = default;

private:
    Domain domain_;
    int arity_;
    std::vector<Value> table_;
};

struct OperationHash {
    std::size_t operator()(const Operation& op) const noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ull ^ static_cast<std::uint64_t>(op.arity());
        for (Value v : op.table()) {
            h ^= v;
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// eval with argument validation.
inline Value evaluate(const Operation& op, std::span<const Value> args)
{
    if (args.size() != static_cast<std::size_t>(op.arity()))
        throw InvalidArgument("expected " + std::to_string(op.arity()) + " arguments, got " +
                              std::to_string(args.size()));
    for (Value v : args)
        if (!op.domain().contains(v))
            throw InvalidArgument("argument " + std::to_string(v) + " outside the domain");
    return op(args);
}

/// The i-th n-ary projection e_i^n (i is 1-based).
inline Operation make_projection(Domain domain, int arity, int index)
{
    if (index < 1 || index > arity)
        throw InvalidArgument("projection index " + std::to_string(index) + " out of range 1.." +
                              std::to_string(arity));
    return Operation::tabulate(domain, arity, [index](std::span<const Value> x) { return x[index - 1]; });
}

inline Operation make_constant(Domain domain, int arity, int value)
{
    if (!domain.contains(value))
        throw InvalidArgument("constant " + std::to_string(value) + " outside the domain");
    return Operation(domain, arity, std::vector<Value>(Operation::table_size(domain, arity), static_cast<Value>(value)));
}

inline Operation make_identity(Domain domain) { return make_projection(domain, 1, 1); }

/// outer o (inners...): x |-> outer(inner_1(x), ..., inner_n(x)).
inline Operation compose(const Operation& outer, std::span<const Operation> inners)
{
    if (inners.size() != static_cast<std::size_t>(outer.arity()))
        throw InvalidArgument("composition needs " + std::to_string(outer.arity()) + " inner operations, got " +
                              std::to_string(inners.size()));
    const int m = inners.front().arity();
    for (const auto& g : inners) {
        if (g.domain() != outer.domain())
            throw InvalidArgument("composition across different domains");
        if (g.arity() != m)
            throw InvalidArgument("inner operations of a composition must share their arity");
    }
    const auto k = static_cast<std::size_t>(outer.domain().size());
    std::vector<Value> table(inners.front().size());
    for (std::size_t x = 0; x < table.size(); ++x) {
        std::size_t idx = 0;
        for (const auto& g : inners)
            idx = idx * k + g.at(x);
        table[x] = outer.at(idx);
    }
    return Operation(outer.domain(), m, std::move(table));
}

inline Operation compose(const Operation& outer, std::initializer_list<Operation> inners)
{
    return compose(outer, std::span<const Operation>(inners.begin(), inners.size()));
}

/// Variable substitution: result(y_1..y_m) = op(y_{map[0]}, ..., y_{map[n-1]}).
/// Map entries are 1-based variable indices into 1..m.
inline Operation minor(const Operation& op, std::span<const int> var_map, int m)
{
    if (var_map.size() != static_cast<std::size_t>(op.arity()))
        throw InvalidArgument("variable map must have one entry per argument");
    for (int v : var_map)
        if (v < 1 || v > m)
            throw InvalidArgument("variable map entry " + std::to_string(v) + " out of range 1.." + std::to_string(m));
    std::vector<Value> args(var_map.size());
    return Operation::tabulate(op.domain(), m, [&](std::span<const Value> y) {
        for (std::size_t i = 0; i < var_map.size(); ++i)
            args[i] = y[static_cast<std::size_t>(var_map[i] - 1)];
        return op(args);
    });
}

inline Operation minor(const Operation& op, std::initializer_list<int> var_map, int m)
{
    return minor(op, std::span<const int>(var_map.begin(), var_map.size()), m);
}

} // namespace clonekit
