#pragma once

#include <clonekit/commutation.hpp>

#include <algorithm>
#include <bit>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace clonekit {

struct CloneOptions {
    /// Largest fragment allowed before ResourceExceeded.
    std::size_t cap = 1'000'000;
    /// Largest number of generator applications the generic closure may perform.
    std::uint64_t composition_budget = 100'000'000;
    /// Use the closed form for zero-absorbing generators when it applies.
    bool spike_shortcut = true;
};

struct CloneStats {
    bool used_spike_shortcut = false;
    std::uint64_t compositions = 0;
};

namespace detail {

class FragmentBuilder {
public:
    explicit FragmentBuilder(const CloneOptions& opt) : opt_(opt) {}

    bool add(Operation op)
    {
        if (seen_.contains(op))
            return false;
        if (members_.size() >= opt_.cap)
            throw ResourceExceeded("clone fragment exceeds the cap of " + std::to_string(opt_.cap) + " operations");
        seen_.insert(op);
        members_.push_back(std::move(op));
        return true;
    }

    std::vector<Operation>& members() noexcept { return members_; }

    std::vector<Operation> sorted() &&
    {
        std::sort(members_.begin(), members_.end());
        return std::move(members_);
    }

private:
    const CloneOptions& opt_;
    std::vector<Operation> members_;
    std::unordered_set<Operation, OperationHash> seen_;
};

/// Semi-naive closure: each round applies every generator only to argument
/// tuples that contain at least one member added in the previous round.
inline void close_generic(FragmentBuilder& b, std::span<const Operation> generators, CloneStats& stats,
                          const CloneOptions& opt)
{
    auto& M = b.members();
    std::size_t old_end = 0;
    while (old_end < M.size()) {
        const std::size_t new_end = M.size();
        for (const auto& g : generators) {
            const auto a = static_cast<std::size_t>(g.arity());
            const auto k = static_cast<std::size_t>(g.domain().size());
            for (std::size_t p = 0; p < a; ++p) {
                // positions < p: old members, p: new, > p: any member of this round's snapshot.
                std::vector<std::size_t> lo(a, 0), hi(a, new_end);
                for (std::size_t i = 0; i < p; ++i)
                    hi[i] = old_end;
                lo[p] = old_end;
                bool empty = false;
                for (std::size_t i = 0; i < a; ++i)
                    empty = empty || lo[i] >= hi[i];
                if (empty)
                    continue;
                std::vector<std::size_t> pick(lo);
                std::vector<Value> table(M.front().size());
                for (;;) {
                    if (++stats.compositions > opt.composition_budget)
                        throw ResourceExceeded("clone closure exceeds the composition budget of " +
                                               std::to_string(opt.composition_budget));
                    for (std::size_t x = 0; x < table.size(); ++x) {
                        std::size_t idx = 0;
                        for (std::size_t i = 0; i < a; ++i)
                            idx = idx * k + M[pick[i]].at(x);
                        table[x] = g.at(idx);
                    }
                    b.add(Operation(g.domain(), M.front().arity(), table));
                    std::size_t i = a;
                    while (i-- > 0) {
                        if (++pick[i] < hi[i])
                            break;
                        pick[i] = lo[i];
                    }
                    if (i == static_cast<std::size_t>(-1))
                        break;
                }
            }
        }
        old_end = new_end;
    }
}

inline bool zero_absorbing(const Operation& g)
{
    std::vector<Value> x(static_cast<std::size_t>(g.arity()), 0);
    for (std::size_t i = 0; i < g.size(); ++i, next_tuple(x, g.domain().size()))
        if (g.at(i) != 0 && std::find(x.begin(), x.end(), Value{0}) != x.end())
            return false;
    return true;
}

/// Index of the only nonzero entry, npos for the zero function, or nullopt
/// when there are several.
inline std::optional<std::size_t> spike_support(const Operation& op)
{
    std::size_t support = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < op.size(); ++i)
        if (op.at(i) != 0) {
            if (support != static_cast<std::size_t>(-1))
                return std::nullopt;
            support = i;
        }
    return support;
}

/// Closure for zero-absorbing generators over members that are projections
/// or have at most one nonzero value ("spikes").
///
/// A composition g(h_1..h_a) with a spike among the h_i vanishes away from
/// that spike's support t, so it is the zero function or a spike at t whose
/// value is g(w) for some w built from the projection values t_i and the
/// spike values at t.  Only compositions of projections need full tables.
/// Returns false (leaving `b` as a valid partial closure) when a member
/// outside that shape shows up.
inline bool close_spikes(FragmentBuilder& b, std::span<const Operation> generators, CloneStats& stats,
                         const CloneOptions& opt)
{
    auto& M = b.members();
    const std::size_t projections = M.size();
    const Domain d = M.front().domain();
    const int n = M.front().arity();

    for (const auto& g : generators) {
        const auto a = static_cast<std::size_t>(g.arity());
        if (saturating_add(stats.compositions, power(static_cast<std::uint64_t>(n), a)) > opt.composition_budget)
            return false;
        std::vector<int> var_map(a, 1);
        do {
            ++stats.compositions;
            b.add(minor(g, var_map, n));
            std::size_t i = a;
            while (i-- > 0) {
                if (++var_map[i] <= n)
                    break;
                var_map[i] = 1;
            }
            if (i == static_cast<std::size_t>(-1))
                break;
        } while (true);
    }

    const std::size_t none = static_cast<std::size_t>(-1);
    const Operation zero = make_constant(d, n, 0);
    // spikes[t] = values v with the spike (t, v) present.
    std::vector<std::uint64_t> spikes(M.front().size(), 0);
    bool have_zero = false;
    for (std::size_t i = projections; i < M.size(); ++i) {
        const auto s = spike_support(M[i]);
        if (!s)
            return false;
        if (*s == none)
            have_zero = true;
        else
            spikes[*s] |= std::uint64_t{1} << M[i].at(*s);
    }

    struct Support {
        std::vector<std::vector<Value>> nonzero;
        std::size_t arity;
    };
    std::vector<Support> gens;
    for (const auto& g : generators) {
        Support s{{}, static_cast<std::size_t>(g.arity())};
        std::vector<Value> x(s.arity, 0);
        for (std::size_t i = 0; i < g.size(); ++i, next_tuple(x, d.size()))
            if (g.at(i) != 0) {
                s.nonzero.push_back(x);
                s.nonzero.back().push_back(g.at(i));
            }
        gens.push_back(std::move(s));
    }

    auto add_spike = [&](std::size_t t, Value v) {
        if ((spikes[t] >> v) & 1u)
            return false;
        std::vector<Value> table(M.front().size(), 0);
        table[t] = v;
        b.add(Operation(d, n, std::move(table)));
        spikes[t] |= std::uint64_t{1} << v;
        return true;
    };
    auto add_zero = [&] {
        if (have_zero)
            return false;
        b.add(zero);
        have_zero = true;
        return true;
    };

    std::vector<Value> t(static_cast<std::size_t>(n));
    for (bool changed = true; changed;) {
        changed = false;
        std::size_t supports = 0;
        for (auto mask : spikes)
            supports += mask != 0;
        const bool any_binary = std::any_of(gens.begin(), gens.end(), [](const Support& s) { return s.arity >= 2; });
        // Two spikes with different supports inside one generator vanish everywhere.
        if (supports >= 2 && any_binary)
            changed |= add_zero();
        for (std::size_t code = 0; code < spikes.size(); ++code) {
            const std::uint64_t spike_values = spikes[code];
            if (spike_values == 0)
                continue;
            decode_tuple(code, d.size(), t);
            std::uint64_t values = spike_values;
            for (Value v : t)
                values |= std::uint64_t{1} << v;
            for (std::size_t gi = 0; gi < gens.size(); ++gi) {
                const auto& g = gens[gi];
                std::uint64_t hits = 0;
                for (const auto& w : g.nonzero) {
                    bool inside = true, uses_spike = false;
                    for (std::size_t i = 0; i < g.arity && inside; ++i) {
                        inside = (values >> w[i]) & 1u;
                        uses_spike = uses_spike || ((spike_values >> w[i]) & 1u);
                    }
                    if (inside && uses_spike) {
                        ++hits;
                        changed |= add_spike(code, w.back());
                    }
                }
                const auto all = power(static_cast<std::uint64_t>(std::popcount(values)), g.arity);
                const auto without = power(static_cast<std::uint64_t>(std::popcount(values & ~spike_values)), g.arity);
                if (all - without > hits)
                    changed |= add_zero();
                stats.compositions += g.nonzero.size();
            }
        }
    }
    return true;
}

} // namespace detail

/// The n-ary part of the clone generated by `generators`: all n-ary term operations.
inline std::vector<Operation> clone_fragment(const OperationSet& generators, int n, const CloneOptions& opt = {},
                                             CloneStats* stats = nullptr)
{
    if (n < 1)
        throw InvalidArgument("fragment arity must be >= 1");
    const Domain d = generators.domain();
    Operation::table_size(d, n);
    const auto gens = generators.all();
    CloneStats local;
    detail::FragmentBuilder b(opt);
    for (int i = 1; i <= n; ++i)
        b.add(make_projection(d, n, i));

    bool done = false;
    if (opt.spike_shortcut && !gens.empty() && std::all_of(gens.begin(), gens.end(), detail::zero_absorbing)) {
        done = detail::close_spikes(b, gens, local, opt);
        local.used_spike_shortcut = done;
    }
    if (!done)
        detail::close_generic(b, gens, local, opt);
    if (stats)
        *stats = local;
    return std::move(b).sorted();
}

/// Membership in a sorted fragment.
inline bool fragment_contains(std::span<const Operation> fragment, const Operation& op)
{
    return std::binary_search(fragment.begin(), fragment.end(), op);
}

/// Least subset of A^m containing `seed` and closed under coordinatewise
/// application of every operation in `ops`.
inline Relation subuniverse_closure(const Relation& seed, const OperationSet& ops)
{
    if (seed.empty())
        throw InvalidArgument("closure seed must be nonempty");
    if (seed.domain() != ops.domain())
        throw InvalidArgument("seed and operations live on different domains");
    const auto m = static_cast<std::size_t>(seed.arity());
    const auto k = static_cast<std::size_t>(seed.domain().size());
    const auto all = ops.all();

    std::vector<Value> tuples(seed.flat().begin(), seed.flat().end());
    std::unordered_set<std::string> seen;
    auto key = [&](const Value* t) { return std::string(reinterpret_cast<const char*>(t), m); };
    for (std::size_t i = 0; i < seed.size(); ++i)
        seen.insert(key(seed.tuple(i).data()));

    std::size_t old_end = 0;
    std::vector<Value> image(m);
    while (old_end < tuples.size() / m) {
        const std::size_t new_end = tuples.size() / m;
        for (const auto& g : all) {
            const auto a = static_cast<std::size_t>(g.arity());
            for (std::size_t p = 0; p < a; ++p) {
                std::vector<std::size_t> lo(a, 0), hi(a, new_end);
                for (std::size_t i = 0; i < p; ++i)
                    hi[i] = old_end;
                lo[p] = old_end;
                if (std::any_of(hi.begin(), hi.begin() + static_cast<std::ptrdiff_t>(p),
                                [](std::size_t h) { return h == 0; }))
                    continue;
                std::vector<std::size_t> pick(lo);
                for (;;) {
                    for (std::size_t c = 0; c < m; ++c) {
                        std::size_t idx = 0;
                        for (std::size_t i = 0; i < a; ++i)
                            idx = idx * k + tuples[pick[i] * m + c];
                        image[c] = g.at(idx);
                    }
                    if (seen.insert(key(image.data())).second)
                        tuples.insert(tuples.end(), image.begin(), image.end());
                    std::size_t i = a;
                    while (i-- > 0) {
                        if (++pick[i] < hi[i])
                            break;
                        pick[i] = lo[i];
                    }
                    if (i == static_cast<std::size_t>(-1))
                        break;
                }
            }
        }
        old_end = new_end;
    }
    return Relation(seed.domain(), seed.arity(), std::move(tuples));
}

} // namespace clonekit
