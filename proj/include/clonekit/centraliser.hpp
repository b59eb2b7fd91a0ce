#pragma once

#include <clonekit/commutation.hpp>
#include <clonekit/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <map>
#include <vector>

namespace clonekit {

struct EnumerationOptions {
    unsigned threads = 1;
    /// Upper bound on the candidate space; exceeding it throws ResourceExceeded.
    std::uint64_t budget = 250'000'000;
};

struct EnumerationStats {
    /// Size of the space the search ranges over (before pruning).
    std::uint64_t candidate_space = 0;
    /// Complete tables actually tested.
    std::uint64_t leaves = 0;
};

namespace detail {

/// Tests every table of an `arity`-ary operation in lexicographic order.
/// `make_test(worker)` returns a predicate on the table, one per worker.
template <typename MakeTest>
std::vector<Operation> enumerate_tables(Domain d, int arity, const EnumerationOptions& opt, EnumerationStats* stats,
                                        MakeTest&& make_test)
{
    const std::size_t entries = Operation::table_size(d, arity);
    const auto count = power(static_cast<std::uint64_t>(d.size()), entries);
    if (count > opt.budget)
        throw ResourceExceeded("candidate space " + (count == saturated ? std::string("> 2^64") : std::to_string(count)) +
                               " exceeds the budget of " + std::to_string(opt.budget));
    if (stats)
        *stats = {count, count};
    const unsigned workers = static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(opt.threads, count)));
    std::vector<std::vector<Operation>> found(workers);
    run_workers(workers, [&](unsigned w, unsigned nw) {
        auto test = make_test(w);
        const std::uint64_t lo = count * w / nw, hi = count * (w + 1) / nw;
        std::vector<Value> table(entries);
        decode_tuple(lo, d.size(), table);
        for (std::uint64_t i = lo; i < hi; ++i) {
            if (test(std::span<const Value>(table)))
                found[w].emplace_back(d, arity, table);
            next_tuple(table, d.size());
        }
    });
    std::vector<Operation> out;
    for (auto& part : found)
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<CommutationChecker> checkers_for(const OperationSet& F, int arity)
{
    std::vector<CommutationChecker> out;
    for (const auto& f : F.all())
        out.emplace_back(f, arity);
    return out;
}

inline bool consistent_with_all(const std::vector<CommutationChecker>& checkers, std::span<const int> values,
                                CommutationChecker::Scratch& s)
{
    for (const auto& c : checkers)
        if (!c.consistent(values, s))
            return false;
    return true;
}

inline std::vector<Operation> ternary_centraliser(const OperationSet& F, std::span<const Operation> binary,
                                                  const EnumerationOptions& opt, EnumerationStats* stats)
{
    const Domain d = F.domain();
    const int k = d.size();
    const auto ku = static_cast<std::size_t>(k);
    const std::size_t entries = ku * ku * ku;

    // Classify argument tuples of A^3 by which identification minor fixes them.
    //   g(x,x,y) = b1(x,y), g(x,y,x) = b2(x,y), g(y,x,x) = b3(x,y).
    enum class Source { b1, b2, b3, free };
    std::vector<Source> source(entries);
    std::vector<std::size_t> minor_index(entries, 0);
    std::vector<std::size_t> free_positions;
    for (std::size_t idx = 0; idx < entries; ++idx) {
        const std::size_t x = idx / (ku * ku), y = idx / ku % ku, z = idx % ku;
        if (x == y) {
            source[idx] = Source::b1;
            minor_index[idx] = x * ku + z;
        } else if (x == z) {
            source[idx] = Source::b2;
            minor_index[idx] = x * ku + y;
        } else if (y == z) {
            source[idx] = Source::b3;
            minor_index[idx] = y * ku + x;
        } else {
            source[idx] = Source::free;
            free_positions.push_back(idx);
        }
    }

    // Group binary members by their diagonal restriction.
    std::map<std::vector<Value>, std::vector<std::size_t>> by_diagonal;
    for (std::size_t i = 0; i < binary.size(); ++i) {
        std::vector<Value> diag(ku);
        for (std::size_t a = 0; a < ku; ++a)
            diag[a] = binary[i].at(a * ku + a);
        by_diagonal[diag].push_back(i);
    }
    struct Triple {
        std::size_t b1, b2, b3;
    };
    std::vector<Triple> triples;
    std::uint64_t triple_count = 0;
    for (const auto& [diag, members] : by_diagonal)
        triple_count = saturating_add(triple_count, power(members.size(), 3));
    const auto space = saturating_mul(triple_count, power(ku, free_positions.size()));
    if (space > opt.budget)
        throw ResourceExceeded("ternary candidate space " + std::to_string(space) + " exceeds the budget of " +
                               std::to_string(opt.budget));
    triples.reserve(static_cast<std::size_t>(triple_count));
    for (const auto& [diag, members] : by_diagonal)
        for (auto i : members)
            for (auto j : members)
                for (auto l : members)
                    triples.push_back({i, j, l});

    const auto checkers = checkers_for(F, 3);
    const unsigned workers = std::max(1u, opt.threads);
    std::vector<std::vector<Operation>> found(workers);
    std::vector<std::uint64_t> leaves(workers, 0);
    run_workers(workers, [&](unsigned w, unsigned nw) {
        CommutationChecker::Scratch scratch;
        std::vector<int> values(entries, -1);
        std::vector<Value> table(entries);
        auto descend = [&](auto&& self, std::size_t depth) -> void {
            if (depth == free_positions.size()) {
                ++leaves[w];
                std::copy(values.begin(), values.end(), table.begin());
                found[w].emplace_back(d, 3, table);
                return;
            }
            const auto pos = free_positions[depth];
            for (int a = 0; a < k; ++a) {
                values[pos] = a;
                if (consistent_with_all(checkers, values, scratch))
                    self(self, depth + 1);
            }
            values[pos] = -1;
        };
        for (std::size_t t = w; t < triples.size(); t += nw) {
            const Operation* minors[3] = {&binary[triples[t].b1], &binary[triples[t].b2], &binary[triples[t].b3]};
            for (std::size_t idx = 0; idx < entries; ++idx)
                values[idx] = source[idx] == Source::free
                                  ? -1
                                  : minors[static_cast<int>(source[idx])]->at(minor_index[idx]);
            if (!consistent_with_all(checkers, values, scratch))
                continue;
            descend(descend, 0);
        }
    });
    std::vector<Operation> out;
    std::uint64_t total_leaves = 0;
    for (unsigned w = 0; w < workers; ++w) {
        out.insert(out.end(), std::make_move_iterator(found[w].begin()), std::make_move_iterator(found[w].end()));
        total_leaves += leaves[w];
    }
    std::sort(out.begin(), out.end());
    if (stats)
        *stats = {space, total_leaves};
    return out;
}

} // namespace detail

/// The arity-`arity` slice of the centraliser F* (operations commuting with all of F).
///
/// Arities 1 and 2 test every table.  Arity 3 builds each candidate from three
/// binary members of F* acting as its identification minors (agreeing on the
/// diagonal) and fills the remaining values, pruning partial tables that
/// already violate commutation.
inline std::vector<Operation> enumerate_centraliser(const OperationSet& F, int arity,
                                                    const EnumerationOptions& opt = {}, EnumerationStats* stats = nullptr)
{
    if (arity < 1 || arity > 3)
        throw InvalidArgument("centraliser enumeration supports arities 1..3, got " + std::to_string(arity));
    if (arity == 3) {
        EnumerationOptions binary_opt = opt;
        const auto binary = enumerate_centraliser(F, 2, binary_opt);
        return detail::ternary_centraliser(F, binary, opt, stats);
    }
    const auto entries = Operation::table_size(F.domain(), arity);
    return detail::enumerate_tables(F.domain(), arity, opt, stats, [&](unsigned) {
        return [checkers = detail::checkers_for(F, arity), values = std::vector<int>(entries),
                scratch = CommutationChecker::Scratch{}](std::span<const Value> table) mutable {
            std::copy(table.begin(), table.end(), values.begin());
            return detail::consistent_with_all(checkers, values, scratch);
        };
    });
}

/// The arity-`arity` operations preserving every relation in Q.
inline std::vector<Operation> enumerate_polymorphisms(Domain d, std::span<const Relation> Q, int arity,
                                                      const EnumerationOptions& opt = {},
                                                      EnumerationStats* stats = nullptr)
{
    for (const auto& rel : Q)
        if (rel.domain() != d)
            throw InvalidArgument("relations must share the domain");
    std::vector<PreservationChecker> checkers;
    checkers.reserve(Q.size());
    for (const auto& rel : Q)
        checkers.emplace_back(rel);
    return detail::enumerate_tables(d, arity, opt, stats, [&](unsigned) {
        return [&](std::span<const Value> table) {
            const Operation op(d, arity, std::vector<Value>(table.begin(), table.end()));
            return std::all_of(checkers.begin(), checkers.end(),
                               [&](const PreservationChecker& c) { return c.preserved_by(op); });
        };
    });
}

} // namespace clonekit
