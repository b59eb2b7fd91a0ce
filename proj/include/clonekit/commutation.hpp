#pragma once

#include <clonekit/relation.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace clonekit {

/// A set of operations on one domain, bucketed by arity and kept sorted.
class OperationSet {
public:
    explicit OperationSet(Domain domain) : domain_(domain) {}

    OperationSet(Domain domain, std::vector<Operation> ops) : domain_(domain)
    {
        for (auto& op : ops)
            insert(std::move(op));
    }

    Domain domain() const noexcept { return domain_; }

    /// Returns false when the operation was already present.
    bool insert(Operation op)
    {
        if (op.domain() != domain_)
            throw InvalidArgument("operation belongs to a different domain");
        auto& bucket = by_arity_[op.arity()];
        const auto it = std::lower_bound(bucket.begin(), bucket.end(), op);
        if (it != bucket.end() && *it == op)
            return false;
        bucket.insert(it, std::move(op));
        return true;
    }

    /// Replaces the whole arity-`n` slice; the input is sorted and deduplicated.
    void assign_slice(int arity, std::vector<Operation> ops)
    {
        for (const auto& op : ops)
            if (op.domain() != domain_ || op.arity() != arity)
                throw InvalidArgument("slice member has the wrong domain or arity");
        std::sort(ops.begin(), ops.end());
        ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
        by_arity_[arity] = std::move(ops);
    }

    std::span<const Operation> slice(int arity) const noexcept
    {
        const auto it = by_arity_.find(arity);
        if (it == by_arity_.end())
            return {};
        return it->second;
    }

    bool contains(const Operation& op) const noexcept
    {
        const auto s = slice(op.arity());
        return op.domain() == domain_ && std::binary_search(s.begin(), s.end(), op);
    }

    std::size_t size() const noexcept
    {
        std::size_t n = 0;
        for (const auto& [arity, ops] : by_arity_)
            n += ops.size();
        return n;
    }

    std::vector<int> arities() const
    {
        std::vector<int> out;
        for (const auto& [arity, ops] : by_arity_)
            if (!ops.empty())
                out.push_back(arity);
        return out;
    }

    /// All members, ordered by arity then table.
    std::vector<Operation> all() const
    {
        std::vector<Operation> out;
        for (const auto& [arity, ops] : by_arity_)
            out.insert(out.end(), ops.begin(), ops.end());
        return out;
    }

private:
    Domain domain_;
    std::map<int, std::vector<Operation>> by_arity_;
};

/// Membership checks for `rel` reused across many preservation tests.
class PreservationChecker {
public:
    explicit PreservationChecker(const Relation& rel) : rel_(rel), index_(rel) {}

    /// True iff applying `op` coordinatewise to any |op|-tuple of members lands in the relation.
    bool preserved_by(const Operation& op) const
    {
        if (op.domain() != rel_.domain())
            throw InvalidArgument("preservation check across different domains");
        const auto s = rel_.size();
        if (s == 0)
            return true;
        const auto n = static_cast<std::size_t>(op.arity());
        const auto m = static_cast<std::size_t>(rel_.arity());
        const auto k = static_cast<std::size_t>(op.domain().size());
        std::vector<std::size_t> choice(n, 0);
        const std::vector<std::size_t> bound(n, s);
        std::vector<Value> image(m);
        do {
            for (std::size_t i = 0; i < m; ++i) {
                std::size_t idx = 0;
                for (std::size_t j = 0; j < n; ++j)
                    idx = idx * k + rel_.tuple(choice[j])[i];
                image[i] = op.at(idx);
            }
            if (!index_.contains(image))
                return false;
        } while (next_index_tuple(choice, bound));
        return true;
    }

private:
    const Relation& rel_;
    TupleSet index_;
};

inline bool preserves(const Operation& op, const Relation& rel)
{
    return PreservationChecker(rel).preserved_by(op);
}

/// Does g commute with f?  Checks g(f(row_1), ..., f(row_m)) = f(g(col_1), ..., g(col_n))
/// over every m x n matrix in lexicographic order, stopping at the first failure.
inline bool commutes(const Operation& g, const Operation& f)
{
    if (g.domain() != f.domain())
        throw InvalidArgument("commutation check across different domains");
    const int k = g.domain().size();
    const auto m = static_cast<std::size_t>(g.arity());
    const auto n = static_cast<std::size_t>(f.arity());
    if (power(static_cast<std::uint64_t>(k), m * n) == saturated)
        throw ResourceExceeded("matrix space too large for the direct commutation check");
    std::vector<Value> x(m * n, 0), rows(m), cols(n);
    const std::span<const Value> xs(x);
    do {
        for (std::size_t i = 0; i < m; ++i)
            rows[i] = f(xs.subspan(i * n, n));
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < m; ++i)
                idx = idx * static_cast<std::size_t>(k) + x[i * n + j];
            cols[j] = g.at(idx);
        }
        if (g(rows) != f(cols))
            return false;
    } while (next_tuple(x, k));
    return true;
}

/// Layered minimal automaton reading an argument tuple of an operation
/// left to right.  States of the last layer are the operation's values.
class ResidualAutomaton {
public:
    explicit ResidualAutomaton(const Operation& op) : k_(op.domain().size()), n_(op.arity())
    {
        const auto k = static_cast<std::size_t>(k_);
        std::vector<int> below(op.table().begin(), op.table().end());
        next_.resize(static_cast<std::size_t>(n_));
        sizes_.assign(static_cast<std::size_t>(n_) + 1, 0);
        sizes_[static_cast<std::size_t>(n_)] = k_;
        for (int j = n_ - 1; j >= 0; --j) {
            const std::size_t prefixes = below.size() / k;
            std::vector<int> ids(prefixes);
            std::unordered_map<std::string, int> intern;
            auto& trans = next_[static_cast<std::size_t>(j)];
            std::string key(k * sizeof(int), '\0');
            for (std::size_t p = 0; p < prefixes; ++p) {
                std::memcpy(key.data(), below.data() + p * k, k * sizeof(int));
                const auto [it, fresh] = intern.try_emplace(key, static_cast<int>(intern.size()));
                if (fresh)
                    trans.insert(trans.end(), below.begin() + static_cast<std::ptrdiff_t>(p * k),
                                 below.begin() + static_cast<std::ptrdiff_t>((p + 1) * k));
                ids[p] = it->second;
            }
            sizes_[static_cast<std::size_t>(j)] = static_cast<int>(intern.size());
            below = std::move(ids);
        }
    }

    int domain_size() const noexcept { return k_; }
    int arity() const noexcept { return n_; }
    int layer_size(int j) const noexcept { return sizes_[static_cast<std::size_t>(j)]; }

    int next(int layer, int state, int symbol) const noexcept
    {
        return next_[static_cast<std::size_t>(layer)][static_cast<std::size_t>(state * k_ + symbol)];
    }

private:
    int k_;
    int n_;
    std::vector<std::vector<int>> next_;
    std::vector<int> sizes_;
};

/// Decides commutation of arbitrary (possibly partially specified) m-ary
/// operations with a fixed operation f.
///
/// Processes an m x n argument matrix column by column.  Each row is tracked
/// by its residual state in f's automaton (independent of the candidate, so
/// precomputed); the candidate's column values feed a second copy of the
/// automaton.  A candidate commutes iff, for every reachable final row-value
/// tuple b, the only reachable value of f on the column results is g(b).
/// Unknown entries (-1) drop the matrices that use them, so a `false` from a
/// partial table is a definite violation.
class CommutationChecker {
public:
    static constexpr std::uint64_t default_transition_cap = std::uint64_t{1} << 26;

    CommutationChecker(const Operation& f, int m, std::uint64_t transition_cap = default_transition_cap)
        : automaton_(f), k_(f.domain().size()), m_(m), n_(f.arity())
    {
        if (m < 1)
            throw InvalidArgument("candidate arity must be >= 1");
        const auto columns = power(static_cast<std::uint64_t>(k_), static_cast<std::uint64_t>(m));
        if (columns > transition_cap)
            throw ResourceExceeded("too many argument columns for the commutation checker");
        columns_ = static_cast<std::size_t>(columns);

        words_.resize(static_cast<std::size_t>(n_) + 1);
        for (int j = 0; j <= n_; ++j)
            words_[static_cast<std::size_t>(j)] = static_cast<std::size_t>((automaton_.layer_size(j) + 63) / 64);

        std::vector<std::vector<int>> layer{std::vector<int>(static_cast<std::size_t>(m), 0)};
        std::vector<int> digits(static_cast<std::size_t>(m));
        std::uint64_t transitions = 0;
        for (int j = 0; j < n_; ++j) {
            std::map<std::vector<int>, int> intern;
            std::vector<std::vector<int>> next_layer;
            std::vector<int> trans(layer.size() * columns_);
            std::vector<int> succ(static_cast<std::size_t>(m));
            transitions += layer.size() * columns_;
            if (transitions > transition_cap)
                throw ResourceExceeded("commutation checker exceeds its transition cap");
            for (std::size_t t = 0; t < layer.size(); ++t) {
                std::fill(digits.begin(), digits.end(), 0);
                for (std::size_t c = 0; c < columns_; ++c) {
                    for (std::size_t i = 0; i < succ.size(); ++i)
                        succ[i] = automaton_.next(j, layer[t][i], digits[i]);
                    const auto [it, fresh] = intern.try_emplace(succ, static_cast<int>(next_layer.size()));
                    if (fresh)
                        next_layer.push_back(succ);
                    trans[t * columns_ + c] = it->second;
                    for (std::size_t i = digits.size(); i-- > 0;) {
                        if (++digits[i] < k_)
                            break;
                        digits[i] = 0;
                    }
                }
            }
            transitions_.push_back(std::move(trans));
            layer_sizes_.push_back(layer.size());
            layer = std::move(next_layer);
        }
        layer_sizes_.push_back(layer.size());
        final_index_.reserve(layer.size());
        for (const auto& values : layer) {
            std::size_t idx = 0;
            for (int v : values)
                idx = idx * static_cast<std::size_t>(k_) + static_cast<std::size_t>(v);
            final_index_.push_back(idx);
        }
    }

    /// Working memory for consistent(); one per thread.
    struct Scratch {
        std::vector<std::uint64_t> current, next, stepped;
    };

    int candidate_arity() const noexcept { return m_; }
    std::size_t table_size() const noexcept { return columns_; }

    /// `values[i]` is the candidate's value at argument index i, or -1 if unknown.
    bool consistent(std::span<const int> values, Scratch& s) const
    {
        const auto k = static_cast<std::size_t>(k_);
        s.current.assign(layer_sizes_[0] * words_[0], 0);
        s.current[0] = 1;
        for (int j = 0; j < n_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const std::size_t win = words_[ju], wout = words_[ju + 1];
            s.next.assign(layer_sizes_[ju + 1] * wout, 0);
            s.stepped.assign(k * wout, 0);
            const int* trans = transitions_[ju].data();
            for (std::size_t t = 0; t < layer_sizes_[ju]; ++t) {
                const std::uint64_t* mask = s.current.data() + t * win;
                if (std::all_of(mask, mask + win, [](std::uint64_t w) { return w == 0; }))
                    continue;
                std::fill(s.stepped.begin(), s.stepped.end(), 0);
                for (std::size_t w = 0; w < win; ++w)
                    for (std::uint64_t bits = mask[w]; bits != 0; bits &= bits - 1) {
                        const int state = static_cast<int>(w * 64) + std::countr_zero(bits);
                        for (std::size_t a = 0; a < k; ++a) {
                            const auto to = static_cast<std::size_t>(automaton_.next(j, state, static_cast<int>(a)));
                            s.stepped[a * wout + to / 64] |= std::uint64_t{1} << (to % 64);
                        }
                    }
                const int* row = trans + t * columns_;
                for (std::size_t c = 0; c < columns_; ++c) {
                    const int a = values[c];
                    if (a < 0)
                        continue;
                    std::uint64_t* dst = s.next.data() + static_cast<std::size_t>(row[c]) * wout;
                    const std::uint64_t* src = s.stepped.data() + static_cast<std::size_t>(a) * wout;
                    for (std::size_t w = 0; w < wout; ++w)
                        dst[w] |= src[w];
                }
            }
            std::swap(s.current, s.next);
        }
        // Final layer: states are values, so one word suffices (k <= 64).
        for (std::size_t t = 0; t < layer_sizes_.back(); ++t) {
            const std::uint64_t mask = s.current[t];
            if (mask == 0)
                continue;
            if (std::popcount(mask) > 1)
                return false;
            const int expected = values[final_index_[t]];
            if (expected >= 0 && mask != (std::uint64_t{1} << expected))
                return false;
        }
        return true;
    }

    bool commutes_with(const Operation& g) const
    {
        if (g.arity() != m_ || g.domain().size() != k_)
            throw InvalidArgument("candidate does not match the checker's arity or domain");
        std::vector<int> values(g.table().begin(), g.table().end());
        Scratch s;
        return consistent(values, s);
    }

private:
    ResidualAutomaton automaton_;
    int k_;
    int m_;
    int n_;
    std::size_t columns_ = 0;
    std::vector<std::size_t> words_;
    std::vector<std::size_t> layer_sizes_;
    std::vector<std::vector<int>> transitions_;
    std::vector<std::size_t> final_index_;
};

} // namespace clonekit
