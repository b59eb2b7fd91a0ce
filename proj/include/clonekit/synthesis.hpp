#pragma once

#include <clonekit/ppformula.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace clonekit {

/// A generating set r_1..r_n of some m0-ary relation, viewed as the m0 x n
/// matrix whose columns are the r_i.
struct GeneratingSystem {
    Domain domain;
    /// r_1..r_n in input order, duplicates removed.
    std::vector<std::vector<Value>> gamma0;
    /// Row j of the matrix: (r_1[j], ..., r_n[j]).
    std::vector<std::vector<Value>> rows;
    /// Distinct rows in order of first appearance; index = transversal number - 1.
    std::vector<std::vector<Value>> distinct_rows;
    /// alpha[j] = index into distinct_rows of rows[j].
    std::vector<int> alpha;

    int m0() const noexcept { return static_cast<int>(rows.size()); }
    int m_prime() const noexcept { return static_cast<int>(distinct_rows.size()); }
    int n() const noexcept { return static_cast<int>(gamma0.size()); }
};

inline GeneratingSystem dedup_rows(Domain domain, const std::vector<std::vector<Value>>& gamma0_raw)
{
    if (gamma0_raw.empty())
        throw InvalidArgument("the generating set is empty");
    const std::size_t m0 = gamma0_raw.front().size();
    if (m0 == 0)
        throw InvalidArgument("generating tuples must have arity >= 1");
    GeneratingSystem g{domain, {}, {}, {}, {}};
    for (const auto& r : gamma0_raw) {
        if (r.size() != m0)
            throw InvalidArgument("generating tuples must share their arity");
        for (Value v : r)
            if (!domain.contains(v))
                throw InvalidArgument("generating tuple entry outside the domain");
        if (std::find(g.gamma0.begin(), g.gamma0.end(), r) == g.gamma0.end())
            g.gamma0.push_back(r);
    }
    std::map<std::vector<Value>, int> iota;
    for (std::size_t j = 0; j < m0; ++j) {
        std::vector<Value> row;
        row.reserve(g.gamma0.size());
        for (const auto& r : g.gamma0)
            row.push_back(r[j]);
        const auto [it, fresh] = iota.try_emplace(row, static_cast<int>(g.distinct_rows.size()));
        if (fresh)
            g.distinct_rows.push_back(row);
        g.alpha.push_back(it->second);
        g.rows.push_back(std::move(row));
    }
    return g;
}

struct SynthesisStats {
    /// Submatrix rows iterated: sum over relations of s^n * m.
    std::uint64_t rows_iterated = 0;
    /// Atoms per relation after deduplication, in environment order.
    std::vector<std::size_t> atoms_per_relation;
    /// Existential variables introduced.
    int exists = 0;
    /// Free variables (distinct rows of the generating matrix).
    int free = 0;
    /// Distinct generating rows never produced by any submatrix.
    int unseen_rows = 0;

    std::size_t atoms() const noexcept
    {
        std::size_t total = 0;
        for (auto a : atoms_per_relation)
            total += a;
        return total;
    }

    /// `# L=<L> atoms=<a> exists=<q>`
    std::string line() const
    {
        return "# L=" + std::to_string(rows_iterated) + " atoms=" + std::to_string(atoms()) +
               " exists=" + std::to_string(exists);
    }
};

struct SynthesisResult {
    PPFormula formula;
    SynthesisStats stats;
};

struct SynthesisOptions {
    std::uint64_t row_budget = 100'000'000;
};

/// Builds a pp formula over the relations of `env` whose relation contains
/// the relation generated by `gen` under Pol(env), and equals it whenever
/// that relation is invariant under Pol(env).
///
/// For each relation rho (arity m, s tuples) and each choice c of n of its
/// tuples (first choice varying slowest), the m rows of the matrix
/// (c(1) ... c(n)) become one atom: a row equal to a generating row names the
/// corresponding free variable, any other row names an existential variable
/// shared by every occurrence of that row.
inline SynthesisResult synthesize_ppdef(const RelationEnv& env, const GeneratingSystem& gen,
                                        const SynthesisOptions& opt = {})
{
    if (env.domain() != gen.domain)
        throw InvalidArgument("relations and generating set live on different domains");
    const auto n = static_cast<std::uint64_t>(gen.n());
    SynthesisStats stats;
    for (const auto& [name, rel] : env.entries())
        stats.rows_iterated = saturating_add(
            stats.rows_iterated, saturating_mul(power(rel.size(), n), static_cast<std::uint64_t>(rel.arity())));
    if (stats.rows_iterated > opt.row_budget)
        throw ResourceExceeded("synthesis would iterate " +
                               (stats.rows_iterated == saturated ? std::string("> 2^64")
                                                                 : std::to_string(stats.rows_iterated)) +
                               " rows, above the budget of " + std::to_string(opt.row_budget));

    auto key = [](const std::vector<Value>& row) { return std::string(row.begin(), row.end()); };
    std::unordered_map<std::string, int> var_of_row;
    for (std::size_t j = 0; j < gen.distinct_rows.size(); ++j)
        var_of_row.emplace(key(gen.distinct_rows[j]), static_cast<int>(j));
    std::vector<bool> seen(gen.distinct_rows.size(), false);
    std::vector<std::vector<Value>> fresh_rows;

    struct Pending {
        std::string relation;
        std::vector<int> vars; // >= 0: free; < 0: existential -(index + 1)
    };
    std::vector<Pending> atoms;
    std::vector<Value> row(static_cast<std::size_t>(n));
    for (const auto& [name, rel] : env.entries()) {
        const auto m = static_cast<std::size_t>(rel.arity());
        const auto s = rel.size();
        std::set<std::vector<int>> emitted;
        if (s == 0) {
            stats.atoms_per_relation.push_back(0);
            continue;
        }
        std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
        const std::vector<std::size_t> bound(static_cast<std::size_t>(n), s);
        do {
            std::vector<int> vars(m);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t c = 0; c < row.size(); ++c)
                    row[c] = rel.tuple(choice[c])[i];
                const auto [it, fresh] = var_of_row.try_emplace(key(row), -static_cast<int>(fresh_rows.size()) - 1);
                if (fresh)
                    fresh_rows.push_back(row);
                if (it->second >= 0)
                    seen[static_cast<std::size_t>(it->second)] = true;
                vars[i] = it->second;
            }
            if (emitted.insert(vars).second)
                atoms.push_back({name, std::move(vars)});
        } while (next_index_tuple(choice, bound));
        stats.atoms_per_relation.push_back(emitted.size());
    }

    stats.free = gen.m_prime();
    stats.exists = static_cast<int>(fresh_rows.size());
    stats.unseen_rows = static_cast<int>(std::count(seen.begin(), seen.end(), false));

    std::vector<std::string> free_names, exist_names;
    for (int j = 1; j <= stats.free; ++j)
        free_names.push_back("x" + std::to_string(j));
    for (int j = 1; j <= stats.exists; ++j)
        exist_names.push_back("y" + std::to_string(j));
    PPFormula phi(gen.domain, std::move(free_names), std::move(exist_names), {}, gen.alpha);
    for (auto& a : atoms) {
        for (int& v : a.vars)
            if (v < 0)
                v = stats.free + (-v - 1);
        phi.add_atom({std::move(a.relation), std::move(a.vars)});
    }
    return {std::move(phi), std::move(stats)};
}

struct ValidationResult {
    bool ok = false;
    /// Tuples the formula accepts outside the target relation.
    std::vector<std::vector<Value>> extra;
    /// Target tuples the formula rejects.
    std::vector<std::vector<Value>> missing;
};

inline ValidationResult validate_synthesis(const SynthesisResult& result, const RelationEnv& env, const Relation& rho0,
                                           const EvalOptions& opt = {})
{
    if (rho0.arity() != static_cast<int>(result.formula.output().size()))
        throw InvalidArgument("target arity " + std::to_string(rho0.arity()) + " differs from the formula's " +
                              std::to_string(result.formula.output().size()));
    const Relation defined = eval_formula(result.formula, env, opt);
    ValidationResult v;
    for (const auto& t : defined.tuples())
        if (!rho0.contains(t))
            v.extra.push_back(t);
    for (const auto& t : rho0.tuples())
        if (!defined.contains(t))
            v.missing.push_back(t);
    v.ok = v.extra.empty() && v.missing.empty();
    return v;
}

} // namespace clonekit
