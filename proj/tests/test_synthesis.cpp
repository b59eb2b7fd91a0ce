#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace clonekit;
using oracle::Tuple;

namespace {

RelationEnv graph_t3()
{
    RelationEnv env(Domain(3));
    env.add("T", graph_of(snow_t(3)));
    return env;
}

struct Instance {
    RelationEnv env;
    std::vector<Tuple> gamma0;
};

Instance random_instance(std::mt19937& rng)
{
    const Domain d(2);
    RelationEnv env(d);
    const int relations = 1 + static_cast<int>(rng() % 2);
    for (int r = 0; r < relations; ++r)
        env.add("Q" + std::to_string(r), oracle::random_relation(rng, d, 1 + static_cast<int>(rng() % 3), 0.5));
    const int m0 = 1 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % 3);
    std::vector<Tuple> gamma0;
    for (int i = 0; i < n; ++i) {
        Tuple t;
        for (int j = 0; j < m0; ++j)
            t.push_back(static_cast<Value>(rng() % 2));
        gamma0.push_back(t);
    }
    return {std::move(env), std::move(gamma0)};
}

std::vector<Relation> relations_of(const RelationEnv& env)
{
    std::vector<Relation> out;
    for (const auto& [name, rel] : env.entries())
        out.push_back(rel);
    return out;
}

} // namespace

TEST(Synthesis, DedupRows)
{
    const Domain d(3);
    const auto g = dedup_rows(d, {{1, 2, 1}, {2, 1, 1}});
    EXPECT_EQ(g.n(), 2);
    EXPECT_EQ(g.m0(), 3);
    EXPECT_EQ(g.rows, (std::vector<Tuple>{{1, 2}, {2, 1}, {1, 1}}));
    EXPECT_EQ(g.distinct_rows, g.rows);
    EXPECT_EQ(g.alpha, (std::vector<int>{0, 1, 2}));

    const auto h = dedup_rows(d, {{0, 0, 1}, {1, 1, 0}, {0, 0, 1}});
    EXPECT_EQ(h.n(), 2);
    EXPECT_EQ(h.distinct_rows, (std::vector<Tuple>{{0, 1}, {1, 0}}));
    EXPECT_EQ(h.alpha, (std::vector<int>{0, 0, 1}));
    EXPECT_EQ(h.m_prime(), 2);

    EXPECT_THROW(dedup_rows(d, {}), InvalidArgument);
    EXPECT_THROW(dedup_rows(d, {{0, 1}, {0}}), InvalidArgument);
    EXPECT_THROW(dedup_rows(d, {{0, 3}}), InvalidArgument);
}

TEST(Synthesis, WorkedExample)
{
    const auto env = graph_t3();
    const auto gen = dedup_rows(Domain(3), {{1, 2, 1}, {2, 1, 1}});
    const auto result = synthesize_ppdef(env, gen);
    EXPECT_EQ(result.stats.rows_iterated, 32'805u);
    EXPECT_EQ(result.stats.atoms(), 6'561u);
    EXPECT_EQ(result.stats.exists, 6);
    EXPECT_EQ(result.stats.free, 3);
    EXPECT_EQ(result.stats.unseen_rows, 0);
    EXPECT_EQ(result.stats.line(), "# L=32805 atoms=6561 exists=6");
    const auto v = validate_synthesis(result, env, graph_of(snow_f(3)));
    EXPECT_TRUE(v.ok);
    EXPECT_TRUE(v.extra.empty());
    EXPECT_TRUE(v.missing.empty());
}

TEST(Synthesis, ValidationReportsExtraTuples)
{
    const auto env = graph_t3();
    const auto gen = dedup_rows(Domain(3), {{1, 2, 1}, {2, 1, 1}});
    auto result = synthesize_ppdef(env, gen);
    // Keep only atoms that mention no existential variable.
    PPFormula cut(result.formula.domain(), result.formula.free_vars(), result.formula.exist_vars(), {},
                  result.formula.output());
    for (const auto& a : result.formula.atoms())
        if (std::all_of(a.vars.begin(), a.vars.end(), [](int v) { return v < 3; }))
            cut.add_atom(a);
    ASSERT_LT(cut.atoms().size(), result.formula.atoms().size());
    result.formula = cut;
    const auto v = validate_synthesis(result, env, graph_of(snow_f(3)));
    EXPECT_FALSE(v.ok);
    EXPECT_FALSE(v.extra.empty());
    EXPECT_TRUE(v.missing.empty());
    for (const auto& t : v.extra)
        EXPECT_FALSE(graph_of(snow_f(3)).contains(t));
}

TEST(Synthesis, ValidationReportsMissingTuples)
{
    const auto env = graph_t3();
    const auto result = synthesize_ppdef(env, dedup_rows(Domain(3), {{1, 2, 1}, {2, 1, 1}}));
    const auto v = validate_synthesis(result, env, Relation::full(Domain(3), 3));
    EXPECT_FALSE(v.ok);
    EXPECT_TRUE(v.extra.empty());
    EXPECT_EQ(v.missing.size(), 27u - 9u);
    EXPECT_THROW(validate_synthesis(result, env, Relation::full(Domain(3), 2)), InvalidArgument);
}

TEST(Synthesis, DefinesTheGeneratedRelationOnTwoElements)
{
    std::mt19937 rng(51);
    for (int trial = 0; trial < 80; ++trial) {
        const auto [env, gamma0] = random_instance(rng);
        const auto gen = dedup_rows(Domain(2), gamma0);
        const auto result = synthesize_ppdef(env, gen);
        const auto defined = oracle::as_set(eval_formula(result.formula, env));
        const auto pol = oracle::polymorphisms(Domain(2), relations_of(env), gen.n());
        EXPECT_EQ(defined, oracle::closure(gamma0, pol)) << emit_text(result.formula);
        for (const auto& t : gamma0)
            EXPECT_TRUE(defined.contains(t));
    }
}

TEST(Synthesis, StatsFollowTheCounts)
{
    std::mt19937 rng(52);
    for (int trial = 0; trial < 50; ++trial) {
        const auto [env, gamma0] = random_instance(rng);
        const auto gen = dedup_rows(Domain(2), gamma0);
        const auto result = synthesize_ppdef(env, gen);
        std::uint64_t L = 0;
        std::size_t i = 0;
        for (const auto& [name, rel] : env.entries()) {
            const auto choices = power(rel.size(), static_cast<std::uint64_t>(gen.n()));
            L += choices * static_cast<std::uint64_t>(rel.arity());
            EXPECT_LE(result.stats.atoms_per_relation[i++], choices);
        }
        EXPECT_EQ(result.stats.rows_iterated, L);
        EXPECT_EQ(result.stats.atoms(), result.formula.atoms().size());
        EXPECT_EQ(result.formula.free_count(), gen.m_prime());
        EXPECT_EQ(static_cast<int>(result.formula.exist_vars().size()), result.stats.exists);
        EXPECT_LE(result.stats.exists + result.stats.free, 1 << gen.n());
        EXPECT_EQ(result.formula.output(), gen.alpha);
    }
}

TEST(Synthesis, Deterministic)
{
    std::mt19937 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const auto [env, gamma0] = random_instance(rng);
        const auto gen = dedup_rows(Domain(2), gamma0);
        EXPECT_EQ(emit_text(synthesize_ppdef(env, gen).formula), emit_text(synthesize_ppdef(env, gen).formula));
    }
}

TEST(Synthesis, BudgetAndDomainChecks)
{
    const auto env = graph_t3();
    const auto gen = dedup_rows(Domain(3), {{1, 2, 1}, {2, 1, 1}});
    SynthesisOptions tight;
    tight.row_budget = 32'804;
    EXPECT_THROW(synthesize_ppdef(env, gen, tight), ResourceExceeded);
    tight.row_budget = 32'805;
    EXPECT_NO_THROW(synthesize_ppdef(env, gen, tight));
    EXPECT_THROW(synthesize_ppdef(env, dedup_rows(Domain(2), {{0, 1}})), InvalidArgument);
}
