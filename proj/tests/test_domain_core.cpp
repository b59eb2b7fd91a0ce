#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace clonekit;
using oracle::Tuple;

namespace {

std::vector<Value> vals(std::initializer_list<int> xs) { return {xs.begin(), xs.end()}; }

} // namespace

TEST(Domain, RejectsSizesOutsideRange)
{
    EXPECT_THROW(Domain(1), InvalidArgument);
    EXPECT_THROW(Domain(65), InvalidArgument);
    EXPECT_EQ(Domain(64).size(), 64);
}

TEST(Operation, ProjectionTables)
{
    EXPECT_TRUE(std::ranges::equal(make_projection(Domain(3), 2, 1).table(), vals({0, 0, 0, 1, 1, 1, 2, 2, 2})));
    EXPECT_EQ(make_projection(Domain(3), 1, 1), make_identity(Domain(3)));
    EXPECT_EQ(make_projection(Domain(3), 1, 1).table()[2], 2);
    const auto e2 = make_projection(Domain(2), 2, 2);
    EXPECT_TRUE(std::ranges::equal(e2.table(), vals({0, 1, 0, 1})));
    EXPECT_THROW(make_projection(Domain(3), 2, 3), InvalidArgument);
    EXPECT_THROW(make_projection(Domain(3), 2, 0), InvalidArgument);
}

TEST(Operation, ConstantTables)
{
    EXPECT_TRUE(std::ranges::equal(make_constant(Domain(3), 2, 0).table(), std::vector<Value>(9, 0)));
    EXPECT_TRUE(std::ranges::equal(make_constant(Domain(3), 1, 0).table(), vals({0, 0, 0})));
    EXPECT_TRUE(std::ranges::equal(make_constant(Domain(2), 3, 1).table(), std::vector<Value>(8, 1)));
    EXPECT_THROW(make_constant(Domain(3), 2, 3), InvalidArgument);
}

TEST(Operation, ConstructorValidatesTable)
{
    EXPECT_THROW(Operation(Domain(2), 2, vals({0, 1, 0})), InvalidArgument);
    EXPECT_THROW(Operation(Domain(2), 1, vals({0, 2})), InvalidArgument);
    EXPECT_THROW(Operation(Domain(2), 0, vals({0})), InvalidArgument);
    EXPECT_THROW(Operation::table_size(Domain(64), 6), ResourceExceeded);
}

TEST(Operation, EvaluateSnowT)
{
    const auto T = snow_t(3);
    EXPECT_EQ(evaluate(T, vals({1, 1, 2, 2})), 1);
    EXPECT_EQ(evaluate(T, vals({0, 0, 0, 0})), 0);
    EXPECT_EQ(evaluate(T, vals({2, 2, 1, 1})), 0);
    EXPECT_THROW(evaluate(T, vals({1, 1, 2})), InvalidArgument);
    EXPECT_THROW(evaluate(T, vals({1, 1, 2, 3})), InvalidArgument);
}

TEST(Operation, ComposeExamples)
{
    const Domain d(3);
    const auto T = snow_t(3);
    const auto e1 = make_projection(d, 2, 1), e2 = make_projection(d, 2, 2);
    EXPECT_EQ(compose(T, {e1, e1, e1, e1}), make_constant(d, 2, 0));
    EXPECT_EQ(compose(T, {e1, e1, e2, e2}), fixture_delta(d, 1, 2));
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        const auto g = oracle::random_operation(rng, d, 2), h = oracle::random_operation(rng, d, 2);
        EXPECT_EQ(compose(e1, {g, h}), g);
    }
    EXPECT_THROW(compose(T, {e1, e1}), InvalidArgument);
    EXPECT_THROW(compose(T, {e1, e1, e1, make_identity(d)}), InvalidArgument);
}

TEST(Operation, MinorExamples)
{
    const Domain d(3);
    EXPECT_EQ(minor(make_projection(d, 3, 2), {1, 1, 2}, 2), make_projection(d, 2, 1));
    EXPECT_EQ(minor(snow_t(3), {1, 1, 1, 1}, 1), make_constant(d, 1, 0));
    const auto T = snow_t(3);
    EXPECT_EQ(minor(T, {1, 2, 3, 4}, 4), T);
    EXPECT_THROW(minor(T, {1, 2, 3, 5}, 4), InvalidArgument);
    EXPECT_THROW(minor(T, {1, 2, 3}, 4), InvalidArgument);
}

TEST(Operation, MinorAgreesWithComposeOfProjections)
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 2));
        const int n = 1 + static_cast<int>(rng() % 3), m = 1 + static_cast<int>(rng() % 3);
        const auto op = oracle::random_operation(rng, d, n);
        std::vector<int> map;
        std::vector<Operation> projections;
        for (int i = 0; i < n; ++i) {
            map.push_back(1 + static_cast<int>(rng() % static_cast<unsigned>(m)));
            projections.push_back(make_projection(d, m, map.back()));
        }
        EXPECT_EQ(minor(op, map, m), oracle::compose(op, projections));
        EXPECT_EQ(compose(op, projections), oracle::compose(op, projections));
    }
}

TEST(Operation, MinorWithIdentityMapIsIdentity)
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 3));
        const int n = 1 + static_cast<int>(rng() % 3);
        const auto op = oracle::random_operation(rng, d, n);
        std::vector<int> id(static_cast<std::size_t>(n));
        std::iota(id.begin(), id.end(), 1);
        EXPECT_EQ(minor(op, id, n), op);
    }
}

TEST(Relation, CanonicalFormAndEquality)
{
    const Domain d(3);
    const Relation a(d, 2, std::vector<Tuple>{{2, 1}, {0, 1}, {2, 1}});
    const Relation b(d, 2, std::vector<Tuple>{{0, 1}, {2, 1}});
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 2u);
    EXPECT_TRUE(a.contains(vals({2, 1})));
    EXPECT_FALSE(a.contains(vals({1, 2})));
    EXPECT_THROW(Relation(d, 2, std::vector<Tuple>{{0, 3}}), InvalidArgument);
    EXPECT_THROW(Relation(d, 2, std::vector<Tuple>{{0}}), InvalidArgument);
}

TEST(Relation, GraphExamples)
{
    const Domain d2(2), d3(3);
    EXPECT_EQ(graph_of(make_constant(d2, 1, 0)), Relation(d2, 2, std::vector<Tuple>{{0, 0}, {1, 0}}));
    EXPECT_EQ(graph_of(make_identity(d3)), Relation(d3, 2, std::vector<Tuple>{{0, 0}, {1, 1}, {2, 2}}));
    const auto g = graph_of(snow_t(3));
    EXPECT_EQ(g.size(), 81u);
    std::vector<Tuple> ones;
    for (const auto& t : g.tuples())
        if (t.back() == 1)
            ones.push_back(t);
    EXPECT_EQ(ones, (std::vector<Tuple>{{1, 1, 2, 2, 1}, {1, 2, 1, 2, 1}}));
}

TEST(Relation, GraphIsFunctionalAndTotal)
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 3));
        const int n = 1 + static_cast<int>(rng() % 3);
        const auto op = oracle::random_operation(rng, d, n);
        const auto g = graph_of(op);
        EXPECT_EQ(g.size(), clonekit::power(d.size(), n));
        std::set<Tuple> prefixes;
        for (const auto& t : g.tuples()) {
            EXPECT_EQ(t.back(), oracle::apply(op, Tuple(t.begin(), t.end() - 1)));
            prefixes.insert(Tuple(t.begin(), t.end() - 1));
        }
        EXPECT_EQ(prefixes.size(), g.size());
    }
}

TEST(Relation, ImageFixKernelOfSnowT)
{
    const Domain d(3);
    const auto T = snow_t(3);
    EXPECT_EQ(image_of(T), Relation(d, 1, std::vector<Tuple>{{0}, {1}}));
    EXPECT_EQ(fix_of(T), Relation(d, 1, std::vector<Tuple>{{0}}));

    const auto ker = kernel_of(T);
    ASSERT_TRUE(ker.materialised());
    // Oracle: pairs of argument tuples with equal value.
    std::set<Tuple> expected;
    oracle::for_each_tuple(3, 4, [&](const Tuple& a) {
        oracle::for_each_tuple(3, 4, [&](const Tuple& b) {
            if (oracle::apply(T, a) == oracle::apply(T, b)) {
                Tuple ab(a);
                ab.insert(ab.end(), b.begin(), b.end());
                expected.insert(ab);
            }
        });
    });
    EXPECT_EQ(oracle::as_set(ker.relation()), expected);
    EXPECT_EQ(ker.tuple_count(), 2u * 2u + 79u * 79u);
    // Block of (1,2,1,2): exactly the two tuples mapped to 1.
    std::set<Tuple> block;
    for (const auto& t : ker.relation().tuples())
        if (Tuple(t.begin(), t.begin() + 4) == vals({1, 2, 1, 2}))
            block.insert(Tuple(t.begin() + 4, t.end()));
    EXPECT_EQ(block, (std::set<Tuple>{vals({1, 1, 2, 2}), vals({1, 2, 1, 2})}));
}

TEST(Relation, KernelAboveCapIsImplicit)
{
    const auto T = snow_t(3);
    const Kernel ker(T, 100);
    EXPECT_FALSE(ker.materialised());
    EXPECT_THROW((void)ker.relation(), ResourceExceeded);
    EXPECT_TRUE(ker.contains(vals({1, 1, 2, 2, 1, 2, 1, 2})));
    EXPECT_FALSE(ker.contains(vals({1, 1, 2, 2, 0, 0, 0, 0})));
}

TEST(Relation, KernelIsAnEquivalence)
{
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 2));
        const int n = 1 + static_cast<int>(rng() % 2);
        const auto op = oracle::random_operation(rng, d, n);
        const auto ker = kernel_of(op);
        std::vector<Tuple> args;
        oracle::for_each_tuple(d.size(), n, [&](const Tuple& t) { args.push_back(t); });
        auto in = [&](const Tuple& a, const Tuple& b) {
            Tuple ab(a);
            ab.insert(ab.end(), b.begin(), b.end());
            return ker.relation().contains(ab);
        };
        for (const auto& a : args) {
            EXPECT_TRUE(in(a, a));
            for (const auto& b : args) {
                EXPECT_EQ(in(a, b), in(b, a));
                if (in(a, b))
                    for (const auto& c : args)
                        if (in(b, c)) {
                            EXPECT_TRUE(in(a, c));
                        }
            }
        }
    }
}

TEST(Relation, ImageOfCompositionIsInsideOuterImage)
{
    std::mt19937 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const Domain d(3);
        const auto f = oracle::random_operation(rng, d, 2);
        const auto g = oracle::random_operation(rng, d, 2), h = oracle::random_operation(rng, d, 2);
        const auto outer = oracle::as_set(image_of(f));
        for (const auto& t : image_of(compose(f, {g, h})).tuples())
            EXPECT_TRUE(outer.contains(t));
    }
}
