#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace clonekit;
using oracle::Tuple;

namespace {

const Domain d3(3);

Operation unary(std::initializer_list<int> xs) { return Operation(Domain(static_cast<int>(xs.size())), 1, {xs.begin(), xs.end()}); }

/// The binary operations commuting with every unary member of {T}*.
std::vector<Operation> binary_of_unary_centraliser()
{
    const auto unaries = enumerate_centraliser(OperationSet(d3, {snow_t(3)}), 1);
    return enumerate_centraliser(OperationSet(d3, unaries), 2);
}

} // namespace

TEST(Preserves, Examples)
{
    std::mt19937 rng(1);
    for (int i = 0; i < 10; ++i) {
        const auto op = oracle::random_operation(rng, d3, 2);
        EXPECT_TRUE(preserves(op, Relation::full(d3, 2)));
    }
    EXPECT_TRUE(preserves(unary({0, 0, 2}), Relation(d3, 1, std::vector<Tuple>{{0}, {2}})));
    EXPECT_FALSE(preserves(unary({1, 0, 2}), Relation(d3, 1, std::vector<Tuple>{{0}, {2}})));
    EXPECT_TRUE(preserves(unary({1, 0, 2}), Relation(d3, 1, std::vector<Tuple>{})));
    EXPECT_THROW(preserves(make_identity(Domain(2)), Relation::full(d3, 1)), InvalidArgument);
}

TEST(Preserves, AgreesWithOracle)
{
    std::mt19937 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 2));
        const auto op = oracle::random_operation(rng, d, 1 + static_cast<int>(rng() % 2));
        const auto rel = oracle::random_relation(rng, d, 1 + static_cast<int>(rng() % 3), 0.4);
        EXPECT_EQ(preserves(op, rel), oracle::preserves(op, rel));
    }
}

TEST(Commutes, Examples)
{
    const auto T = snow_t(3);
    EXPECT_TRUE(commutes(make_identity(d3), T));
    EXPECT_TRUE(commutes(unary({0, 0, 0}), T));
    EXPECT_TRUE(commutes(unary({0, 0, 1}), T));
    EXPECT_TRUE(commutes(unary({0, 0, 2}), T));
    EXPECT_FALSE(commutes(unary({0, 1, 1}), T));
    EXPECT_THROW(commutes(make_identity(Domain(2)), T), InvalidArgument);
}

TEST(Commutes, AgreesWithOracleAndIsSymmetric)
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 2));
        const int m = 1 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % (d.size() == 2 ? 3 : 2));
        // Sparse tables commute far more often than uniform ones.
        auto pick = [&](int arity) {
            return trial % 2 ? oracle::random_operation(rng, d, arity)
                             : Operation::tabulate(d, arity, [&](std::span<const Value> x) {
                                   return rng() % 4 == 0 ? static_cast<int>(x[0]) : 0;
                               });
        };
        const auto g = pick(m), f = pick(n);
        const bool c = commutes(g, f);
        EXPECT_EQ(c, oracle::commutes(g, f));
        EXPECT_EQ(c, commutes(f, g));
        EXPECT_EQ(c, preserves(g, graph_of(f)));
    }
}

TEST(Commutes, ProjectionsCommuteWithEverything)
{
    std::mt19937 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 2));
        const auto f = oracle::random_operation(rng, d, 1 + static_cast<int>(rng() % 2));
        const int m = 1 + static_cast<int>(rng() % 3);
        for (int i = 1; i <= m; ++i)
            EXPECT_TRUE(commutes(make_projection(d, m, i), f));
    }
}

TEST(CommutationChecker, AgreesWithDirectCheck)
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const Domain d(2 + static_cast<int>(rng() % 2));
        const int m = 1 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % 3);
        const auto f = Operation::tabulate(d, n, [&](std::span<const Value>) { return rng() % 3 == 0 ? 1 : 0; });
        const auto g = trial % 3 ? oracle::random_operation(rng, d, m) : make_projection(d, m, 1);
        EXPECT_EQ(CommutationChecker(f, m).commutes_with(g), oracle::commutes(g, f));
    }
}

TEST(CommutationChecker, PartialTablesOnlyRejectWhenNoCompletionCommutes)
{
    std::mt19937 rng(6);
    const Domain d(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto f = oracle::random_operation(rng, d, 2);
        const CommutationChecker checker(f, 2);
        std::vector<int> partial(4);
        for (auto& v : partial)
            v = static_cast<int>(rng() % 3) - 1;
        bool some_completion = false;
        for (const auto& g : oracle::all_operations(d, 2)) {
            bool matches = true;
            for (std::size_t i = 0; i < 4; ++i)
                matches = matches && (partial[i] < 0 || partial[i] == g.at(i));
            some_completion = some_completion || (matches && oracle::commutes(g, f));
        }
        CommutationChecker::Scratch s;
        if (some_completion) {
            EXPECT_TRUE(checker.consistent(partial, s));
        }
    }
}

TEST(Fixtures, Examples)
{
    EXPECT_TRUE(std::ranges::equal(fixture_u(d3, 2, 1).table(), std::vector<Value>{0, 0, 1}));
    EXPECT_EQ(fixture_z(d3, 0), make_constant(d3, 2, 0));
    const auto fam = fixture_fam(d3, 0, {2, 2, 2, 2});
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            const bool two = (x == 0 && y == 2) || (x == 1 && y == 2) || (x == 2 && y == 0) || (x == 2 && y == 1);
            EXPECT_EQ(fam({static_cast<Value>(x), static_cast<Value>(y)}), two ? 2 : 0);
        }
    EXPECT_EQ(fixture("delta", std::vector<int>{1, 2}, d3), fixture_delta(d3, 1, 2));
    EXPECT_THROW(fixture_u(d3, 1, 0), InvalidArgument);
    EXPECT_THROW(fixture_fam(d3, 0, {0, 0, 0, 0}), InvalidArgument);
    EXPECT_THROW(fixture_fam(d3, 0, {1, 2, 0, 0}), InvalidArgument);
    EXPECT_THROW(fixture_fam(d3, 2, {1, 0, 0, 0}), InvalidArgument);
    EXPECT_THROW(fixture_delta(d3, 1, 1), InvalidArgument);
    EXPECT_THROW(fixture("nope", std::vector<int>{}, d3), InvalidArgument);
}

TEST(Centraliser, UnarySliceOfSnowT)
{
    const auto T = snow_t(3);
    const auto slice = enumerate_centraliser(OperationSet(d3, {T}), 1);
    std::vector<Operation> expected;
    for (const auto& u : oracle::all_operations(d3, 1))
        if (oracle::commutes(u, T))
            expected.push_back(u);
    EXPECT_EQ(slice, expected);
    EXPECT_EQ(slice, (std::vector<Operation>{unary({0, 0, 0}), unary({0, 0, 1}), unary({0, 0, 2}), unary({0, 1, 2})}));
}

TEST(Centraliser, BinarySliceOfSnowTMatchesTheTable)
{
    const auto T = snow_t(3);
    const auto slice = enumerate_centraliser(OperationSet(d3, {T}), 2);
    EXPECT_EQ(slice.size(), 65u);
    EXPECT_EQ(slice, binary_centraliser_table());
    std::vector<Operation> expected;
    for (const auto& g : oracle::all_operations(d3, 2))
        if (oracle::preserves(g, graph_of(T)))
            expected.push_back(g);
    EXPECT_EQ(slice, expected);
}

TEST(Centraliser, TernarySliceAgreesWithBruteForceOnTwoElements)
{
    std::mt19937 rng(8);
    const Domain d(2);
    const auto ternary = oracle::all_operations(d, 3);
    for (int trial = 0; trial < 12; ++trial) {
        OperationSet F(d);
        F.insert(oracle::random_operation(rng, d, 1 + static_cast<int>(rng() % 3)));
        if (trial % 2)
            F.insert(oracle::random_operation(rng, d, 2));
        std::vector<Operation> expected;
        for (const auto& g : ternary) {
            bool ok = true;
            for (const auto& f : F.all())
                ok = ok && oracle::commutes(g, f);
            if (ok)
                expected.push_back(g);
        }
        EnumerationStats stats;
        EXPECT_EQ(enumerate_centraliser(F, 3, {}, &stats), expected);
        EXPECT_LE(stats.leaves, stats.candidate_space);
        EXPECT_EQ(enumerate_centraliser(F, 3, {3, EnumerationOptions{}.budget}), expected);
    }
}

TEST(Centraliser, ThreadCountDoesNotChangeTheResult)
{
    const OperationSet F(d3, {snow_t(3)});
    EXPECT_EQ(enumerate_centraliser(F, 2, {4, 1'000'000}), enumerate_centraliser(F, 2));
    EXPECT_EQ(enumerate_centraliser(F, 1, {5, 1'000'000}), enumerate_centraliser(F, 1));
}

TEST(Centraliser, LimitsAreEnforced)
{
    const OperationSet F(Domain(4), {make_identity(Domain(4))});
    EXPECT_THROW(enumerate_centraliser(F, 2), ResourceExceeded);
    EXPECT_THROW(enumerate_centraliser(F, 4), InvalidArgument);
    EXPECT_THROW(enumerate_centraliser(OperationSet(d3, {snow_t(3)}), 2, {1, 1000}), ResourceExceeded);
}

TEST(Centraliser, IsClosedUnderComposition)
{
    const OperationSet F(d3, {snow_t(3)});
    const auto u = enumerate_centraliser(F, 1);
    const auto b = enumerate_centraliser(F, 2);
    std::mt19937 rng(9);
    auto any = [&](const std::vector<Operation>& v) { return v[rng() % v.size()]; };
    for (int trial = 0; trial < 300; ++trial) {
        const auto g = any(b);
        EXPECT_TRUE(std::binary_search(b.begin(), b.end(), compose(g, {any(b), any(b)})));
        EXPECT_TRUE(std::binary_search(u.begin(), u.end(), compose(g, {any(u), any(u)})));
        EXPECT_TRUE(std::binary_search(b.begin(), b.end(), compose(any(u), {g})));
    }
}

TEST(Centraliser, ImplicationsForBinaryCentraliserOfUnarySlice)
{
    for (const auto& g : binary_of_unary_centraliser()) {
        for (int a = 0; a < 3; ++a) {
            const auto A = static_cast<Value>(a);
            if (g({1, 2}) == 2) {
                EXPECT_EQ(g({0, A}), a);
            }
            if (g({2, 1}) == 2) {
                EXPECT_EQ(g({A, 0}), a);
            }
            if (g({1, 2}) <= 1) {
                EXPECT_EQ(g({0, A}), 0);
            }
            if (g({2, 1}) <= 1) {
                EXPECT_EQ(g({A, 0}), 0);
            }
        }
    }
}

TEST(Centraliser, AlmostConservativity)
{
    const std::vector<Relation> unary_with_zero{Relation(d3, 1, std::vector<Tuple>{{0}}),
                                                Relation(d3, 1, std::vector<Tuple>{{0}, {1}}),
                                                Relation(d3, 1, std::vector<Tuple>{{0}, {2}}),
                                                Relation(d3, 1, std::vector<Tuple>{{0}, {1}, {2}})};
    const std::vector<Relation> equivalences{
        Relation(d3, 2, std::vector<Tuple>{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}}), Relation::full(d3, 2)};
    for (const auto& g : binary_of_unary_centraliser()) {
        for (const auto& r : unary_with_zero)
            EXPECT_TRUE(oracle::preserves(g, r));
        for (const auto& r : equivalences)
            EXPECT_TRUE(oracle::preserves(g, r));
    }
}

TEST(Polymorphisms, Examples)
{
    const auto T = snow_t(3);
    const std::vector<Relation> graph{graph_of(T)};
    EXPECT_EQ(enumerate_polymorphisms(d3, graph, 2), enumerate_centraliser(OperationSet(d3, {T}), 2));

    const Domain d2(2);
    const std::vector<Relation> full{Relation::full(d2, 1)};
    EXPECT_EQ(enumerate_polymorphisms(d2, full, 2).size(), 16u);

    // Unary maps sending {0,1} into {0,1}, counted directly.
    const std::vector<Relation> zero_one{Relation(d3, 1, std::vector<Tuple>{{0}, {1}})};
    std::size_t expected = 0;
    oracle::for_each_tuple(3, 3, [&](const Tuple& t) { expected += t[0] <= 1 && t[1] <= 1; });
    EXPECT_EQ(enumerate_polymorphisms(d3, zero_one, 1).size(), expected);
}

TEST(Polymorphisms, AgreeWithOracle)
{
    std::mt19937 rng(10);
    const Domain d(2);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<Relation> Q;
        const int t = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < t; ++i)
            Q.push_back(oracle::random_relation(rng, d, 1 + static_cast<int>(rng() % 3)));
        const int arity = 1 + static_cast<int>(rng() % 3);
        EXPECT_EQ(enumerate_polymorphisms(d, Q, arity), oracle::polymorphisms(d, Q, arity));
    }
}

TEST(OperationSet, KeepsSlicesSortedAndUnique)
{
    OperationSet s(d3);
    EXPECT_TRUE(s.insert(make_constant(d3, 2, 1)));
    EXPECT_TRUE(s.insert(make_constant(d3, 2, 0)));
    EXPECT_FALSE(s.insert(make_constant(d3, 2, 0)));
    EXPECT_TRUE(s.insert(make_identity(d3)));
    EXPECT_EQ(s.size(), 3u);
    EXPECT_EQ(s.arities(), (std::vector<int>{1, 2}));
    EXPECT_TRUE(std::is_sorted(s.slice(2).begin(), s.slice(2).end()));
    EXPECT_TRUE(s.contains(make_identity(d3)));
    EXPECT_THROW(s.insert(make_identity(Domain(2))), InvalidArgument);
}
