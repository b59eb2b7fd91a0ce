#pragma once

#include <clonekit/operation.hpp>

#include <algorithm>
#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clonekit {

/// u_{j,a}: unary, a at j and 0 elsewhere (j outside {0, 1}).
inline Operation fixture_u(Domain d, int j, int a)
{
    if (j < 2 || !d.contains(j) || !d.contains(a))
        throw InvalidArgument("u_{j,a} needs 2 <= j < k and a in the domain");
    return Operation::tabulate(d, 1, [&](std::span<const Value> x) { return x[0] == j ? a : 0; });
}

/// z_a over {0,1,2}: binary, a at (2,2) and 0 elsewhere.
inline Operation fixture_z(Domain d, int a)
{
    if (d.size() != 3 || !d.contains(a))
        throw InvalidArgument("z_a is defined over a 3-element domain with a in it");
    return Operation::tabulate(d, 2, [&](std::span<const Value> x) { return x[0] == 2 && x[1] == 2 ? a : 0; });
}

/// f_{a,(b,c,d,e)} over {0,1,2}: b at (0,2), c at (1,2), d at (2,0), e at (2,1),
/// a at (2,2), 0 elsewhere; all of a, b, c, d, e lie in {0, c'} for one c' in {1, 2}
/// and (b, c, d, e) is not all zero.
inline Operation fixture_fam(Domain d, int a, std::array<int, 4> x)
{
    if (d.size() != 3)
        throw InvalidArgument("f_{a,x} is defined over a 3-element domain");
    int nonzero = 0;
    for (int v : x) {
        if (!d.contains(v))
            throw InvalidArgument("f_{a,x} entry outside the domain");
        if (v != 0) {
            if (nonzero != 0 && v != nonzero)
                throw InvalidArgument("f_{a,x} entries must share one nonzero value");
            nonzero = v;
        }
    }
    if (nonzero == 0)
        throw InvalidArgument("f_{a,x} needs x != (0,0,0,0)");
    if (a != 0 && a != nonzero)
        throw InvalidArgument("f_{a,x} needs a in {0, c}");
    return Operation::tabulate(d, 2, [&](std::span<const Value> v) -> int {
        const int p = v[0], q = v[1];
        if (p == 0 && q == 2)
            return x[0];
        if (p == 1 && q == 2)
            return x[1];
        if (p == 2 && q == 0)
            return x[2];
        if (p == 2 && q == 1)
            return x[3];
        if (p == 2 && q == 2)
            return a;
        return 0;
    });
}

/// delta_(a,b) over {0,1,2}: 1 at (a,b), 0 elsewhere.
inline Operation fixture_delta(Domain d, int a, int b)
{
    if (d.size() != 3 || !d.contains(a) || !d.contains(b) || a == b)
        throw InvalidArgument("delta_(a,b) needs distinct a, b in a 3-element domain");
    return Operation::tabulate(d, 2, [&](std::span<const Value> x) { return x[0] == a && x[1] == b ? 1 : 0; });
}

/// Dispatch by family name: u (j, a), z (a), fam (a, b, c, d, e), delta (a, b).
inline Operation fixture(std::string_view family, std::span<const int> params, Domain d)
{
    auto need = [&](std::size_t n) {
        if (params.size() != n)
            throw InvalidArgument("fixture '" + std::string(family) + "' takes " + std::to_string(n) + " parameters");
    };
    if (family == "u") {
        need(2);
        return fixture_u(d, params[0], params[1]);
    }
    if (family == "z") {
        need(1);
        return fixture_z(d, params[0]);
    }
    if (family == "fam") {
        need(5);
        return fixture_fam(d, params[0], {params[1], params[2], params[3], params[4]});
    }
    if (family == "delta") {
        need(2);
        return fixture_delta(d, params[0], params[1]);
    }
    throw InvalidArgument("unknown fixture family '" + std::string(family) + "'");
}

/// The 65 binary operations e_1, e_2, z_a and f_{a,x} over {0,1,2}, sorted.
inline std::vector<Operation> binary_centraliser_table()
{
    const Domain d(3);
    std::vector<Operation> out{make_projection(d, 2, 1), make_projection(d, 2, 2)};
    for (int a = 0; a < 3; ++a)
        out.push_back(fixture_z(d, a));
    for (int c = 1; c <= 2; ++c)
        for (int a : {0, c})
            for (int bits = 1; bits < 16; ++bits)
                out.push_back(fixture_fam(d, a,
                                          {bits & 8 ? c : 0, bits & 4 ? c : 0, bits & 2 ? c : 0, bits & 1 ? c : 0}));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace clonekit
