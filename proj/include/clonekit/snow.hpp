#pragma once

#include <clonekit/clone.hpp>
#include <clonekit/ppformula.hpp>
#include <clonekit/version.hpp>

#include <atomic>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace clonekit {

/// Index sequences into an n x n square stored row-major: (i,j) -> (i-1)n + (j-1).
/// All accessors take 1-based i.
class ArrowPlan {
public:
    explicit ArrowPlan(int n) : n_(n)
    {
        if (n < 1)
            throw InvalidArgument("square side must be >= 1");
    }

    int side() const noexcept { return n_; }
    int at(int i, int j) const noexcept { return (i - 1) * n_ + (j - 1); }

    /// Row i, left to right.
    std::vector<int> row(int i) const { return build([&](int t) { return at(i, t); }); }
    /// Row i, right to left.
    std::vector<int> row_reversed(int i) const { return build([&](int t) { return at(i, n_ + 1 - t); }); }
    /// Column i, top to bottom.
    std::vector<int> column(int i) const { return build([&](int t) { return at(t, i); }); }
    /// Column i, bottom to top.
    std::vector<int> column_reversed(int i) const { return build([&](int t) { return at(n_ + 1 - t, i); }); }
    /// Anti-diagonal from the top right: (1,n), (2,n-1), ..., (n,1).
    std::vector<int> anti_diagonal() const { return build([&](int t) { return at(t, n_ + 1 - t); }); }
    /// Anti-diagonal from the bottom left: (n,1), ..., (1,n).
    std::vector<int> anti_diagonal_reversed() const { return build([&](int t) { return at(n_ + 1 - t, t); }); }

private:
    template <typename F>
    std::vector<int> build(F&& cell) const
    {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(n_));
        for (int t = 1; t <= n_; ++t)
            out.push_back(cell(t));
        return out;
    }

    int n_;
};

/// T(x_11, ..., x_nn) for n = k-1, arguments read row-major: 1 when every
/// x_ij equals i or every x_ij equals j, 0 otherwise.
inline int snow_t_value(int n, std::span<const Value> x) noexcept
{
    bool rows = true, cols = true;
    for (int i = 1; i <= n && (rows || cols); ++i)
        for (int j = 1; j <= n; ++j) {
            const int v = x[static_cast<std::size_t>((i - 1) * n + (j - 1))];
            rows = rows && v == i;
            cols = cols && v == j;
        }
    return rows || cols ? 1 : 0;
}

/// 1 exactly on (1, ..., n) and (n, ..., 1).
inline int snow_f_value(int n, std::span<const Value> x) noexcept
{
    bool up = true, down = true;
    for (int i = 1; i <= n; ++i) {
        up = up && x[static_cast<std::size_t>(i - 1)] == i;
        down = down && x[static_cast<std::size_t>(i - 1)] == n + 1 - i;
    }
    return up || down ? 1 : 0;
}

namespace detail {
inline Domain snow_domain(int k)
{
    if (k < 3)
        throw InvalidArgument("the separating construction needs k >= 3, got " + std::to_string(k));
    return Domain(k);
}
} // namespace detail

inline Operation snow_t(int k)
{
    const Domain d = detail::snow_domain(k);
    const int n = k - 1;
    return Operation::tabulate(d, n * n, [n](std::span<const Value> x) { return snow_t_value(n, x); });
}

inline Operation snow_f(int k)
{
    const Domain d = detail::snow_domain(k);
    const int n = k - 1;
    return Operation::tabulate(d, n, [n](std::span<const Value> x) { return snow_f_value(n, x); });
}

/// The objects of the construction for one k; T is evaluated by rule so the
/// instance exists even when T's table is too large to store.
class SnowInstance {
public:
    explicit SnowInstance(int k) : domain_(detail::snow_domain(k)), n_(k - 1), arrows_(k - 1)
    {
        for (int i = 1; i <= n_; ++i) {
            up_.push_back(static_cast<Value>(i));
            down_.push_back(static_cast<Value>(n_ + 1 - i));
        }
        for (int i = 1; i <= n_; ++i)
            for (int j = 1; j <= n_; ++j) {
                p1_.push_back(static_cast<Value>(i));
                p2_.push_back(static_cast<Value>(j));
            }
    }

    Domain domain() const noexcept { return domain_; }
    int k() const noexcept { return domain_.size(); }
    int n() const noexcept { return n_; }
    const ArrowPlan& arrows() const noexcept { return arrows_; }
    const std::vector<Value>& up() const noexcept { return up_; }
    const std::vector<Value>& down() const noexcept { return down_; }
    /// Rows constant: x_ij = i.
    const std::vector<Value>& p1() const noexcept { return p1_; }
    /// Every row equal to (1..n): x_ij = j.
    const std::vector<Value>& p2() const noexcept { return p2_; }

    int t(std::span<const Value> x) const noexcept { return snow_t_value(n_, x); }
    int f(std::span<const Value> x) const noexcept { return snow_f_value(n_, x); }

    /// Materialised T; throws ResourceExceeded when the table is too large.
    Operation t_operation() const { return snow_t(k()); }
    Operation f_operation() const { return snow_f(k()); }

private:
    Domain domain_;
    int n_;
    ArrowPlan arrows_;
    std::vector<Value> up_, down_, p1_, p2_;
};

namespace detail {

/// Positions (in square coordinates, or the extra variables) of the five atoms.
struct SnowAtoms {
    static constexpr int y = -1, u = -2, v = -3;
    std::vector<std::vector<int>> args; // n^2 square cells (or y/u/v markers) per atom, then the result marker
};

inline SnowAtoms snow_atom_layout(const ArrowPlan& a)
{
    const int n = a.side();
    SnowAtoms s;
    auto concat = [&](std::vector<std::vector<int>> parts, int result) {
        std::vector<int> out;
        for (auto& p : parts)
            out.insert(out.end(), p.begin(), p.end());
        out.push_back(result);
        return out;
    };
    std::vector<std::vector<int>> rows, mixed_rows, anti(static_cast<std::size_t>(n), a.anti_diagonal()),
        anti_rev(static_cast<std::size_t>(n), a.anti_diagonal_reversed()), mixed_cols;
    for (int i = 1; i <= n; ++i) {
        rows.push_back(a.row(i));
        mixed_rows.push_back(i == 1 ? a.row(1) : a.row_reversed(i));
        mixed_cols.push_back(i == 1 ? a.column(1) : a.column_reversed(i));
    }
    s.args.push_back(concat(rows, SnowAtoms::y));
    s.args.push_back(concat(anti, SnowAtoms::u));
    s.args.push_back(concat(mixed_rows, SnowAtoms::u));
    s.args.push_back(concat(anti_rev, SnowAtoms::v));
    s.args.push_back(concat(mixed_cols, SnowAtoms::v));
    return s;
}

} // namespace detail

/// The five-atom definition of graph(f) from graph(T) (relation name "T").
///
/// Free variables: the anti-diagonal cells x_{1,n}, x_{2,n-1}, ..., x_{n,1}, then y.
/// Existential variables: the remaining cells row by row, then u and v.
inline PPFormula snow_pp_formula(int k)
{
    const SnowInstance s(k);
    const int n = s.n();
    const auto& a = s.arrows();
    auto cell_name = [](int i, int j) { return "x" + std::to_string(i) + "_" + std::to_string(j); };

    std::vector<int> var_of_cell(static_cast<std::size_t>(n * n), -1);
    std::vector<std::string> free, exists;
    for (int cell : a.anti_diagonal()) {
        var_of_cell[static_cast<std::size_t>(cell)] = static_cast<int>(free.size());
        free.push_back(cell_name(cell / n + 1, cell % n + 1));
    }
    free.push_back("y");
    const int free_count = static_cast<int>(free.size());
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (var_of_cell[static_cast<std::size_t>(a.at(i, j))] < 0) {
                var_of_cell[static_cast<std::size_t>(a.at(i, j))] = free_count + static_cast<int>(exists.size());
                exists.push_back(cell_name(i, j));
            }
    exists.push_back("u");
    exists.push_back("v");
    const int y = free_count - 1;
    const int u = free_count + static_cast<int>(exists.size()) - 2;
    const int v = u + 1;

    PPFormula phi(s.domain(), std::move(free), std::move(exists));
    for (const auto& args : detail::snow_atom_layout(a).args) {
        Atom atom{"T", {}};
        for (int p : args)
            atom.vars.push_back(p == detail::SnowAtoms::y   ? y
                                : p == detail::SnowAtoms::u ? u
                                : p == detail::SnowAtoms::v ? v
                                                            : var_of_cell[static_cast<std::size_t>(p)]);
        phi.add_atom(std::move(atom));
    }
    return phi;
}

enum class SeparationMode { full, witness };

struct SeparationOptions {
    SeparationMode mode = SeparationMode::full;
    unsigned threads = 1;
    /// Random existential assignments per free tuple in witness mode.
    std::uint64_t samples = 100'000;
    std::uint64_t seed = 20'240'601;
    /// Largest k accepted in full mode.
    int max_full_k = 4;
    CloneOptions clone{};
};

struct SeparationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SeparationReport {
    int k = 0;
    SeparationOptions options;
    std::vector<SeparationCheck> checks;

    bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const SeparationCheck& c) { return c.passed; });
    }

    std::string text() const
    {
        std::ostringstream os;
        os << "# clonekit " << version << " verify-snow\n";
        os << "# k=" << k << " mode=" << (options.mode == SeparationMode::full ? "full" : "witness")
           << " threads=" << options.threads;
        if (options.mode == SeparationMode::witness)
            os << " samples=" << options.samples << " seed=" << options.seed;
        os << '\n';
        for (const auto& c : checks)
            os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        return os.str();
    }
};

namespace detail {

/// Evaluates the five atoms on a completed square; returns the index of the
/// first failing atom or -1.
inline int failing_atom(const SnowInstance& s, const SnowAtoms& layout, std::span<const Value> square, int y, int u,
                        int v, std::vector<Value>& buf)
{
    const auto nn = static_cast<std::size_t>(s.n() * s.n());
    buf.resize(nn);
    for (std::size_t a = 0; a < layout.args.size(); ++a) {
        const auto& args = layout.args[a];
        for (std::size_t i = 0; i < nn; ++i)
            buf[i] = square[static_cast<std::size_t>(args[i])];
        const int result = args[nn] == SnowAtoms::y ? y : args[nn] == SnowAtoms::u ? u : v;
        if (s.t(buf) != result)
            return static_cast<int>(a);
    }
    return -1;
}

/// Separation via the fragment when it is computable, else structurally.
inline SeparationCheck separation_check(const SnowInstance& s, bool exact, const CloneOptions& clone)
{
    SeparationCheck c{"separation", false, {}};
    if (exact) {
        CloneStats stats;
        const auto fragment =
            clone_fragment(OperationSet(s.domain(), {s.t_operation()}), s.n(), clone, &stats);
        c.passed = !fragment_contains(fragment, s.f_operation());
        c.detail = "f " + std::string(c.passed ? "not in" : "in") + " the " + std::to_string(s.n()) +
                   "-ary fragment of <T> (" + std::to_string(fragment.size()) + " members" +
                   (stats.used_spike_shortcut ? ", closed form" : "") + ")";
        return c;
    }
    // Every non-projection n-ary term of T is zero or has a single nonzero value;
    // f has two nonzero values and is not a projection.
    int ones = 0;
    bool projection = false;
    std::vector<Value> x(static_cast<std::size_t>(s.n()), 0);
    std::vector<bool> is_proj(static_cast<std::size_t>(s.n()), true);
    do {
        const int fx = s.f(x);
        ones += fx != 0;
        for (int i = 0; i < s.n(); ++i)
            if (fx != x[static_cast<std::size_t>(i)])
                is_proj[static_cast<std::size_t>(i)] = false;
    } while (next_tuple(x, s.k()));
    projection = std::find(is_proj.begin(), is_proj.end(), true) != is_proj.end();
    c.passed = !projection && ones == 2;
    c.detail = "structural: f is " + std::string(projection ? "" : "not ") + "a projection and has " +
               std::to_string(ones) + " nonzero values";
    return c;
}

} // namespace detail

/// Checks that the five-atom formula defines graph(f) and that f is not a term
/// operation of T.
///
/// Full mode evaluates the formula exhaustively and computes the fragment.
/// Witness mode checks, for every free tuple in graph(f), the explicit square
/// (p1, p2, or the anti-diagonal padded with zeros) together with u and v,
/// then samples random squares for the converse.
inline SeparationReport verify_separation(int k, const SeparationOptions& opt = {})
{
    const SnowInstance s(k);
    SeparationReport report{k, opt, {}};
    const int n = s.n();

    if (opt.mode == SeparationMode::full) {
        if (k > opt.max_full_k)
            throw ResourceExceeded("full verification is limited to k <= " + std::to_string(opt.max_full_k) +
                                   "; use witness mode");
        RelationEnv env(s.domain());
        env.add("T", graph_of(s.t_operation()));
        const auto defined = eval_formula(snow_pp_formula(k), env, {opt.threads});
        const auto goal = graph_of(s.f_operation());
        SeparationCheck c{"formula", defined == goal, {}};
        c.detail = "formula defines " + std::to_string(defined.size()) + " tuples, graph(f) has " +
                   std::to_string(goal.size());
        report.checks.push_back(std::move(c));
        report.checks.push_back(detail::separation_check(s, true, opt.clone));
        return report;
    }

    const auto layout = detail::snow_atom_layout(s.arrows());
    const auto anti = s.arrows().anti_diagonal();
    const auto nn = static_cast<std::size_t>(n * n);
    std::vector<int> off;
    for (int cell = 0; cell < n * n; ++cell)
        if (std::find(anti.begin(), anti.end(), cell) == anti.end())
            off.push_back(cell);

    const std::uint64_t free_tuples = power(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n));
    std::atomic<std::uint64_t> sound_fail{0}, complete_fail{0}, consistent_samples{0};
    const unsigned workers = std::max(1u, opt.threads);
    run_workers(workers, [&](unsigned w, unsigned nw) {
        std::vector<Value> x(static_cast<std::size_t>(n)), square(nn), buf, diag(nn);
        std::uniform_int_distribution<int> pick(0, k - 1);
        auto derived = [&](const std::vector<int>& cells) {
            for (std::size_t i = 0; i < nn; ++i)
                diag[i] = square[static_cast<std::size_t>(cells[i % static_cast<std::size_t>(n)])];
            return s.t(diag);
        };
        const auto anti_rev = s.arrows().anti_diagonal_reversed();
        for (std::uint64_t code = w; code < free_tuples; code += nw) {
            decode_tuple(code, k, x);
            const int fx = s.f(x);

            // Soundness: the witness square for x.
            if (std::equal(x.begin(), x.end(), s.up().begin()))
                square = s.p1();
            else if (std::equal(x.begin(), x.end(), s.down().begin()))
                square = s.p2();
            else {
                std::fill(square.begin(), square.end(), Value{0});
                for (int i = 0; i < n; ++i)
                    square[static_cast<std::size_t>(anti[static_cast<std::size_t>(i)])] = x[static_cast<std::size_t>(i)];
            }
            if (detail::failing_atom(s, layout, square, fx, derived(anti), derived(anti_rev), buf) >= 0)
                ++sound_fail;

            // Completeness, sampled: y, u, v follow from the functional atoms 1, 2, 4.
            std::mt19937_64 rng(opt.seed ^ (code * 0x9e3779b97f4a7c15ull));
            for (int i = 0; i < n; ++i)
                square[static_cast<std::size_t>(anti[static_cast<std::size_t>(i)])] = x[static_cast<std::size_t>(i)];
            std::uint64_t consistent = 0;
            for (std::uint64_t t = 0; t < opt.samples; ++t) {
                for (int cell : off)
                    square[static_cast<std::size_t>(cell)] = static_cast<Value>(pick(rng));
                const int y = s.t(square);
                if (detail::failing_atom(s, layout, square, y, derived(anti), derived(anti_rev), buf) >= 0)
                    continue;
                ++consistent;
                if (y != fx)
                    ++complete_fail;
            }
            consistent_samples += consistent;
        }
    });
    report.checks.push_back({"formula-soundness", sound_fail == 0,
                             std::to_string(free_tuples - sound_fail) + "/" + std::to_string(free_tuples) +
                                 " free tuples of graph(f) satisfied by their witness square"});
    report.checks.push_back({"formula-completeness-sampled", complete_fail == 0,
                             std::to_string(complete_fail.load()) + " violations among " +
                                 std::to_string(consistent_samples.load()) + " satisfying assignments (" +
                                 std::to_string(opt.samples) + " samples per free tuple)"});
    report.checks.push_back(detail::separation_check(s, k <= opt.max_full_k, opt.clone));
    return report;
}

} // namespace clonekit
