#pragma once

#include <clonekit/io.hpp>
#include <clonekit/parallel.hpp>

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace clonekit {

struct Atom {
    std::string relation;
    /// Variable indices: free variables first, then existential ones.
    std::vector<int> vars;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// An existentially quantified conjunction of relation atoms.
///
/// The formula's relation lists, for every satisfying assignment, the free
/// variables in the order given by the output map (which may repeat or
/// drop free variables; the default is each free variable once, in order).
class PPFormula {
public:
    PPFormula(Domain domain, std::vector<std::string> free_vars, std::vector<std::string> exist_vars,
              std::vector<Atom> atoms = {}, std::vector<int> output = {})
        : domain_(domain), free_(std::move(free_vars)), exists_(std::move(exist_vars)), output_(std::move(output))
    {
        std::set<std::string> names;
        for (const auto* list : {&free_, &exists_})
            for (const auto& name : *list)
                if (name.empty() || !names.insert(name).second)
                    throw InvalidArgument("variable names must be nonempty and distinct: '" + name + "'");
        if (output_.empty()) {
            output_.resize(free_.size());
            std::iota(output_.begin(), output_.end(), 0);
        }
        for (int o : output_)
            if (o < 0 || static_cast<std::size_t>(o) >= free_.size())
                throw InvalidArgument("output map refers to a missing free variable");
        for (auto& a : atoms)
            add_atom(std::move(a));
    }

    void add_atom(Atom atom)
    {
        if (atom.relation.empty())
            throw InvalidArgument("atom without a relation name");
        for (int v : atom.vars)
            if (v < 0 || v >= variable_count())
                throw InvalidArgument("atom over " + atom.relation + " uses an undeclared variable");
        atoms_.push_back(std::move(atom));
    }

    Domain domain() const noexcept { return domain_; }
    const std::vector<std::string>& free_vars() const noexcept { return free_; }
    const std::vector<std::string>& exist_vars() const noexcept { return exists_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<int>& output() const noexcept { return output_; }
    int free_count() const noexcept { return static_cast<int>(free_.size()); }
    int variable_count() const noexcept { return static_cast<int>(free_.size() + exists_.size()); }

    const std::string& name(int var) const
    {
        const auto v = static_cast<std::size_t>(var);
        return v < free_.size() ? free_[v] : exists_.at(v - free_.size());
    }

    bool output_is_identity() const noexcept
    {
        if (output_.size() != free_.size())
            return false;
        for (std::size_t i = 0; i < output_.size(); ++i)
            if (output_[i] != static_cast<int>(i))
                return false;
        return true;
    }

    /// Free variables that occur in no atom; they range over the whole domain.
    std::vector<int> unconstrained_free() const
    {
        std::vector<bool> used(free_.size(), false);
        for (const auto& a : atoms_)
            for (int v : a.vars)
                if (v < free_count())
                    used[static_cast<std::size_t>(v)] = true;
        std::vector<int> out;
        for (std::size_t i = 0; i < used.size(); ++i)
            if (!used[i])
                out.push_back(static_cast<int>(i));
        return out;
    }

private:
    Domain domain_;
    std::vector<std::string> free_;
    std::vector<std::string> exists_;
    std::vector<Atom> atoms_;
    std::vector<int> output_;
};

/// Named relations over one domain, in insertion order.  The name `=` is
/// bound to the diagonal unless it is given explicitly.
class RelationEnv {
public:
    explicit RelationEnv(Domain domain) : domain_(domain) {}

    void add(std::string name, Relation rel)
    {
        if (rel.domain() != domain_)
            throw InvalidArgument("relation '" + name + "' lives on a different domain");
        if (index_.contains(name))
            throw InvalidArgument("relation '" + name + "' defined twice");
        index_.emplace(name, entries_.size());
        entries_.emplace_back(std::move(name), std::move(rel));
    }

    Domain domain() const noexcept { return domain_; }
    const std::vector<std::pair<std::string, Relation>>& entries() const noexcept { return entries_; }

    const Relation* find(const std::string& name) const
    {
        const auto it = index_.find(name);
        if (it != index_.end())
            return &entries_[it->second].second;
        if (name == "=") {
            if (!diagonal_) {
                std::vector<Value> flat;
                for (int a = 0; a < domain_.size(); ++a)
                    flat.insert(flat.end(), 2, static_cast<Value>(a));
                diagonal_ = std::make_shared<Relation>(domain_, 2, std::move(flat));
            }
            return diagonal_.get();
        }
        return nullptr;
    }

    const Relation& at(const std::string& name) const
    {
        const auto* r = find(name);
        if (!r)
            throw InvalidArgument("unknown relation '" + name + "'");
        return *r;
    }

private:
    Domain domain_;
    std::vector<std::pair<std::string, Relation>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    mutable std::shared_ptr<Relation> diagonal_;
};

struct EvalOptions {
    unsigned threads = 1;
};

namespace detail {

/// Backtracking search over a pp formula with forward checking: an atom with
/// one unbound variable restricts that variable's domain to the values that
/// complete it to a member (which also forces the result of graph atoms).
class FormulaSearch {
public:
    FormulaSearch(const PPFormula& phi, const RelationEnv& env) : phi_(phi), k_(phi.domain().size())
    {
        if (env.domain() != phi.domain())
            throw InvalidArgument("formula and relations live on different domains");
        const auto nv = static_cast<std::size_t>(phi.variable_count());
        occurs_.resize(nv);
        std::map<std::string, std::size_t> set_of;
        for (std::size_t a = 0; a < phi.atoms().size(); ++a) {
            const auto& atom = phi.atoms()[a];
            const Relation& rel = env.at(atom.relation);
            if (static_cast<std::size_t>(rel.arity()) != atom.vars.size())
                throw InvalidArgument("atom over '" + atom.relation + "' has " + std::to_string(atom.vars.size()) +
                                      " arguments, relation arity is " + std::to_string(rel.arity()));
            auto [it, fresh] = set_of.try_emplace(atom.relation, sets_.size());
            if (fresh)
                sets_.push_back(std::make_shared<TupleSet>(rel));
            AtomInfo info;
            info.set = sets_[it->second].get();
            info.vars = atom.vars;
            std::vector<int> distinct = atom.vars;
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            info.distinct = static_cast<int>(distinct.size());
            for (int v : distinct)
                occurs_[static_cast<std::size_t>(v)].push_back(a);
            atoms_.push_back(std::move(info));
        }
        // Free variables in order of first occurrence, unconstrained ones last.
        std::vector<bool> placed(static_cast<std::size_t>(phi.free_count()), false);
        for (const auto& atom : phi.atoms())
            for (int v : atom.vars)
                if (v < phi.free_count() && !placed[static_cast<std::size_t>(v)]) {
                    placed[static_cast<std::size_t>(v)] = true;
                    free_order_.push_back(v);
                }
        for (int v = 0; v < phi.free_count(); ++v)
            if (!placed[static_cast<std::size_t>(v)])
                free_order_.push_back(v);
        reset();
    }

    void reset()
    {
        const auto nv = static_cast<std::size_t>(phi_.variable_count());
        const std::uint64_t full = k_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k_) - 1;
        value_.assign(nv, -1);
        dom_.assign(nv, full);
        unbound_.resize(atoms_.size());
        for (std::size_t a = 0; a < atoms_.size(); ++a)
            unbound_[a] = atoms_[a].distinct;
        trail_.clear();
        scratch_.clear();
        ok_ = true;
        for (std::size_t a = 0; a < atoms_.size() && ok_; ++a)
            if (unbound_[a] == 1)
                ok_ = restrict_last(a);
    }

    /// Collects satisfying output tuples whose first free variable (in search
    /// order) takes a value v with v % workers == worker.
    void run(unsigned worker, unsigned workers, std::vector<Value>& out)
    {
        if (!ok_)
            return;
        worker_ = worker;
        workers_ = workers;
        out_ = &out;
        free_level(0);
    }

    const std::vector<int>& free_order() const noexcept { return free_order_; }

private:
    struct AtomInfo {
        const TupleSet* set = nullptr;
        std::vector<int> vars;
        int distinct = 0;
    };

    bool holds(std::size_t a)
    {
        const auto& atom = atoms_[a];
        scratch_.resize(atom.vars.size());
        for (std::size_t i = 0; i < atom.vars.size(); ++i)
            scratch_[i] = static_cast<Value>(value_[static_cast<std::size_t>(atom.vars[i])]);
        return atom.set->contains(scratch_);
    }

    /// Narrow the only unbound variable of atom `a`; false on wipe-out.
    bool restrict_last(std::size_t a)
    {
        const auto& atom = atoms_[a];
        int var = -1;
        for (int v : atom.vars)
            if (value_[static_cast<std::size_t>(v)] < 0) {
                var = v;
                break;
            }
        const auto vu = static_cast<std::size_t>(var);
        std::uint64_t allowed = 0;
        for (std::uint64_t bits = dom_[vu]; bits != 0; bits &= bits - 1) {
            const int c = std::countr_zero(bits);
            value_[vu] = c;
            if (holds(a))
                allowed |= std::uint64_t{1} << c;
        }
        value_[vu] = -1;
        if (allowed != dom_[vu]) {
            trail_.emplace_back(var, dom_[vu]);
            dom_[vu] = allowed;
        }
        return allowed != 0;
    }

    /// Assigns and propagates; on failure the caller still calls unassign().
    bool assign(int var, int c)
    {
        const auto vu = static_cast<std::size_t>(var);
        value_[vu] = c;
        bool ok = true;
        for (auto a : occurs_[vu]) {
            const int left = --unbound_[a];
            if (!ok)
                continue;
            if (left == 0)
                ok = holds(a);
            else if (left == 1)
                ok = restrict_last(a);
        }
        return ok;
    }

    void unassign(int var, std::size_t trail_mark)
    {
        const auto vu = static_cast<std::size_t>(var);
        for (auto a : occurs_[vu])
            ++unbound_[a];
        value_[vu] = -1;
        while (trail_.size() > trail_mark) {
            dom_[static_cast<std::size_t>(trail_.back().first)] = trail_.back().second;
            trail_.pop_back();
        }
    }

    void free_level(std::size_t depth)
    {
        if (depth == free_order_.size()) {
            if (exists_level()) {
                for (int o : phi_.output())
                    out_->push_back(static_cast<Value>(value_[static_cast<std::size_t>(o)]));
            }
            return;
        }
        const int var = free_order_[depth];
        for (std::uint64_t bits = dom_[static_cast<std::size_t>(var)]; bits != 0; bits &= bits - 1) {
            const int c = std::countr_zero(bits);
            if (depth == 0 && static_cast<unsigned>(c) % workers_ != worker_)
                continue;
            const auto mark = trail_.size();
            if (assign(var, c))
                free_level(depth + 1);
            unassign(var, mark);
        }
    }

    /// Is there a witness for the existential variables?  Picks the
    /// unassigned variable with the smallest domain first.
    bool exists_level()
    {
        int best = -1;
        int best_size = 65;
        for (int v = phi_.free_count(); v < phi_.variable_count(); ++v) {
            const auto vu = static_cast<std::size_t>(v);
            if (value_[vu] >= 0)
                continue;
            const int size = std::popcount(dom_[vu]);
            if (size < best_size) {
                best = v;
                best_size = size;
            }
        }
        if (best < 0)
            return true;
        if (best_size == 0)
            return false;
        for (std::uint64_t bits = dom_[static_cast<std::size_t>(best)]; bits != 0; bits &= bits - 1) {
            const auto mark = trail_.size();
            const bool ok = assign(best, std::countr_zero(bits)) && exists_level();
            unassign(best, mark);
            if (ok)
                return true;
        }
        return false;
    }

    const PPFormula& phi_;
    int k_;
    std::vector<std::shared_ptr<TupleSet>> sets_;
    std::vector<AtomInfo> atoms_;
    std::vector<std::vector<std::size_t>> occurs_;
    std::vector<int> free_order_;

    std::vector<int> value_;
    std::vector<std::uint64_t> dom_;
    std::vector<int> unbound_;
    std::vector<std::pair<int, std::uint64_t>> trail_;
    std::vector<Value> scratch_;
    bool ok_ = true;

    unsigned worker_ = 0, workers_ = 1;
    std::vector<Value>* out_ = nullptr;
};

} // namespace detail

/// The relation defined by `phi` over `env`, with arity = length of the output map.
inline Relation eval_formula(const PPFormula& phi, const RelationEnv& env, const EvalOptions& opt = {})
{
    if (phi.output().empty())
        throw InvalidArgument("formula has no output coordinates");
    const unsigned workers = phi.free_count() == 0 ? 1u : std::max(1u, opt.threads);
    std::vector<std::vector<Value>> parts(workers);
    run_workers(workers, [&](unsigned w, unsigned nw) {
        detail::FormulaSearch search(phi, env);
        search.run(w, nw, parts[w]);
    });
    std::vector<Value> flat;
    for (auto& p : parts)
        flat.insert(flat.end(), p.begin(), p.end());
    return Relation(phi.domain(), static_cast<int>(phi.output().size()), std::move(flat));
}

inline bool formula_defines(const PPFormula& phi, const RelationEnv& env, const Relation& goal,
                            const EvalOptions& opt = {})
{
    if (goal.arity() != static_cast<int>(phi.output().size()))
        throw InvalidArgument("goal arity " + std::to_string(goal.arity()) + " differs from the formula's output arity " +
                              std::to_string(phi.output().size()));
    return eval_formula(phi, env, opt) == goal;
}

/// Text form:
///
///     domain <k>
///     freevars <names...>
///     exists <names...>
///     output <free names...>      (only when not the identity)
///     atom <relation> <names...>
inline std::string emit_text(const PPFormula& phi)
{
    std::ostringstream os;
    os << "domain " << phi.domain().size() << "\nfreevars";
    for (const auto& v : phi.free_vars())
        os << ' ' << v;
    os << "\nexists";
    for (const auto& v : phi.exist_vars())
        os << ' ' << v;
    os << '\n';
    if (!phi.output_is_identity()) {
        os << "output";
        for (int o : phi.output())
            os << ' ' << phi.free_vars()[static_cast<std::size_t>(o)];
        os << '\n';
    }
    for (const auto& a : phi.atoms()) {
        os << "atom " << a.relation;
        for (int v : a.vars)
            os << ' ' << phi.name(v);
        os << '\n';
    }
    return os.str();
}

inline PPFormula parse_formula(std::string_view input)
{
    using namespace text;
    Lines lines(input);
    const Domain domain = parse_domain(lines);
    std::vector<std::string> free, exists;
    std::vector<Token> output;
    std::vector<std::vector<Token>> atoms;
    bool seen_free = false, seen_exists = false, seen_output = false;
    while (!lines.done()) {
        const auto& l = lines.take();
        const auto kw = l[0].text;
        auto names = [&](std::vector<std::string>& into, bool& seen) {
            if (seen)
                throw ParseError(l[0].line, l[0].column, "duplicate '" + std::string(kw) + "' line");
            seen = true;
            for (std::size_t i = 1; i < l.size(); ++i)
                into.emplace_back(l[i].text);
        };
        if (kw == "freevars")
            names(free, seen_free);
        else if (kw == "exists")
            names(exists, seen_exists);
        else if (kw == "output") {
            if (seen_output)
                throw ParseError(l[0].line, l[0].column, "duplicate 'output' line");
            seen_output = true;
            output.assign(l.begin() + 1, l.end());
        } else if (kw == "atom") {
            if (l.size() < 2)
                throw ParseError(l[0].line, l[0].column, "'atom' needs a relation name");
            atoms.push_back(l);
        } else
            throw ParseError(l[0].line, l[0].column, "unknown keyword '" + std::string(kw) + "'");
    }
    std::unordered_map<std::string, int> index;
    for (const auto& n : free)
        index.emplace(n, static_cast<int>(index.size()));
    for (const auto& n : exists)
        index.emplace(n, static_cast<int>(index.size()));
    if (index.size() != free.size() + exists.size())
        throw ParseError(1, 1, "variable names must be distinct");
    std::vector<int> out;
    for (const auto& t : output) {
        const auto it = index.find(std::string(t.text));
        if (it == index.end() || it->second >= static_cast<int>(free.size()))
            throw ParseError(t.line, t.column, "output entry '" + std::string(t.text) + "' is not a free variable");
        out.push_back(it->second);
    }
    if (seen_output && out.empty())
        throw ParseError(1, 1, "empty output line");
    PPFormula phi(domain, std::move(free), std::move(exists), {}, std::move(out));
    for (const auto& l : atoms) {
        Atom a{std::string(l[1].text), {}};
        for (std::size_t i = 2; i < l.size(); ++i) {
            const auto it = index.find(std::string(l[i].text));
            if (it == index.end())
                throw ParseError(l[i].line, l[i].column, "undeclared variable '" + std::string(l[i].text) + "'");
            a.vars.push_back(it->second);
        }
        phi.add_atom(std::move(a));
    }
    return phi;
}

namespace detail {

inline std::string smt_symbol(const std::string& name)
{
    if (name.find('|') != std::string::npos || name.find('\\') != std::string::npos)
        throw InvalidArgument("name '" + name + "' cannot be written as an SMT symbol");
    return "|" + name + "|";
}

/// Membership predicate body over parameters a0..a{m-1}.
inline std::string smt_membership(const Relation& rel)
{
    const auto m = static_cast<std::size_t>(rel.arity());
    const int k = rel.domain().size();
    std::ostringstream os;
    auto conj = [&](std::span<const Value> t, std::size_t len) {
        if (len == 0)
            return std::string("true");
        std::ostringstream c;
        if (len > 1)
            c << "(and";
        for (std::size_t i = 0; i < len; ++i)
            c << (len > 1 ? " " : "") << "(= a" << i << ' ' << static_cast<int>(t[i]) << ')';
        if (len > 1)
            c << ')';
        return c.str();
    };
    // Graph of an operation: total and functional in the last coordinate.
    const bool is_graph = m >= 2 && rel.size() == power(static_cast<std::uint64_t>(k), m - 1) && [&] {
        for (std::size_t i = 1; i < rel.size(); ++i)
            if (std::equal(rel.tuple(i).begin(), rel.tuple(i).end() - 1, rel.tuple(i - 1).begin()))
                return false;
        return true;
    }();
    if (is_graph) {
        std::vector<std::size_t> freq(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < rel.size(); ++i)
            ++freq[rel.tuple(i)[m - 1]];
        const auto fallback = static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
        std::string expr = std::to_string(fallback);
        for (std::size_t i = rel.size(); i-- > 0;) {
            const auto t = rel.tuple(i);
            if (t[m - 1] != fallback)
                expr = "(ite " + conj(t, m - 1) + " " + std::to_string(t[m - 1]) + " " + expr + ")";
        }
        os << "(= a" << m - 1 << ' ' << expr << ')';
        return os.str();
    }
    if (rel.empty())
        return "false";
    if (rel.size() == 1)
        return conj(rel.tuple(0), m);
    os << "(or";
    for (std::size_t i = 0; i < rel.size(); ++i)
        os << ' ' << conj(rel.tuple(i), m);
    os << ')';
    return os.str();
}

inline std::string smt_params(std::size_t m, const char* prefix = "a")
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < m; ++i)
        os << (i ? " " : "") << '(' << prefix << i << " Int)";
    os << ')';
    return os.str();
}

} // namespace detail

/// SMT-LIB 2 script asserting that some assignment of the output
/// coordinates is accepted by exactly one of the formula and the goal.
/// A solver answer of `unsat` certifies that the formula defines the goal.
inline std::string emit_smt(const PPFormula& phi, const RelationEnv& env, const Relation& goal)
{
    if (goal.arity() != static_cast<int>(phi.output().size()))
        throw InvalidArgument("goal arity differs from the formula's output arity");
    const int k = phi.domain().size();
    std::ostringstream os;
    os << "; pp formula versus goal relation; unsat means the formula defines the goal\n";
    os << "(set-logic ALL)\n";
    os << "(define-fun in_dom ((v Int)) Bool (and (<= 0 v) (< v " << k << ")))\n";
    std::map<std::string, std::string> fun;
    for (const auto& a : phi.atoms()) {
        if (fun.contains(a.relation))
            continue;
        const Relation& rel = env.at(a.relation);
        const std::string f = "rel" + std::to_string(fun.size());
        fun.emplace(a.relation, f);
        os << "; " << f << " = " << a.relation << '\n';
        os << "(define-fun " << f << ' ' << detail::smt_params(static_cast<std::size_t>(rel.arity())) << " Bool "
           << detail::smt_membership(rel) << ")\n";
    }

    std::ostringstream body;
    if (phi.atoms().empty())
        body << "true";
    else {
        if (phi.atoms().size() > 1)
            body << "(and";
        for (const auto& a : phi.atoms()) {
            body << (phi.atoms().size() > 1 ? "\n  " : "") << '(' << fun.at(a.relation);
            for (int v : a.vars)
                body << ' ' << detail::smt_symbol(phi.name(v));
            body << ')';
        }
        if (phi.atoms().size() > 1)
            body << ')';
    }
    os << "(define-fun phi (";
    for (int v = 0; v < phi.free_count(); ++v)
        os << (v ? " " : "") << '(' << detail::smt_symbol(phi.name(v)) << " Int)";
    os << ") Bool\n";
    if (phi.exist_vars().empty())
        os << body.str() << ")\n";
    else {
        os << "(exists (";
        for (const auto& e : phi.exist_vars())
            os << '(' << detail::smt_symbol(e) << " Int)";
        os << ")\n(and";
        for (const auto& e : phi.exist_vars())
            os << " (in_dom " << detail::smt_symbol(e) << ')';
        os << '\n' << body.str() << ")))\n";
    }
    os << "(define-fun goal " << detail::smt_params(static_cast<std::size_t>(goal.arity())) << " Bool "
       << detail::smt_membership(goal) << ")\n";
    for (int v = 0; v < phi.free_count(); ++v)
        os << "(declare-const " << detail::smt_symbol(phi.name(v)) << " Int)\n";
    for (int v = 0; v < phi.free_count(); ++v)
        os << "(assert (in_dom " << detail::smt_symbol(phi.name(v)) << "))\n";
    // A nullary function is applied by its bare name.
    os << "(assert (not (= " << (phi.free_count() ? "(phi" : "phi");
    for (int v = 0; v < phi.free_count(); ++v)
        os << ' ' << detail::smt_symbol(phi.name(v));
    os << (phi.free_count() ? ")" : "") << " (goal";
    for (int o : phi.output())
        os << ' ' << detail::smt_symbol(phi.name(o));
    os << "))))\n(check-sat)\n";
    return os.str();
}

} // namespace clonekit
