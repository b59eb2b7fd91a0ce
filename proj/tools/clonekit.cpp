#include <clonekit/clonekit.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace clonekit;

enum Exit { ok = 0, check_failed = 1, input_error = 2, resource_error = 3 };

void write_output(const std::string& path, const std::string& content)
{
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidArgument("cannot write '" + path + "'");
    out << content;
    if (!out)
        throw InvalidArgument("failed writing '" + path + "'");
}

OperationSet load_operations(const std::string& path)
{
    const auto named = parse_operations(read_file(path));
    if (named.empty())
        throw InvalidArgument("'" + path + "' contains no operations");
    OperationSet set(named.front().op.domain());
    for (const auto& n : named)
        set.insert(n.op);
    return set;
}

RelationEnv load_relations(const std::vector<std::string>& paths)
{
    std::optional<RelationEnv> env;
    for (const auto& path : paths)
        for (auto& n : parse_relations(read_file(path))) {
            if (!env)
                env.emplace(n.rel.domain());
            env->add(std::move(n.name), std::move(n.rel));
        }
    if (!env)
        throw InvalidArgument("no relations given");
    return std::move(*env);
}

NamedRelation load_single_relation(const std::string& path)
{
    auto named = parse_relations(read_file(path));
    if (named.size() != 1)
        throw InvalidArgument("'" + path + "' must contain exactly one relation");
    return std::move(named.front());
}

std::string operations_text(std::span<const Operation> ops, std::string_view prefix)
{
    std::ostringstream os;
    write_operation_list(os, ops, prefix);
    return os.str();
}

std::string relation_text(std::string_view name, const Relation& rel)
{
    std::ostringstream os;
    write_relation(os, name, rel);
    return os.str();
}

std::string command_line(int argc, char** argv)
{
    std::string s = "clonekit";
    for (int i = 1; i < argc; ++i)
        s += std::string(" ") + argv[i];
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Computations with clones, centralisers and primitive positive definitions over finite domains"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    int k = 3;
    int arity = 1;
    unsigned threads = 1;
    std::string out_path;
    int status = ok;

    auto* snow = app.add_subcommand("snow", "Emit T, f and the five-atom formula for a domain size");
    std::string emit_t, emit_f, emit_formula;
    snow->add_option("--k", k, "Domain size (>= 3)")->required();
    snow->add_option("--emit-t", emit_t, "Write T in operation format");
    snow->add_option("--emit-f", emit_f, "Write f in operation format");
    snow->add_option("--emit-formula", emit_formula, "Write the formula defining graph(f) from graph(T)");

    auto* verify = app.add_subcommand("verify-snow", "Check the formula and the separation of f from <T>");
    std::string mode = "full", report_path;
    SeparationOptions sep;
    verify->add_option("--k", k, "Domain size (>= 3)")->required();
    verify->add_option("--mode", mode, "full or witness")->check(CLI::IsMember({"full", "witness"}));
    verify->add_option("--report", report_path, "Report path (default: stdout)");
    verify->add_option("--threads", threads, "Worker threads");
    verify->add_option("--samples", sep.samples, "Random squares per free tuple in witness mode");
    verify->add_option("--seed", sep.seed, "Seed for witness-mode sampling");

    auto* central = app.add_subcommand("centraliser", "Enumerate a slice of the centraliser of a set of operations");
    std::string ops_path;
    EnumerationOptions enum_opt;
    central->add_option("--ops", ops_path, "Operations file")->required();
    central->add_option("--arity", arity, "Arity 1..3")->required()->check(CLI::Range(1, 3));
    central->add_option("--out", out_path, "Output path (default: stdout)");
    central->add_option("--threads", threads, "Worker threads");
    central->add_option("--budget", enum_opt.budget, "Candidate budget");

    auto* clone = app.add_subcommand("clone", "Generate a fragment of the clone generated by operations");
    CloneOptions clone_opt;
    clone->add_option("--ops", ops_path, "Generators file")->required();
    clone->add_option("--arity", arity, "Fragment arity")->required()->check(CLI::PositiveNumber);
    clone->add_option("--out", out_path, "Output path (default: stdout)");
    clone->add_option("--cap", clone_opt.cap, "Largest fragment size");

    auto* ppdef = app.add_subcommand("ppdef", "Synthesize a pp definition from a generating set");
    std::vector<std::string> relation_paths;
    std::string gen_path, smt_path, validate_path;
    ppdef->add_option("--relations", relation_paths, "Relation files")->required();
    ppdef->add_option("--gen", gen_path, "Generating set (one relation block)")->required();
    ppdef->add_option("--out", out_path, "Formula output path (default: stdout)");
    ppdef->add_option("--smt", smt_path, "Write an SMT-LIB check against the --validate relation");
    ppdef->add_option("--validate", validate_path, "Relation the formula must define");
    ppdef->add_option("--threads", threads, "Worker threads for validation");

    auto* evalf = app.add_subcommand("eval-formula", "Evaluate a pp formula over relations");
    std::string formula_path;
    evalf->add_option("--formula", formula_path, "Formula file")->required();
    evalf->add_option("--relations", relation_paths, "Relation files")->required();
    evalf->add_option("--out", out_path, "Output path (default: stdout)");
    evalf->add_option("--threads", threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : input_error;
    }

    try {
        if (*snow) {
            const SnowInstance s(k);
            const auto phi = snow_pp_formula(k);
            std::cout << "k=" << k << " T-arity=" << s.n() * s.n() << " f-arity=" << s.n()
                      << " atoms=" << phi.atoms().size() << " exists=" << phi.exist_vars().size() << '\n';
            if (!emit_t.empty()) {
                std::ostringstream os;
                write_operation(os, "T", s.t_operation());
                write_output(emit_t, os.str());
            }
            if (!emit_f.empty()) {
                std::ostringstream os;
                write_operation(os, "f", s.f_operation());
                write_output(emit_f, os.str());
            }
            if (!emit_formula.empty())
                write_output(emit_formula, emit_text(phi));
        } else if (*verify) {
            sep.mode = mode == "full" ? SeparationMode::full : SeparationMode::witness;
            sep.threads = threads;
            const auto report = verify_separation(k, sep);
            write_output(report_path, report.text() + "# command: " + command_line(argc, argv) + "\n");
            status = report.passed() ? ok : check_failed;
        } else if (*central) {
            enum_opt.threads = threads;
            const auto F = load_operations(ops_path);
            EnumerationStats stats;
            const auto slice = enumerate_centraliser(F, arity, enum_opt, &stats);
            write_output(out_path, operations_text(slice, "g"));
            std::cerr << "candidates " << stats.candidate_space << ", tested " << stats.leaves << '\n';
        } else if (*clone) {
            const auto gens = load_operations(ops_path);
            const auto fragment = clone_fragment(gens, arity, clone_opt);
            write_output(out_path, operations_text(fragment, "t"));
        } else if (*ppdef) {
            const auto env = load_relations(relation_paths);
            const auto gen_rel = load_single_relation(gen_path);
            const auto gen = dedup_rows(gen_rel.rel.domain(), gen_rel.ordered);
            const auto result = synthesize_ppdef(env, gen);
            write_output(out_path, result.stats.line() + "\n" + emit_text(result.formula));
            std::optional<NamedRelation> goal;
            if (!validate_path.empty())
                goal = load_single_relation(validate_path);
            if (!smt_path.empty()) {
                if (!goal)
                    throw InvalidArgument("--smt needs --validate to name the goal relation");
                write_output(smt_path, emit_smt(result.formula, env, goal->rel));
            }
            if (goal) {
                const auto v = validate_synthesis(result, env, goal->rel, {threads});
                auto show = [](const char* what, const std::vector<std::vector<Value>>& ts) {
                    for (const auto& t : ts) {
                        std::cerr << what;
                        for (Value x : t)
                            std::cerr << ' ' << static_cast<int>(x);
                        std::cerr << '\n';
                    }
                };
                show("extra", v.extra);
                show("missing", v.missing);
                std::cerr << (v.ok ? "PASS" : "FAIL") << " validate " << goal->name << '\n';
                status = v.ok ? ok : check_failed;
            }
        } else if (*evalf) {
            const auto phi = parse_formula(read_file(formula_path));
            const auto env = load_relations(relation_paths);
            const auto rel = eval_formula(phi, env, {threads});
            write_output(out_path, relation_text("phi", rel));
        }
    } catch (const ResourceExceeded& e) {
        std::cerr << "clonekit: resource limit: " << e.what() << '\n';
        return resource_error;
    } catch (const ParseError& e) {
        std::cerr << "clonekit: parse error: " << e.what() << '\n';
        return input_error;
    } catch (const Error& e) {
        std::cerr << "clonekit: " << e.what() << '\n';
        return input_error;
    }
    return status;
}
