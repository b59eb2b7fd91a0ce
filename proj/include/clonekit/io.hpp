#pragma once

#include <clonekit/relation.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace clonekit {

struct NamedOperation {
    std::string name;
    Operation op;
};

struct NamedRelation {
    std::string name;
    Relation rel;
    /// Tuples in file order, before canonicalisation (generating systems care).
    std::vector<std::vector<Value>> ordered;
};

namespace text {

struct Token {
    std::string_view text;
    int line;
    int column;
};

/// Splits input into lines of whitespace-separated tokens; `#` starts a comment.
class Lines {
public:
    explicit Lines(std::string_view input)
    {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= input.size()) {
            const auto eol = input.find('\n', pos);
            const auto line = input.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            ++line_no;
            std::vector<Token> tokens;
            std::size_t i = 0;
            while (i < line.size()) {
                if (line[i] == '#')
                    break;
                if (std::isspace(static_cast<unsigned char>(line[i]))) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#')
                    ++j;
                tokens.push_back({line.substr(i, j - i), line_no, static_cast<int>(i) + 1});
                i = j;
            }
            if (!tokens.empty())
                lines_.push_back(std::move(tokens));
            last_line_ = line_no;
            end_column_ = static_cast<int>(line.size()) + 1;
            if (eol == std::string_view::npos)
                break;
            pos = eol + 1;
        }
    }

    bool done() const noexcept { return next_ >= lines_.size(); }
    const std::vector<Token>& peek() const { return lines_.at(next_); }
    const std::vector<Token>& take() { return lines_.at(next_++); }
    int last_line() const noexcept { return last_line_; }

    /// Error at the end of the input.
    [[noreturn]] void fail_eof(const std::string& what) const { throw ParseError(last_line_, end_column_, what); }

private:
    std::vector<std::vector<Token>> lines_;
    std::size_t next_ = 0;
    int last_line_ = 0;
    int end_column_ = 1;
};

inline long parse_int(const Token& t)
{
    long v = 0;
    const auto* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError(t.line, t.column, "expected an integer, found '" + std::string(t.text) + "'");
    return v;
}

inline Value parse_value(const Token& t, int k)
{
    const long v = parse_int(t);
    if (v < 0 || v >= k)
        throw ParseError(t.line, t.column, "value " + std::to_string(v) + " outside domain 0.." + std::to_string(k - 1));
    return static_cast<Value>(v);
}

/// Expects a line `<keyword> <args...>` with exactly `nargs` arguments.
inline const std::vector<Token>& expect(Lines& lines, std::string_view keyword, std::size_t nargs)
{
    if (lines.done())
        lines.fail_eof("expected '" + std::string(keyword) + "'");
    const auto& l = lines.take();
    if (l[0].text != keyword)
        throw ParseError(l[0].line, l[0].column,
                         "expected '" + std::string(keyword) + "', found '" + std::string(l[0].text) + "'");
    if (l.size() != nargs + 1) {
        const auto& at = l.size() > nargs + 1 ? l[nargs + 1] : l.back();
        throw ParseError(at.line, at.column,
                         "'" + std::string(keyword) + "' takes " + std::to_string(nargs) + " argument(s)");
    }
    return l;
}

inline Domain parse_domain(Lines& lines)
{
    const auto& l = expect(lines, "domain", 1);
    const long k = parse_int(l[1]);
    if (k < 2 || k > Domain::max_size)
        throw ParseError(l[1].line, l[1].column, "domain size must be in 2.." + std::to_string(Domain::max_size));
    return Domain(static_cast<int>(k));
}

inline int parse_arity(Lines& lines, long max_arity)
{
    const auto& l = expect(lines, "arity", 1);
    const long n = parse_int(l[1]);
    if (n < 1 || n > max_arity)
        throw ParseError(l[1].line, l[1].column, "arity must be in 1.." + std::to_string(max_arity));
    return static_cast<int>(n);
}

} // namespace text

/// Parses zero or more `op` blocks:
///
///     op <name>
///     domain <k>
///     arity <n>
///     table <k^n values, may continue over following lines>
inline std::vector<NamedOperation> parse_operations(std::string_view input)
{
    using namespace text;
    Lines lines(input);
    std::vector<NamedOperation> out;
    while (!lines.done()) {
        const auto& head = expect(lines, "op", 1);
        std::string name(head[1].text);
        const Domain domain = parse_domain(lines);
        const int arity = parse_arity(lines, 64);
        std::size_t size = 0;
        try {
            size = Operation::table_size(domain, arity);
        } catch (const ResourceExceeded& e) {
            throw ParseError(head[0].line, head[0].column, e.what());
        }
        if (lines.done())
            lines.fail_eof("expected 'table'");
        const auto& first = lines.take();
        if (first[0].text != "table")
            throw ParseError(first[0].line, first[0].column, "expected 'table', found '" + std::string(first[0].text) + "'");
        std::vector<Value> table;
        table.reserve(size);
        for (std::size_t i = 1; i < first.size(); ++i) {
            if (table.size() == size)
                throw ParseError(first[i].line, first[i].column, "too many table entries");
            table.push_back(parse_value(first[i], domain.size()));
        }
        while (table.size() < size) {
            if (lines.done())
                lines.fail_eof("table ended after " + std::to_string(table.size()) + " of " + std::to_string(size) +
                               " entries");
            const auto& l = lines.peek();
            if (l[0].text == "op")
                throw ParseError(l[0].line, l[0].column,
                                 "table ended after " + std::to_string(table.size()) + " of " + std::to_string(size) +
                                     " entries");
            lines.take();
            for (const auto& t : l) {
                if (table.size() == size)
                    throw ParseError(t.line, t.column, "too many table entries");
                table.push_back(parse_value(t, domain.size()));
            }
        }
        out.push_back({std::move(name), Operation(domain, arity, std::move(table))});
    }
    return out;
}

/// Parses zero or more `rel` blocks:
///
///     rel <name>
///     domain <k>
///     arity <m>
///     tuples
///     <one tuple per line>
///     end
inline std::vector<NamedRelation> parse_relations(std::string_view input)
{
    using namespace text;
    Lines lines(input);
    std::vector<NamedRelation> out;
    while (!lines.done()) {
        const auto& head = expect(lines, "rel", 1);
        std::string name(head[1].text);
        const Domain domain = parse_domain(lines);
        const int arity = parse_arity(lines, 4096);
        expect(lines, "tuples", 0);
        std::vector<std::vector<Value>> tuples;
        for (;;) {
            if (lines.done())
                lines.fail_eof("missing 'end' of relation '" + name + "'");
            const auto& l = lines.take();
            if (l[0].text == "end") {
                if (l.size() != 1)
                    throw ParseError(l[1].line, l[1].column, "'end' takes no arguments");
                break;
            }
            if (l.size() != static_cast<std::size_t>(arity)) {
                const auto& at = l.size() > static_cast<std::size_t>(arity) ? l[static_cast<std::size_t>(arity)] : l.back();
                throw ParseError(at.line, at.column,
                                 "tuple has " + std::to_string(l.size()) + " entries, arity is " + std::to_string(arity));
            }
            std::vector<Value> t;
            t.reserve(l.size());
            for (const auto& tok : l)
                t.push_back(parse_value(tok, domain.size()));
            tuples.push_back(std::move(t));
        }
        Relation rel(domain, arity, tuples);
        out.push_back({std::move(name), std::move(rel), std::move(tuples)});
    }
    return out;
}

inline void write_operation(std::ostream& os, std::string_view name, const Operation& op)
{
    os << "op " << name << '\n' << "domain " << op.domain().size() << '\n' << "arity " << op.arity() << '\n' << "table";
    constexpr std::size_t per_line = 64;
    for (std::size_t i = 0; i < op.size(); ++i) {
        if (i > 0 && i % per_line == 0)
            os << '\n';
        os << ' ' << static_cast<int>(op.at(i));
    }
    os << '\n';
}

/// Enumeration output: `# count <N>` followed by one block per operation,
/// named `<prefix><index>`.
inline void write_operation_list(std::ostream& os, std::span<const Operation> ops, std::string_view prefix)
{
    os << "# count " << ops.size() << '\n';
    for (std::size_t i = 0; i < ops.size(); ++i)
        write_operation(os, std::string(prefix) + std::to_string(i + 1), ops[i]);
}

inline void write_relation(std::ostream& os, std::string_view name, const Relation& rel)
{
    os << "rel " << name << '\n' << "domain " << rel.domain().size() << '\n' << "arity " << rel.arity() << '\n' << "tuples\n";
    for (std::size_t i = 0; i < rel.size(); ++i) {
        const auto t = rel.tuple(i);
        for (std::size_t j = 0; j < t.size(); ++j)
            os << (j ? " " : "") << static_cast<int>(t[j]);
        os << '\n';
    }
    os << "end\n";
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidArgument("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace clonekit
