#include "fifth/error.hpp"
#include "fifth/language.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace fifth {

namespace {

struct SExpr {
    bool is_list = false;
    std::string atom;
    std::vector<SExpr> items;
    int line = 0;
    int column = 0;
};

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    std::vector<SExpr> read_all()
    {
        std::vector<SExpr> out;
        skip();
        while (pos_ < text_.size()) {
            out.push_back(read());
            skip();
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError(ParseErrorKind::Syntax, line_, column_, msg);
    }

    void advance()
    {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip()
    {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr read()
    {
        SExpr e;
        e.line = line_;
        e.column = column_;
        char c = text_[pos_];
        if (c == ')') fail("unexpected ')'");
        if (c == '(') {
            e.is_list = true;
            advance();
            skip();
            while (true) {
                if (pos_ >= text_.size()) throw ParseError(ParseErrorKind::Syntax, e.line, e.column, "unclosed '('");
                if (text_[pos_] == ')') {
                    advance();
                    return e;
                }
                e.items.push_back(read());
                skip();
            }
        }
        while (pos_ < text_.size()) {
            char d = text_[pos_];
            if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
            e.atom.push_back(d);
            advance();
        }
        return e;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

[[noreturn]] void fail(ParseErrorKind kind, const SExpr& at, const std::string& msg)
{
    throw ParseError(kind, at.line, at.column, msg);
}

std::optional<Number> to_number(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start >= s.size() || !(std::isdigit(static_cast<unsigned char>(s[start])) || s[start] == '.')) return std::nullopt;
    const char* first = s.data() + (s[0] == '+' ? 1 : 0);
    const char* last = s.data() + s.size();
    std::int64_t i = 0;
    auto r = std::from_chars(first, last, i);
    if (r.ec == std::errc{} && r.ptr == last) return Number{i};
    double d = 0;
    auto rd = std::from_chars(first, last, d);
    if (rd.ec == std::errc{} && rd.ptr == last) return Number{d};
    return std::nullopt;
}

const std::string& name_of(const SExpr& e)
{
    if (e.is_list) fail(ParseErrorKind::Syntax, e, "expected a name, found a list");
    if (to_number(e.atom)) fail(ParseErrorKind::Syntax, e, "expected a name, found number " + e.atom);
    return e.atom;
}

Number number_of(const SExpr& e)
{
    if (e.is_list) fail(ParseErrorKind::Syntax, e, "expected a number, found a list");
    auto n = to_number(e.atom);
    if (!n) fail(ParseErrorKind::Syntax, e, "expected a number, found '" + e.atom + "'");
    return *n;
}

Number int_of(const SExpr& e)
{
    Number n = number_of(e);
    if (!n.is_int()) fail(ParseErrorKind::Syntax, e, "expected an integer, found " + e.atom);
    return n;
}

const std::string& head_of(const SExpr& e)
{
    if (!e.is_list || e.items.empty() || e.items[0].is_list) fail(ParseErrorKind::Syntax, e, "expected a form");
    return e.items[0].atom;
}

void expect_arity(const SExpr& e, std::size_t operands, const std::string& form)
{
    if (e.items.size() != operands + 1)
        fail(ParseErrorKind::ArityMismatch, e,
             "'" + form + "' takes " + std::to_string(operands) + " operands, got " + std::to_string(e.items.size() - 1));
}

Statement parse_stmt(const SExpr& e);

std::vector<Statement> parse_block(const SExpr& e)
{
    if (!e.is_list) fail(ParseErrorKind::Syntax, e, "expected a statement list");
    std::vector<Statement> out;
    for (const auto& s : e.items) out.push_back(parse_stmt(s));
    return out;
}

Statement parse_stmt(const SExpr& e)
{
    const std::string& head = head_of(e);
    Statement s;
    s.line = e.line;
    s.column = e.column;
    auto names_from = [&](std::size_t from) {
        for (std::size_t i = from; i < e.items.size(); ++i) s.names.push_back(name_of(e.items[i]));
    };
    if (head == "cell") {
        s.kind = StmtKind::Cell;
        expect_arity(e, 1, head);
        names_from(1);
    } else if (head == "int") {
        s.kind = StmtKind::Int;
        expect_arity(e, 3, head);
        s.names.push_back(name_of(e.items[1]));
        s.numbers = {int_of(e.items[2]), int_of(e.items[3])};
    } else if (head == "const") {
        s.kind = StmtKind::Const;
        expect_arity(e, 2, head);
        s.names.push_back(name_of(e.items[1]));
        s.numbers = {number_of(e.items[2])};
    } else if (head == "sum" || head == "product") {
        s.kind = head == "sum" ? StmtKind::Sum : StmtKind::Product;
        expect_arity(e, 3, head);
        names_from(1);
    } else if (head == "equal" || head == "lesseq") {
        s.kind = head == "equal" ? StmtKind::Equal : StmtKind::LessEq;
        expect_arity(e, 2, head);
        names_from(1);
    } else if (head == "alldiff") {
        s.kind = StmtKind::AllDiff;
        names_from(1);
    } else if (head == "choose") {
        s.kind = StmtKind::Choose;
        if (e.items.size() < 3) fail(ParseErrorKind::ArityMismatch, e, "'choose' needs a name and at least one value");
        s.names.push_back(name_of(e.items[1]));
        for (std::size_t i = 2; i < e.items.size(); ++i) s.numbers.push_back(int_of(e.items[i]));
    } else if (head == "if") {
        s.kind = StmtKind::If;
        expect_arity(e, 3, head);
        s.names.push_back(name_of(e.items[1]));
        s.then_body = parse_block(e.items[2]);
        s.else_body = parse_block(e.items[3]);
    } else if (head == "call") {
        s.kind = StmtKind::Call;
        if (e.items.size() < 2) fail(ParseErrorKind::ArityMismatch, e, "'call' needs a target");
        s.target = name_of(e.items[1]);
        names_from(2);
    } else {
        fail(ParseErrorKind::UnknownForm, e, "unknown form '" + head + "'");
    }
    return s;
}

void collect_locals(const std::vector<Statement>& body, const std::set<std::string>& params, std::vector<std::string>& out,
                    std::set<std::string>& seen)
{
    for (const auto& s : body) {
        switch (s.kind) {
        case StmtKind::Cell:
        case StmtKind::Int:
        case StmtKind::Const:
        case StmtKind::Choose:
            if (!params.count(s.names[0]) && seen.insert(s.names[0]).second) out.push_back(s.names[0]);
            break;
        case StmtKind::If:
            collect_locals(s.then_body, params, out, seen);
            collect_locals(s.else_body, params, out, seen);
            break;
        default:
            break;
        }
    }
}

void check_names(const Program& p, const Definition& def, const std::vector<Statement>& body)
{
    for (const auto& s : body) {
        for (const auto& n : s.names)
            if (!def.declares(n))
                throw ParseError(ParseErrorKind::UnboundName, s.line, s.column,
                                 "unbound name '" + n + "' in definition '" + def.name + "'");
        if (s.kind == StmtKind::Call) {
            auto it = p.definitions.find(s.target);
            if (it == p.definitions.end())
                throw ParseError(ParseErrorKind::UnboundName, s.line, s.column, "unbound name '" + s.target + "'");
            if (it->second.params.size() != s.names.size())
                throw ParseError(ParseErrorKind::ArityMismatch, s.line, s.column,
                                 "'" + s.target + "' takes " + std::to_string(it->second.params.size()) +
                                     " arguments, got " + std::to_string(s.names.size()));
        }
        check_names(p, def, s.then_body);
        check_names(p, def, s.else_body);
    }
}

Definition parse_def(const SExpr& e)
{
    if (e.items.size() < 2 || !e.items[1].is_list || e.items[1].items.empty())
        fail(ParseErrorKind::Syntax, e, "expected (def (name params...) body...)");
    Definition d;
    d.line = e.line;
    const auto& sig = e.items[1];
    d.name = name_of(sig.items[0]);
    std::set<std::string> params;
    for (std::size_t i = 1; i < sig.items.size(); ++i) {
        const auto& n = name_of(sig.items[i]);
        if (!params.insert(n).second) fail(ParseErrorKind::Syntax, sig.items[i], "duplicate parameter '" + n + "'");
        d.params.push_back(n);
    }
    for (std::size_t i = 2; i < e.items.size(); ++i) d.body.push_back(parse_stmt(e.items[i]));
    std::set<std::string> seen;
    collect_locals(d.body, params, d.locals, seen);
    return d;
}

QuerySpec parse_query(const SExpr& e)
{
    if (e.items.size() < 3 || !e.items[1].is_list || e.items[1].items.empty())
        fail(ParseErrorKind::Syntax, e, "expected (query (entry bindings...) (show names...) options...)");
    QuerySpec q;
    const auto& call = e.items[1];
    q.entry = name_of(call.items[0]);
    for (std::size_t i = 1; i < call.items.size(); ++i) {
        const auto& b = call.items[i];
        if (!b.is_list || b.items.size() != 2) fail(ParseErrorKind::Syntax, b, "expected (name value) binding");
        q.bindings.emplace_back(name_of(b.items[0]), number_of(b.items[1]));
    }
    const auto& show = e.items[2];
    if (head_of(show) != "show") fail(ParseErrorKind::Syntax, show, "expected (show names...)");
    for (std::size_t i = 1; i < show.items.size(); ++i) q.show.push_back(name_of(show.items[i]));
    for (std::size_t i = 3; i < e.items.size(); ++i) {
        const auto& opt = e.items[i];
        const auto& head = head_of(opt);
        expect_arity(opt, 1, head);
        auto count = [&]() {
            Number n = int_of(opt.items[1]);
            if (n.as_int() < 0) fail(ParseErrorKind::Syntax, opt.items[1], "budget must be >= 0");
            return static_cast<std::uint64_t>(n.as_int());
        };
        if (head == "depth") {
            q.depth = count();
        } else if (head == "steps") {
            q.steps = count();
        } else if (head == "nodes") {
            q.nodes = count();
        } else if (head == "precision") {
            q.precision = number_of(opt.items[1]).as_real();
            if (*q.precision < 0) fail(ParseErrorKind::Syntax, opt.items[1], "precision must be >= 0");
        } else if (head == "minimize") {
            q.minimize = name_of(opt.items[1]);
        } else {
            fail(ParseErrorKind::UnknownForm, opt, "unknown query option '" + head + "'");
        }
    }
    return q;
}

}  // namespace

bool Definition::declares(const std::string& n) const
{
    return std::find(params.begin(), params.end(), n) != params.end() ||
           std::find(locals.begin(), locals.end(), n) != locals.end();
}

const Definition& Program::definition(const std::string& name) const
{
    auto it = definitions.find(name);
    if (it == definitions.end()) throw StructuralError("undefined definition '" + name + "'");
    return it->second;
}

std::optional<std::string> Program::main() const
{
    if (query) return query->entry;
    return std::nullopt;
}

Program parse(const std::string& text)
{
    Program p;
    Reader reader(text);
    auto forms = reader.read_all();
    const SExpr* query_form = nullptr;
    for (const auto& f : forms) {
        const auto& head = head_of(f);
        if (head == "def") {
            if (query_form) fail(ParseErrorKind::Syntax, f, "definitions must precede the query");
            Definition d = parse_def(f);
            if (p.definitions.count(d.name)) fail(ParseErrorKind::Syntax, f, "duplicate definition '" + d.name + "'");
            p.order.push_back(d.name);
            p.definitions.emplace(d.name, std::move(d));
        } else if (head == "query") {
            if (query_form) fail(ParseErrorKind::Syntax, f, "only one query per program");
            query_form = &f;
        } else {
            fail(ParseErrorKind::UnknownForm, f, "unknown top-level form '" + head + "'");
        }
    }
    for (const auto& name : p.order) {
        const auto& def = p.definitions.at(name);
        check_names(p, def, def.body);
    }
    if (query_form) {
        QuerySpec q = parse_query(*query_form);
        auto it = p.definitions.find(q.entry);
        if (it == p.definitions.end())
            fail(ParseErrorKind::UnboundName, query_form->items[1], "unbound name '" + q.entry + "'");
        const auto& def = it->second;
        auto check = [&](const std::string& n) {
            if (!def.declares(n))
                fail(ParseErrorKind::UnboundName, *query_form, "unbound name '" + n + "' in query on '" + q.entry + "'");
        };
        for (const auto& [n, v] : q.bindings) check(n);
        for (const auto& n : q.show) check(n);
        if (q.minimize) check(*q.minimize);
        p.query = std::move(q);
    }
    return p;
}

}  // namespace fifth
