#include "kbqa/sparql/parser.hpp"

#include <cctype>

#include "kbqa/util.hpp"
#include "lexer.hpp"

namespace kbqa::sparql {

namespace {

using Kind = Token::Kind;

bool word_is(const Token& t, std::string_view kw) {
    return t.kind == Kind::Word && util::iequals(t.text, kw);
}

class Parser {
  public:
    Parser(std::string_view text, Dialect dialect) : lex_(text), dialect_(dialect) {}

    Query parse() {
        Query q;
        q.dialect = dialect_;
        parse_form(q);
        Token w = lex_.next();
        if (!word_is(w, "WHERE")) fail(w.offset, "expected WHERE");
        Token open = lex_.next();
        if (open.kind != Kind::LBrace) fail(open.offset, "expected '{'");
        parse_body(q);
        parse_tail(q);
        Token end = lex_.next();
        if (end.kind != Kind::End) fail(end.offset, "unexpected trailing input");
        return q;
    }

  private:
    [[noreturn]] void fail(std::size_t offset, const std::string& msg) {
        throw ParseError(ParseError::Kind::Syntax, offset, msg);
    }

    [[noreturn]] void fail_dialect(std::size_t offset, const std::string& msg) {
        throw ParseError(ParseError::Kind::Dialect, offset, msg);
    }

    void expect(Kind kind, const char* what) {
        Token t = lex_.next();
        if (t.kind != kind) fail(t.offset, std::string("expected ") + what);
    }

    void parse_form(Query& q) {
        Token t = lex_.next();
        if (word_is(t, "ASK")) {
            if (dialect_ == Dialect::Freebase)
                fail_dialect(t.offset, "ASK is not a Freebase form");
            q.form = QueryForm::Ask;
            return;
        }
        if (!word_is(t, "SELECT")) fail(t.offset, "expected SELECT or ASK");
        const Token& p = lex_.peek();
        if (word_is(p, "count")) {
            Token c = lex_.next();
            expect(Kind::LParen, "'('");
            expect(Kind::Star, "'*'");
            expect(Kind::RParen, "')'");
            if (dialect_ == Dialect::Wikidata)
                fail_dialect(c.offset, "SELECT count(*) is not a Wikidata form");
            q.form = QueryForm::SelectCount;
            return;
        }
        q.form = QueryForm::Select;
        if (word_is(p, "DISTINCT")) {
            lex_.next();
            q.distinct = true;
        }
        while (lex_.peek().kind == Kind::Variable) q.projected.push_back(make_variable(lex_.next().text));
        if (q.projected.empty()) fail(lex_.peek().offset, "expected projection variables");
    }

    void parse_body(Query& q) {
        if (lex_.peek().kind == Kind::RBrace) {
            lex_.next();
            return;
        }
        while (true) {
            parse_item(q);
            if (lex_.peek().kind == Kind::Dot) {
                lex_.next();
                if (lex_.peek().kind == Kind::RBrace) {  // trailing separator
                    lex_.next();
                    return;
                }
                continue;
            }
            if (lex_.peek().kind == Kind::RBrace) {
                lex_.next();
                return;
            }
            fail(lex_.peek().offset, "expected '.' or '}'");
        }
    }

    void parse_item(Query& q) {
        if (word_is(lex_.peek(), "FILTER")) {
            Token f = lex_.next();
            expect(Kind::LParen, "'('");
            Term left = parse_term();
            Token ne = lex_.next();
            if (ne.kind != Kind::NotEq) fail(ne.offset, "expected '!='");
            Term right = parse_term();
            expect(Kind::RParen, "')'");
            if (left == right) fail(f.offset, "filter compares a term to itself");
            q.filters.push_back({left, right});
            return;
        }
        TriplePattern tp;
        tp.subject = parse_term();
        const Token& p = lex_.peek();
        if (p.kind == Kind::Word && p.text == "a") {  // 'a' is case-sensitive
            Token a = lex_.next();
            if (dialect_ == Dialect::Wikidata)
                fail_dialect(a.offset, "unary type assertions are Freebase-only");
            Token cls = lex_.next();
            if (cls.kind != Kind::PrefixedName || cls.prefix != "ns" || !is_dotted_property(cls.text))
                fail(cls.offset, "expected an ns: class name after 'a'");
            tp.predicate = UnaryTypeAssertion{make_freebase_property(cls.text)};
        } else {
            PropertyPath path;
            path.steps.push_back(parse_step());
            while (lex_.peek().kind == Kind::Slash) {
                Token s = lex_.next();
                if (dialect_ == Dialect::Wikidata)
                    fail_dialect(s.offset, "multi-step paths are Freebase-only");
                path.steps.push_back(parse_step());
            }
            tp.predicate = std::move(path);
            tp.object = parse_term();
        }
        q.triples.push_back(std::move(tp));
    }

    PathStep parse_step() {
        bool reversed = false;
        if (lex_.peek().kind == Kind::Caret) {
            Token c = lex_.next();
            if (dialect_ == Dialect::Wikidata)
                fail_dialect(c.offset, "reverse marks are Freebase-only");
            reversed = true;
        }
        Token t = lex_.next();
        if (t.kind != Kind::PrefixedName) fail(t.offset, "expected a property");
        if (t.prefix == "wdt") {
            if (dialect_ == Dialect::Freebase)
                fail_dialect(t.offset, "wdt: code in a Freebase query");
            if (!is_pcode(t.text)) fail(t.offset, "malformed P-code wdt:" + t.text);
            return {make_property(t.text), reversed};
        }
        if (t.prefix == "ns") {
            if (dialect_ == Dialect::Wikidata)
                fail_dialect(t.offset, "ns: name in a Wikidata query");
            if (is_mid_text(t.text)) fail(t.offset, "MID used as a property");
            if (!is_dotted_property(t.text)) fail(t.offset, "malformed property name ns:" + t.text);
            return {make_freebase_property(t.text), reversed};
        }
        if (t.prefix == "wd") {
            if (dialect_ == Dialect::Freebase)
                fail_dialect(t.offset, "wd: code in a Freebase query");
            fail(t.offset, "entity code used as a property");
        }
        fail(t.offset, "unknown prefix '" + t.prefix + ":'");
    }

    Term parse_term() {
        Token t = lex_.next();
        switch (t.kind) {
            case Kind::Variable: return make_variable(t.text);
            case Kind::Word:
                if (is_placeholder_surface(t.text)) return make_placeholder(t.text);
                fail(t.offset, "unexpected word '" + t.text + "'");
            case Kind::PrefixedName:
                if (t.prefix == "wd") {
                    if (dialect_ == Dialect::Freebase)
                        fail_dialect(t.offset, "wd: code in a Freebase query");
                    if (!is_qcode(t.text)) fail(t.offset, "malformed Q-code wd:" + t.text);
                    return make_entity(t.text);
                }
                if (t.prefix == "ns") {
                    if (dialect_ == Dialect::Wikidata)
                        fail_dialect(t.offset, "ns: name in a Wikidata query");
                    if (!is_mid_text(t.text)) fail(t.offset, "expected an entity MID, got ns:" + t.text);
                    return make_mid(t.text);
                }
                if (t.prefix == "wdt") {
                    if (dialect_ == Dialect::Freebase)
                        fail_dialect(t.offset, "wdt: code in a Freebase query");
                    fail(t.offset, "property code in an entity position");
                }
                fail(t.offset, "unknown prefix '" + t.prefix + ":'");
            default: fail(t.offset, "expected a term");
        }
    }

    void parse_tail(Query& q) {
        if (word_is(lex_.peek(), "ORDER")) {
            lex_.next();
            Token by = lex_.next();
            if (!word_is(by, "BY")) fail(by.offset, "expected BY after ORDER");
            while (lex_.peek().kind == Kind::Variable)
                q.order_by.push_back(make_variable(lex_.next().text));
            if (q.order_by.empty()) fail(lex_.peek().offset, "expected variables after ORDER BY");
        }
        if (word_is(lex_.peek(), "LIMIT")) {
            lex_.next();
            Token n = lex_.next();
            if (n.kind != Kind::Integer) fail(n.offset, "expected an integer after LIMIT");
            long value = 0;
            try {
                value = std::stol(n.text);
            } catch (const std::exception&) {
                fail(n.offset, "LIMIT out of range");
            }
            if (value <= 0) fail(n.offset, "LIMIT must be positive");
            q.limit = value;
        }
    }

    Lexer lex_;
    Dialect dialect_;
};

}  // namespace

Query parse_query(std::string_view text, Dialect dialect) {
    return Parser(text, dialect).parse();
}

}  // namespace kbqa::sparql
