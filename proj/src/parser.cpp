#include <cctype>
#include <charconv>
#include <optional>

#include <fmt/format.h>

#include "mtlc/error.hpp"
#include "mtlc/session.hpp"
#include "mtlc/syntax.hpp"

namespace mtlc {

const std::set<std::string> &constant_names() {
    static const std::set<std::string> names = {
        "thread_create", "chneg_create", "chneg_create2", "send", "recv", "channeg_send", "channeg_recv",
        "close", "channeg_close", "chposneg_link", "service_create", "service_request", "randbit",
        "+", "-", "*", "/", "mod", "<", "<=", ">", ">=", "=", "<>", "&&", "||", "not"};
    return names;
}

namespace {

const std::set<std::string> kReserved = {
    "sesstype", "fun", "let", "in", "if", "then", "else", "lam", "llam", "fix", "offer", "select", "fst",
    "snd", "app", "true", "false", "not", "mod", "nil", "nilbar", "rcv", "dual", "sndtag", "rcvtag",
    "int", "bool", "unit", "chpos", "chneg", "service"};

enum class Tok { Ident, Int, Res, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    std::int64_t value = 0;
    SourceLoc loc;
};

std::vector<Token> lex(std::string_view src) {
    static const char *const symbols[] = {"-<lin>", "::", "=>", "->", "<=", ">=", "<>", "&&", "||", "(", ")",
                                          "{", "}", "[", "]", ",", ":", ";", "=", "*", "+", "-", "/", "<",
                                          ">", "|"};
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto read_number = [&](SourceLoc loc) {
        std::size_t start = i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(src.data() + start, src.data() + i, v);
        if (ec != std::errc()) throw Error("E100", loc, "integer literal out of range");
        return v;
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (src.substr(i, 2) == "//") {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        SourceLoc loc{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) advance(1);
            out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), 0, loc});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::int64_t v = read_number(loc);
            out.push_back({Tok::Int, std::to_string(v), v, loc});
            continue;
        }
        if (c == '$' || src.substr(i, 2) == "~$") {
            std::string sign = c == '$' ? "$" : "~$";
            advance(sign.size());
            if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i])))
                throw Error("E100", loc, "expected channel number after '" + sign + "'");
            std::int64_t v = read_number(loc);
            out.push_back({Tok::Res, sign, v, loc});
            continue;
        }
        bool matched = false;
        for (const char *sym : symbols) {
            std::string_view s(sym);
            if (src.substr(i, s.size()) == s) {
                out.push_back({Tok::Sym, std::string(s), 0, loc});
                advance(s.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw Error("E100", loc, fmt::format("unexpected character '{}'", c));
    }
    out.push_back({Tok::End, "", 0, {line, col}});
    return out;
}

std::string describe(const Token &t) {
    switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Res: return fmt::format("'{}{}'", t.text, t.value);
    default: return "'" + t.text + "'";
    }
}

const std::map<std::string, int> kBinaryLevel = {
    {"||", 0}, {"&&", 1}, {"<", 2}, {"<=", 2}, {">", 2}, {">=", 2}, {"=", 2}, {"<>", 2},
    {"+", 3},  {"-", 3},  {"*", 4}, {"/", 4},  {"mod", 4}};

class Parser {
public:
    Parser(std::string_view text, std::set<std::string> sessions, std::set<std::string> functions)
        : toks_(lex(text)), sessions_(std::move(sessions)), functions_(std::move(functions)) {}

    Program program() {
        for (std::size_t k = 0; k + 1 < toks_.size(); ++k)
            if (toks_[k].kind == Tok::Ident && toks_[k].text == "sesstype" && toks_[k + 1].kind == Tok::Ident)
                sessions_.insert(toks_[k + 1].text);
        Program p;
        std::set<std::string> seen_sessions;
        while (!at_end()) {
            if (is_word("sesstype")) {
                SourceLoc loc = next().loc;
                std::string name = ident("session type name");
                if (!seen_sessions.insert(name).second)
                    throw Error("E100", loc, fmt::format("duplicate session type '{}'", name));
                expect("=");
                p.sessions.push_back({name, session(), loc});
            } else if (is_word("fun")) {
                fundef(p);
            } else {
                throw Error("E100", peek().loc, fmt::format("expected 'sesstype' or 'fun', found {}", describe(peek())));
            }
        }
        SessionEnv env(p.sessions);
        try {
            env.validate();
        } catch (const Error &e) {
            throw Error(e.code(), p.sessions.empty() ? SourceLoc{1, 1} : p.sessions.front().loc, e.what());
        }
        return p;
    }

    Expr single_expr() {
        Expr e = expr();
        expect_end();
        return e;
    }
    Type single_type() {
        Type t = vtype();
        expect_end();
        return t;
    }
    Session single_session() {
        Session s = session();
        expect_end();
        return s;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::set<std::string> sessions_;
    std::set<std::string> functions_;
    std::vector<std::pair<std::string, bool>> scope_;  // name, is fix-variable

    const Token &peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token &next() {
        const Token &t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_sym(const char *s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
    }
    bool is_word(const char *w, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
    }
    bool accept(const char *s) {
        if (!is_sym(s)) return false;
        next();
        return true;
    }
    void expect(const char *s) {
        if (!accept(s)) throw Error("E100", peek().loc, fmt::format("expected '{}', found {}", s, describe(peek())));
    }
    void expect_word(const char *w) {
        if (!is_word(w)) throw Error("E100", peek().loc, fmt::format("expected '{}', found {}", w, describe(peek())));
        next();
    }
    void expect_end() {
        if (!at_end()) throw Error("E100", peek().loc, fmt::format("unexpected {}", describe(peek())));
    }
    // Any identifier, reserved words included (tags such as nil).
    std::string tag() {
        if (peek().kind != Tok::Ident)
            throw Error("E100", peek().loc, fmt::format("expected tag, found {}", describe(peek())));
        return next().text;
    }
    std::string ident(const char *what) {
        const Token &t = peek();
        if (t.kind != Tok::Ident || kReserved.contains(t.text))
            throw Error("E100", t.loc, fmt::format("expected {}, found {}", what, describe(t)));
        return next().text;
    }
    std::string binder() {
        SourceLoc loc = peek().loc;
        std::string name = ident("variable name");
        if (constant_names().contains(name))
            throw Error("E100", loc, fmt::format("'{}' is a built-in constant and cannot be bound", name));
        return name;
    }

    // ---- sessions and types ----

    Session session() {
        const Token &t = peek();
        if (accept("(")) {
            Session s = session();
            expect(")");
            return s;
        }
        if (t.kind != Tok::Ident)
            throw Error("E100", t.loc, fmt::format("expected session type, found {}", describe(t)));
        if (t.text == "nil") return next(), s_nil();
        if (t.text == "nilbar") return next(), s_nilbar();
        if (t.text == "snd" || t.text == "rcv") {
            bool is_snd = next().text == "snd";
            expect("(");
            Type payload = vtype();
            expect(")");
            expect("::");
            Session rest = session();
            return is_snd ? s_snd(payload, rest) : s_rcv(payload, rest);
        }
        if (t.text == "dual") {
            next();
            expect("(");
            Session s = session();
            expect(")");
            return dual(s);
        }
        if (t.text == "sndtag" || t.text == "rcvtag") {
            ChoiceDir dir = next().text == "sndtag" ? ChoiceDir::SndTag : ChoiceDir::RcvTag;
            expect("{");
            std::vector<sess::Branch> branches;
            do {
                std::string name = tag();
                expect("=>");
                branches.push_back({name, session()});
            } while (accept("|"));
            expect("}");
            return s_choice(dir, std::move(branches));
        }
        if (kReserved.contains(t.text))
            throw Error("E100", t.loc, fmt::format("expected session type, found {}", describe(t)));
        if (!sessions_.contains(t.text))
            throw Error("E101", t.loc, fmt::format("unknown session type '{}'", t.text));
        return s_named(next().text);
    }

    Type vtype() {
        Type left = prod_type();
        if (accept("->")) return t_arrow(Linearity::Intuitionistic, left, vtype());
        if (accept("-<lin>")) return t_arrow(Linearity::Linear, left, vtype());
        return left;
    }

    Type prod_type() {
        Type left = atom_type();
        if (accept("*")) return t_prod(left, prod_type());
        return left;
    }

    Type atom_type() {
        const Token &t = peek();
        if (accept("(")) {
            Type inner = vtype();
            expect(")");
            return inner;
        }
        if (t.kind == Tok::Ident) {
            if (t.text == "int") return next(), t_int();
            if (t.text == "bool") return next(), t_bool();
            if (t.text == "unit") return next(), t_unit();
            if (t.text == "chpos" || t.text == "chneg" || t.text == "service") {
                std::string head = next().text;
                expect("(");
                Session s = session();
                expect(")");
                if (head == "chpos") return t_chpos(s);
                if (head == "chneg") return t_chneg(s);
                return t_service(s);
            }
        }
        throw Error("E100", t.loc, fmt::format("expected type, found {}", describe(t)));
    }

    // ---- functions ----

    void fundef(Program &p) {
        SourceLoc loc = next().loc;
        std::string name = ident("function name");
        if (constant_names().contains(name) || functions_.contains(name))
            throw Error("E100", loc, fmt::format("duplicate definition of '{}'", name));
        expect("(");
        std::vector<Param> params;
        if (!is_sym(")")) {
            do {
                std::string x = binder();
                expect(":");
                params.push_back({x, vtype()});
            } while (accept(","));
        }
        expect(")");
        Type result;
        if (accept(":")) result = vtype();
        expect("=");
        if (name == "main") {
            if (!params.empty() || result)
                throw Error("E100", loc, "main takes no parameters and no result annotation");
            if (p.main) throw Error("E100", loc, "duplicate definition of 'main'");
            p.main = expr();
            p.main_loc = loc;
            return;
        }
        if (!result) throw Error("E212", loc, fmt::format("function '{}' needs a result type", name));
        functions_.insert(name);
        for (const auto &prm : params) scope_.push_back({prm.name, false});
        Expr body = expr();
        scope_.resize(scope_.size() - params.size());
        p.functions.push_back({name, std::move(params), result, body, loc});
    }

    // ---- expressions ----

    template <typename F>
    Expr with_bound(const std::vector<std::string> &names, bool fix, F &&body) {
        for (const auto &n : names) scope_.push_back({n, fix});
        Expr e = body();
        scope_.resize(scope_.size() - names.size());
        return e;
    }

    Expr expr() {
        const Token &t = peek();
        SourceLoc loc = t.loc;
        if (is_word("let")) {
            next();
            if (accept("(")) {
                std::string x1 = binder();
                expect(",");
                std::string x2 = binder();
                expect(")");
                expect("=");
                Expr bound = expr();
                expect_word("in");
                Expr body = with_bound({x1, x2}, false, [&] { return expr(); });
                return make_expr(ex::LetPair{x1, x2, bound, body}, loc);
            }
            std::string x = binder();
            expect("=");
            Expr bound = expr();
            expect_word("in");
            Expr body = with_bound({x}, false, [&] { return expr(); });
            return make_expr(ex::App{make_expr(ex::Lam{x, nullptr, Linearity::Linear, body}, loc), bound}, loc);
        }
        if (is_word("if")) {
            next();
            Expr c = expr();
            expect_word("then");
            Expr a = expr();
            expect_word("else");
            Expr b = expr();
            return make_expr(ex::If{c, a, b}, loc);
        }
        if (is_word("lam") || is_word("llam")) {
            Linearity lin = next().text == "lam" ? Linearity::Intuitionistic : Linearity::Linear;
            expect("(");
            std::string x = binder();
            expect(":");
            Type ty = vtype();
            expect(")");
            expect("=>");
            Expr body = with_bound({x}, false, [&] { return expr(); });
            return make_expr(ex::Lam{x, ty, lin, body}, loc);
        }
        if (is_word("fix")) {
            next();
            std::string f = binder();
            expect(":");
            Type ty = vtype();
            expect("=>");
            Expr body = with_bound({f}, true, [&] { return expr(); });
            return make_expr(ex::Fix{f, ty, body}, loc);
        }
        Expr first = binary(0);
        if (accept(";")) {
            Expr rest = with_bound({"_"}, false, [&] { return expr(); });
            return make_expr(ex::App{make_expr(ex::Lam{"_", nullptr, Linearity::Linear, rest}, loc), first}, loc);
        }
        return first;
    }

    std::optional<std::string> binary_op() const {
        const Token &t = peek();
        if (t.kind == Tok::Sym && kBinaryLevel.contains(t.text)) return t.text;
        if (t.kind == Tok::Ident && t.text == "mod") return t.text;
        return std::nullopt;
    }

    Expr binary(int level) {
        if (level > 4) return unary();
        Expr left = binary(level + 1);
        while (true) {
            auto op = binary_op();
            if (!op || kBinaryLevel.at(*op) != level) return left;
            SourceLoc loc = next().loc;
            Expr right = binary(level + 1);
            left = make_expr(ex::ConstApp{*op, {left, right}}, loc);
            if (level == 2) {
                auto again = binary_op();
                if (again && kBinaryLevel.at(*again) == 2)
                    throw Error("E100", peek().loc, "comparison operators do not chain");
                return left;
            }
        }
    }

    Expr unary() {
        SourceLoc loc = peek().loc;
        if (is_word("not")) {
            next();
            return make_expr(ex::ConstApp{"not", {unary()}}, loc);
        }
        if (is_sym("-") && peek(1).kind == Tok::Int) {
            next();
            return make_expr(ex::Int{-next().value}, loc);
        }
        return primary();
    }

    std::vector<Expr> call_args() {
        expect("(");
        std::vector<Expr> args;
        if (!is_sym(")")) {
            do {
                args.push_back(expr());
            } while (accept(","));
        }
        expect(")");
        return args;
    }

    static Expr tuple(std::vector<Expr> items, SourceLoc loc) {
        if (items.empty()) return make_expr(ex::Unit{}, loc);
        Expr e = items.back();
        for (auto it = items.rbegin() + 1; it != items.rend(); ++it) e = make_expr(ex::Pair{*it, e}, loc);
        return e;
    }

    Expr primary() {
        const Token &t = peek();
        SourceLoc loc = t.loc;
        switch (t.kind) {
        case Tok::Int: return make_expr(ex::Int{next().value}, loc);
        case Tok::Res: {
            const Token &r = next();
            Endpoint ep{static_cast<ChannelId>(r.value), r.text == "$" ? Polarity::Pos : Polarity::Neg};
            return make_expr(ex::Res{ep}, loc);
        }
        case Tok::Sym:
            if (t.text == "(") {
                next();
                if (accept(")")) return make_expr(ex::Unit{}, loc);
                std::vector<Expr> items{expr()};
                while (accept(",")) items.push_back(expr());
                expect(")");
                return tuple(std::move(items), loc);
            }
            break;
        case Tok::Ident: {
            const std::string &w = t.text;
            if (w == "true" || w == "false") return make_expr(ex::Bool{next().text == "true"}, loc);
            if (w == "lam" || w == "llam" || w == "let" || w == "if" || w == "fix") return expr();
            if (w == "fst" || w == "snd") {
                bool is_fst = next().text == "fst";
                expect("(");
                Expr e = expr();
                expect(")");
                return is_fst ? make_expr(ex::Fst{e}, loc) : make_expr(ex::Snd{e}, loc);
            }
            if (w == "app") {
                next();
                expect("(");
                Expr f = expr();
                expect(",");
                Expr a = expr();
                expect(")");
                return make_expr(ex::App{f, a}, loc);
            }
            if (w == "offer") {
                next();
                Expr chan = binary(0);
                expect("{");
                std::vector<ex::OfferArm> arms;
                do {
                    std::string name = tag();
                    expect("(");
                    std::string x = binder();
                    expect(")");
                    expect("=>");
                    Expr body = with_bound({x}, false, [&] { return expr(); });
                    arms.push_back({name, x, body});
                } while (accept("|"));
                expect("}");
                return make_expr(ex::Offer{chan, std::move(arms)}, loc);
            }
            if (w == "select") {
                next();
                expect("[");
                std::string name = tag();
                expect("]");
                expect("(");
                Expr chan = expr();
                expect(")");
                return make_expr(ex::Select{name, chan}, loc);
            }
            if (constant_names().contains(w)) {
                std::string name = next().text;
                if (!is_sym("("))
                    throw Error("E100", peek().loc, fmt::format("constant '{}' must be applied", name));
                return make_expr(ex::ConstApp{name, call_args()}, loc);
            }
            if (kReserved.contains(w)) break;
            std::string name = next().text;
            Expr head = resolve(name, loc);
            if (is_sym("(")) return make_expr(ex::App{head, tuple(call_args(), loc)}, loc);
            return head;
        }
        default: break;
        }
        throw Error("E100", loc, fmt::format("expected expression, found {}", describe(t)));
    }

    Expr resolve(const std::string &name, SourceLoc loc) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == name)
                return it->second ? make_expr(ex::FixVar{name}, loc) : make_expr(ex::Var{name}, loc);
        if (functions_.contains(name)) return make_expr(ex::FixVar{name}, loc);
        return make_expr(ex::Var{name}, loc);
    }
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text, {}, {}).program(); }

Expr parse_expr(std::string_view text, const std::set<std::string> &functions, const std::set<std::string> &sessions) {
    return Parser(text, sessions, functions).single_expr();
}

Type parse_type(std::string_view text, const std::set<std::string> &sessions) {
    return Parser(text, sessions, {}).single_type();
}

Session parse_session(std::string_view text, const std::set<std::string> &sessions) {
    return Parser(text, sessions, {}).single_session();
}

}  // namespace mtlc
