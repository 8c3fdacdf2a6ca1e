#include <fmt/format.h>

#include "mtlc/error.hpp"
#include "mtlc/overloaded.hpp"
#include "mtlc/syntax.hpp"

namespace mtlc {

std::string format_diagnostic(const Diagnostic &d, const std::string &file) {
    return fmt::format("{} {}:{}:{} {} {}", d.level, file, d.loc.line, d.loc.column, d.code, d.message);
}

std::string print_session(const Session &s) {
    return std::visit(overloaded{
                          [](const sess::Nil &) -> std::string { return "nil"; },
                          [](const sess::NilBar &) -> std::string { return "nilbar"; },
                          [](const sess::Snd &x) {
                              return fmt::format("snd({}) :: {}", print_type(x.payload), print_session(x.next));
                          },
                          [](const sess::Rcv &x) {
                              return fmt::format("rcv({}) :: {}", print_type(x.payload), print_session(x.next));
                          },
                          [](const sess::Named &n) { return n.dual ? "dual(" + n.name + ")" : n.name; },
                          [](const sess::Choice &c) {
                              std::string out = c.dir == ChoiceDir::SndTag ? "sndtag{ " : "rcvtag{ ";
                              for (std::size_t i = 0; i < c.branches.size(); ++i) {
                                  if (i) out += " | ";
                                  out += c.branches[i].tag + " => " + print_session(c.branches[i].next);
                              }
                              return out + " }";
                          },
                          [](const sess::Var &v) { return "%" + v.name; },
                      },
                      s->v);
}

std::string print_type(const Type &t) {
    return std::visit(overloaded{
                          [](const ty::Var &v) { return "'" + v.name; },
                          [](const ty::LinVar &v) { return "^" + v.name; },
                          [](const ty::Base &b) -> std::string { return b.kind == BaseType::Int ? "int" : "bool"; },
                          [](const ty::Unit &) -> std::string { return "unit"; },
                          [](const ty::Prod &p) {
                              return fmt::format("({} * {})", print_type(p.first), print_type(p.second));
                          },
                          [](const ty::Arrow &a) {
                              return fmt::format("({} {} {})", print_type(a.param),
                                                 a.lin == Linearity::Linear ? "-<lin>" : "->", print_type(a.result));
                          },
                          [](const ty::Chan &c) {
                              return fmt::format("{}({})", c.pol == Polarity::Pos ? "chpos" : "chneg",
                                                 print_session(c.session));
                          },
                          [](const ty::Service &s) { return fmt::format("service({})", print_session(s.session)); },
                      },
                      t->v);
}

namespace {

const std::set<std::string> kInfix = {"+", "-", "*", "/", "mod", "<", "<=", ">", ">=", "=", "<>", "&&", "||"};

bool is_open(const Expr &e) {
    if (std::holds_alternative<ex::LetPair>(e->v) || std::holds_alternative<ex::If>(e->v) ||
        std::holds_alternative<ex::Lam>(e->v) || std::holds_alternative<ex::Fix>(e->v))
        return true;
    if (const auto *a = as<ex::App>(e)) {
        const auto *lam = as<ex::Lam>(a->fn);
        return lam && !lam->param_type;
    }
    return false;
}

std::string print(const Expr &e, bool open_ok);

std::string operand(const Expr &e) { return print(e, false); }

std::string print_node(const Expr &e) {
    return std::visit(
        overloaded{
            [](const ex::Var &v) { return v.name; },
            [](const ex::FixVar &v) { return v.name; },
            [](const ex::Res &r) {
                return fmt::format("{}{}", r.ep.pol == Polarity::Pos ? "$" : "~$", r.ep.id);
            },
            [](const ex::Int &i) { return std::to_string(i.value); },
            [](const ex::Bool &b) -> std::string { return b.value ? "true" : "false"; },
            [](const ex::Unit &) -> std::string { return "()"; },
            [](const ex::ConstApp &c) {
                if (kInfix.contains(c.name) && c.args.size() == 2)
                    return fmt::format("({} {} {})", operand(c.args[0]), c.name, operand(c.args[1]));
                if (c.name == "not" && c.args.size() == 1) return fmt::format("(not {})", operand(c.args[0]));
                std::string out = c.name + "(";
                for (std::size_t i = 0; i < c.args.size(); ++i) out += (i ? ", " : "") + print(c.args[i], true);
                return out + ")";
            },
            [](const ex::Pair &p) { return fmt::format("({}, {})", print(p.first, true), print(p.second, true)); },
            [](const ex::Fst &f) { return fmt::format("fst({})", print(f.pair, true)); },
            [](const ex::Snd &s) { return fmt::format("snd({})", print(s.pair, true)); },
            [](const ex::LetPair &l) {
                return fmt::format("let ({}, {}) = {} in {}", l.first, l.second, operand(l.bound), print(l.body, true));
            },
            [](const ex::If &i) {
                return fmt::format("if {} then {} else {}", operand(i.cond), operand(i.then_branch),
                                   print(i.else_branch, true));
            },
            [](const ex::Lam &l) {
                return fmt::format("{} ({}: {}) => {}", l.lin == Linearity::Linear ? "llam" : "lam", l.param,
                                   l.param_type ? print_type(l.param_type) : "?", print(l.body, true));
            },
            [](const ex::App &a) {
                const auto *lam = as<ex::Lam>(a.fn);
                if (lam && !lam->param_type)
                    return fmt::format("let {} = {} in {}", lam->param, operand(a.arg), print(lam->body, true));
                return fmt::format("app({}, {})", print(a.fn, true), print(a.arg, true));
            },
            [](const ex::Fix &f) {
                return fmt::format("fix {}: {} => {}", f.name, print_type(f.type), print(f.body, true));
            },
            [](const ex::Offer &o) {
                std::string out = fmt::format("offer {} {{ ", operand(o.chan));
                for (std::size_t i = 0; i < o.arms.size(); ++i) {
                    if (i) out += " | ";
                    out += fmt::format("{}({}) => {}", o.arms[i].tag, o.arms[i].var, print(o.arms[i].body, true));
                }
                return out + " }";
            },
            [](const ex::Select &s) { return fmt::format("select[{}]({})", s.tag, print(s.chan, true)); },
        },
        e->v);
}

std::string print(const Expr &e, bool open_ok) {
    std::string s = print_node(e);
    return !open_ok && is_open(e) ? "(" + s + ")" : s;
}

}  // namespace

std::string print_expr(const Expr &e) { return print(e, true); }

std::string print_program(const Program &p) {
    std::string out;
    for (const auto &s : p.sessions) out += fmt::format("sesstype {} = {}\n\n", s.name, print_session(s.body));
    for (const auto &f : p.functions) {
        std::string params;
        for (std::size_t i = 0; i < f.params.size(); ++i)
            params += fmt::format("{}{}: {}", i ? ", " : "", f.params[i].name, print_type(f.params[i].type));
        out += fmt::format("fun {}({}): {} =\n  {}\n\n", f.name, params, print_type(f.result), print_expr(f.body));
    }
    if (p.main) out += fmt::format("fun main() =\n  {}\n", print_expr(p.main));
    return out;
}

}  // namespace mtlc
