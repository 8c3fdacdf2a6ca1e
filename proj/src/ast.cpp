#include "mtlc/ast.hpp"

#include <utility>

#include "mtlc/overloaded.hpp"

namespace mtlc {

std::string to_string(Endpoint ep) {
    return (ep.pol == Polarity::Pos ? "+" : "-") + std::to_string(ep.id);
}

namespace {

Session mk_session(auto node) { return std::make_shared<const SessionNode>(SessionNode{std::move(node)}); }
Type mk_type(auto node) { return std::make_shared<const TypeNode>(TypeNode{std::move(node)}); }

}  // namespace

Session s_nil() { return mk_session(sess::Nil{}); }
Session s_nilbar() { return mk_session(sess::NilBar{}); }
Session s_snd(Type payload, Session next) { return mk_session(sess::Snd{std::move(payload), std::move(next)}); }
Session s_rcv(Type payload, Session next) { return mk_session(sess::Rcv{std::move(payload), std::move(next)}); }
Session s_named(std::string name, bool dual) { return mk_session(sess::Named{std::move(name), dual}); }
Session s_choice(ChoiceDir dir, std::vector<sess::Branch> branches) {
    return mk_session(sess::Choice{dir, std::move(branches)});
}
Session s_var(std::string name) { return mk_session(sess::Var{std::move(name)}); }

Type t_var(std::string name) { return mk_type(ty::Var{std::move(name)}); }
Type t_linvar(std::string name) { return mk_type(ty::LinVar{std::move(name)}); }
Type t_int() { return mk_type(ty::Base{BaseType::Int}); }
Type t_bool() { return mk_type(ty::Base{BaseType::Bool}); }
Type t_unit() { return mk_type(ty::Unit{}); }
Type t_prod(Type first, Type second) {
    Linearity lin = is_linear(first) || is_linear(second) ? Linearity::Linear : Linearity::Intuitionistic;
    return mk_type(ty::Prod{lin, std::move(first), std::move(second)});
}
Type t_arrow(Linearity lin, Type param, Type result) {
    return mk_type(ty::Arrow{lin, std::move(param), std::move(result)});
}
Type t_chan(Polarity pol, Session s) { return mk_type(ty::Chan{pol, std::move(s)}); }
Type t_chpos(Session s) { return t_chan(Polarity::Pos, std::move(s)); }
Type t_chneg(Session s) { return t_chan(Polarity::Neg, std::move(s)); }
Type t_service(Session s) { return mk_type(ty::Service{std::move(s)}); }

bool is_linear(const Type &t) {
    return std::visit(overloaded{
                          [](const ty::Var &) { return false; },
                          [](const ty::LinVar &) { return true; },
                          [](const ty::Base &) { return false; },
                          [](const ty::Unit &) { return false; },
                          [](const ty::Prod &p) { return p.lin == Linearity::Linear; },
                          [](const ty::Arrow &a) { return a.lin == Linearity::Linear; },
                          [](const ty::Chan &) { return true; },
                          [](const ty::Service &) { return false; },
                      },
                      t->v);
}

bool same_session(const Session &a, const Session &b) {
    if (a == b) return true;
    if (!a || !b || a->v.index() != b->v.index()) return false;
    return std::visit(overloaded{
                          [](const sess::Nil &, const sess::Nil &) { return true; },
                          [](const sess::NilBar &, const sess::NilBar &) { return true; },
                          [](const sess::Snd &x, const sess::Snd &y) {
                              return same_type(x.payload, y.payload) && same_session(x.next, y.next);
                          },
                          [](const sess::Rcv &x, const sess::Rcv &y) {
                              return same_type(x.payload, y.payload) && same_session(x.next, y.next);
                          },
                          [](const sess::Named &x, const sess::Named &y) {
                              return x.name == y.name && x.dual == y.dual;
                          },
                          [](const sess::Choice &x, const sess::Choice &y) {
                              if (x.dir != y.dir || x.branches.size() != y.branches.size()) return false;
                              for (std::size_t i = 0; i < x.branches.size(); ++i) {
                                  if (x.branches[i].tag != y.branches[i].tag ||
                                      !same_session(x.branches[i].next, y.branches[i].next))
                                      return false;
                              }
                              return true;
                          },
                          [](const sess::Var &x, const sess::Var &y) { return x.name == y.name; },
                          [](const auto &, const auto &) { return false; },
                      },
                      a->v, b->v);
}

bool same_type(const Type &a, const Type &b) {
    if (a == b) return true;
    if (!a || !b || a->v.index() != b->v.index()) return false;
    return std::visit(overloaded{
                          [](const ty::Var &x, const ty::Var &y) { return x.name == y.name; },
                          [](const ty::LinVar &x, const ty::LinVar &y) { return x.name == y.name; },
                          [](const ty::Base &x, const ty::Base &y) { return x.kind == y.kind; },
                          [](const ty::Unit &, const ty::Unit &) { return true; },
                          [](const ty::Prod &x, const ty::Prod &y) {
                              return x.lin == y.lin && same_type(x.first, y.first) &&
                                     same_type(x.second, y.second);
                          },
                          [](const ty::Arrow &x, const ty::Arrow &y) {
                              return x.lin == y.lin && same_type(x.param, y.param) &&
                                     same_type(x.result, y.result);
                          },
                          [](const ty::Chan &x, const ty::Chan &y) {
                              return x.pol == y.pol && same_session(x.session, y.session);
                          },
                          [](const ty::Service &x, const ty::Service &y) {
                              return same_session(x.session, y.session);
                          },
                          [](const auto &, const auto &) { return false; },
                      },
                      a->v, b->v);
}

namespace {

bool same_exprs(const std::vector<Expr> &a, const std::vector<Expr> &b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_expr(a[i], b[i])) return false;
    return true;
}

bool same_opt_type(const Type &a, const Type &b) {
    if (!a || !b) return !a && !b;
    return same_type(a, b);
}

}  // namespace

bool same_expr(const Expr &a, const Expr &b) {
    if (a == b) return true;
    if (!a || !b || a->v.index() != b->v.index()) return false;
    return std::visit(
        overloaded{
            [](const ex::Var &x, const ex::Var &y) { return x.name == y.name; },
            [](const ex::FixVar &x, const ex::FixVar &y) { return x.name == y.name; },
            [](const ex::Res &x, const ex::Res &y) { return x.ep == y.ep; },
            [](const ex::Int &x, const ex::Int &y) { return x.value == y.value; },
            [](const ex::Bool &x, const ex::Bool &y) { return x.value == y.value; },
            [](const ex::Unit &, const ex::Unit &) { return true; },
            [](const ex::ConstApp &x, const ex::ConstApp &y) {
                return x.name == y.name && same_exprs(x.args, y.args);
            },
            [](const ex::Pair &x, const ex::Pair &y) {
                return same_expr(x.first, y.first) && same_expr(x.second, y.second);
            },
            [](const ex::Fst &x, const ex::Fst &y) { return same_expr(x.pair, y.pair); },
            [](const ex::Snd &x, const ex::Snd &y) { return same_expr(x.pair, y.pair); },
            [](const ex::LetPair &x, const ex::LetPair &y) {
                return x.first == y.first && x.second == y.second && same_expr(x.bound, y.bound) &&
                       same_expr(x.body, y.body);
            },
            [](const ex::If &x, const ex::If &y) {
                return same_expr(x.cond, y.cond) && same_expr(x.then_branch, y.then_branch) &&
                       same_expr(x.else_branch, y.else_branch);
            },
            [](const ex::Lam &x, const ex::Lam &y) {
                return x.param == y.param && x.lin == y.lin && same_opt_type(x.param_type, y.param_type) &&
                       same_expr(x.body, y.body);
            },
            [](const ex::App &x, const ex::App &y) { return same_expr(x.fn, y.fn) && same_expr(x.arg, y.arg); },
            [](const ex::Fix &x, const ex::Fix &y) {
                return x.name == y.name && same_type(x.type, y.type) && same_expr(x.body, y.body);
            },
            [](const ex::Offer &x, const ex::Offer &y) {
                if (!same_expr(x.chan, y.chan) || x.arms.size() != y.arms.size()) return false;
                for (std::size_t i = 0; i < x.arms.size(); ++i) {
                    if (x.arms[i].tag != y.arms[i].tag || x.arms[i].var != y.arms[i].var ||
                        !same_expr(x.arms[i].body, y.arms[i].body))
                        return false;
                }
                return true;
            },
            [](const ex::Select &x, const ex::Select &y) { return x.tag == y.tag && same_expr(x.chan, y.chan); },
            [](const auto &, const auto &) { return false; },
        },
        a->v, b->v);
}

bool same_program(const Program &a, const Program &b) {
    if (a.sessions.size() != b.sessions.size() || a.functions.size() != b.functions.size()) return false;
    for (std::size_t i = 0; i < a.sessions.size(); ++i) {
        if (a.sessions[i].name != b.sessions[i].name || !same_session(a.sessions[i].body, b.sessions[i].body))
            return false;
    }
    for (std::size_t i = 0; i < a.functions.size(); ++i) {
        const FunDef &f = a.functions[i];
        const FunDef &g = b.functions[i];
        if (f.name != g.name || f.params.size() != g.params.size() || !same_opt_type(f.result, g.result) ||
            !same_expr(f.body, g.body))
            return false;
        for (std::size_t k = 0; k < f.params.size(); ++k)
            if (f.params[k].name != g.params[k].name || !same_type(f.params[k].type, g.params[k].type))
                return false;
    }
    if (!a.main || !b.main) return !a.main && !b.main;
    return same_expr(a.main, b.main);
}

}  // namespace mtlc
