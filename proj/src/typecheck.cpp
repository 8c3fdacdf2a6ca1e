#include "mtlc/typecheck.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mtlc/ast_ops.hpp"
#include "mtlc/overloaded.hpp"
#include "mtlc/syntax.hpp"

namespace mtlc {

// ------------------------------
// signature
// ------------------------------

Signature Signature::builtin(bool allow_create2) {
    Signature sig;
    sig.allow_create2_ = allow_create2;
    auto &c = sig.ctypes_;
    const Type a = t_linvar("a");
    const Session s = s_var("s");
    const Type unit = t_unit(), i = t_int(), b = t_bool();

    c["thread_create"] = {{t_arrow(Linearity::Linear, unit, unit)}, unit};
    c["chneg_create"] = {{t_arrow(Linearity::Linear, t_chpos(s), unit)}, t_chneg(s)};
    if (allow_create2) {
        const Session s1 = s_var("s1"), s2 = s_var("s2");
        c["chneg_create2"] = {{t_arrow(Linearity::Linear, t_prod(t_chpos(s1), t_chpos(s2)), unit)},
                              t_prod(t_chneg(s1), t_chneg(s2))};
    }
    c["send"] = {{t_chpos(s_snd(a, s)), a}, t_chpos(s)};
    c["recv"] = {{t_chpos(s_rcv(a, s))}, t_prod(t_chpos(s), a)};
    c["channeg_recv"] = {{t_chneg(s_rcv(a, s)), a}, t_chneg(s)};
    c["channeg_send"] = {{t_chneg(s_snd(a, s))}, t_prod(t_chneg(s), a)};
    c["close"] = {{t_chpos(s_nil())}, unit};
    c["channeg_close"] = {{t_chneg(s_nil())}, unit};
    c["chposneg_link"] = {{t_chpos(s), t_chneg(s)}, unit};
    c["service_create"] = {{t_arrow(Linearity::Intuitionistic, t_chpos(s), unit)}, t_service(s)};
    c["service_request"] = {{t_service(s)}, t_chneg(s)};
    c["randbit"] = {{}, i};
    for (const char *op : {"+", "-", "*", "/", "mod"}) c[op] = {{i, i}, i};
    for (const char *op : {"<", "<=", ">", ">=", "=", "<>"}) c[op] = {{i, i}, b};
    for (const char *op : {"&&", "||"}) c[op] = {{b, b}, b};
    c["not"] = {{b}, b};
    return sig;
}

const CType *Signature::find(const std::string &name) const {
    auto it = ctypes_.find(name);
    return it == ctypes_.end() ? nullptr : &it->second;
}

// ------------------------------
// instantiation
// ------------------------------

Session apply_subst(const TypeSubst &theta, const Session &s) {
    return std::visit(overloaded{
                          [&](const sess::Snd &x) { return s_snd(apply_subst(theta, x.payload), apply_subst(theta, x.next)); },
                          [&](const sess::Rcv &x) { return s_rcv(apply_subst(theta, x.payload), apply_subst(theta, x.next)); },
                          [&](const sess::Choice &c) {
                              std::vector<sess::Branch> branches;
                              for (const auto &br : c.branches) branches.push_back({br.tag, apply_subst(theta, br.next)});
                              return s_choice(c.dir, std::move(branches));
                          },
                          [&](const sess::Var &v) {
                              auto it = theta.sessions.find(v.name);
                              return it == theta.sessions.end() ? s : it->second;
                          },
                          [&](const auto &) { return s; },
                      },
                      s->v);
}

Type apply_subst(const TypeSubst &theta, const Type &t) {
    return std::visit(overloaded{
                          [&](const ty::Var &v) {
                              auto it = theta.vars.find(v.name);
                              return it == theta.vars.end() ? t : it->second;
                          },
                          [&](const ty::LinVar &v) {
                              auto it = theta.linvars.find(v.name);
                              return it == theta.linvars.end() ? t : it->second;
                          },
                          [&](const ty::Prod &p) { return t_prod(apply_subst(theta, p.first), apply_subst(theta, p.second)); },
                          [&](const ty::Arrow &a) {
                              return t_arrow(a.lin, apply_subst(theta, a.param), apply_subst(theta, a.result));
                          },
                          [&](const ty::Chan &c) { return t_chan(c.pol, apply_subst(theta, c.session)); },
                          [&](const ty::Service &sv) { return t_service(apply_subst(theta, sv.session)); },
                          [&](const auto &) { return t; },
                      },
                      t->v);
}

namespace {

class Matcher {
public:
    Matcher(const SessionEnv &env, SourceLoc loc) : env_(env), loc_(loc) {}
    TypeSubst theta;

    bool type(const Type &schema, const Type &actual) {
        return std::visit(overloaded{
                              [&](const ty::Var &v) {
                                  if (auto it = theta.vars.find(v.name); it != theta.vars.end())
                                      return type_equal(it->second, actual, env_);
                                  if (is_linear(actual))
                                      throw Error("E210", loc_,
                                                  fmt::format("nonlinear type variable instantiated with linear type {}",
                                                              print_type(actual)));
                                  theta.vars[v.name] = actual;
                                  return true;
                              },
                              [&](const ty::LinVar &v) {
                                  if (auto it = theta.linvars.find(v.name); it != theta.linvars.end())
                                      return type_equal(it->second, actual, env_);
                                  theta.linvars[v.name] = actual;
                                  return true;
                              },
                              [&](const ty::Prod &p) {
                                  const auto *q = std::get_if<ty::Prod>(&actual->v);
                                  return q && type(p.first, q->first) && type(p.second, q->second);
                              },
                              [&](const ty::Arrow &a) {
                                  const auto *q = std::get_if<ty::Arrow>(&actual->v);
                                  return q && q->lin == a.lin && type(a.param, q->param) && type(a.result, q->result);
                              },
                              [&](const ty::Chan &c) {
                                  const auto *q = std::get_if<ty::Chan>(&actual->v);
                                  return q && q->pol == c.pol && session(c.session, q->session);
                              },
                              [&](const ty::Service &sv) {
                                  const auto *q = std::get_if<ty::Service>(&actual->v);
                                  return q && session(sv.session, q->session);
                              },
                              [&](const auto &) { return type_equal(schema, actual, env_); },
                          },
                          schema->v);
    }

    bool session(const Session &schema, const Session &actual) {
        if (const auto *v = std::get_if<sess::Var>(&schema->v)) {
            if (auto it = theta.sessions.find(v->name); it != theta.sessions.end())
                return session_equal(it->second, actual, env_);
            theta.sessions[v->name] = actual;
            return true;
        }
        Session head = unfold_head(actual, env_);
        return std::visit(overloaded{
                              [&](const sess::Nil &) { return std::holds_alternative<sess::Nil>(head->v); },
                              [&](const sess::NilBar &) { return std::holds_alternative<sess::NilBar>(head->v); },
                              [&](const sess::Snd &x) {
                                  const auto *y = std::get_if<sess::Snd>(&head->v);
                                  return y && type(x.payload, y->payload) && session(x.next, y->next);
                              },
                              [&](const sess::Rcv &x) {
                                  const auto *y = std::get_if<sess::Rcv>(&head->v);
                                  return y && type(x.payload, y->payload) && session(x.next, y->next);
                              },
                              [&](const auto &) { return session_equal(schema, head, env_); },
                          },
                          schema->v);
    }

private:
    const SessionEnv &env_;
    SourceLoc loc_;
};

std::string render_types(const std::vector<Type> &ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) out += (i ? ", " : "") + print_type(ts[i]);
    return out;
}

}  // namespace

Instance instantiate(const std::string &name, const CType &ctype, const std::vector<Type> &args,
                     const SessionEnv &env, SourceLoc loc) {
    if (args.size() != ctype.params.size())
        throw Error("E206", loc,
                    fmt::format("'{}' expects {} argument(s), got {}", name, ctype.params.size(), args.size()));
    Matcher m(env, loc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!m.type(ctype.params[i], args[i]))
            throw Error("E206", loc,
                        fmt::format("no instance of '{}' for argument types ({}): expected {} at position {}", name,
                                    render_types(args), print_type(ctype.params[i]), i + 1));
    }
    return {m.theta, apply_subst(m.theta, ctype.result)};
}

// ------------------------------
// expression checking
// ------------------------------

namespace {

class Checker {
public:
    explicit Checker(const CheckEnv &env) : env_(env) {}

    struct Local {
        std::string name;
        Type type;
        bool linear;
        bool consumed;
        SourceLoc loc;
    };

    std::vector<Local> locals;
    std::vector<std::pair<std::string, Type>> fix_scope;
    std::set<Endpoint> used_resources;

    Type synth(const Expr &e) {
        return std::visit([&](const auto &node) { return rule(e, node); }, e->v);
    }

    void bind(const std::string &name, const Type &t, SourceLoc loc) {
        locals.push_back({name, t, is_linear(t), false, loc});
    }

    void unbind(std::size_t count) {
        for (std::size_t k = 0; k < count; ++k) {
            const Local &l = locals.back();
            if (l.linear && !l.consumed && l.name != "_")
                throw Error("E202", l.loc, fmt::format("linear variable '{}' of type {} is never used", l.name,
                                                       print_type(l.type)));
            if (l.linear && !l.consumed)
                throw Error("E202", l.loc, fmt::format("discarded value of linear type {}", print_type(l.type)));
            locals.pop_back();
        }
    }

private:
    const CheckEnv &env_;
    std::size_t barrier_ = 0;  // linear locals below this index belong to an enclosing scope that cannot be captured
    int resource_barrier_ = 0;

    struct State {
        std::vector<bool> consumed;
        std::set<Endpoint> resources;
    };

    State snapshot() const {
        State s;
        for (const auto &l : locals) s.consumed.push_back(l.consumed);
        s.resources = used_resources;
        return s;
    }

    void restore(const State &s) {
        for (std::size_t k = 0; k < s.consumed.size(); ++k) locals[k].consumed = s.consumed[k];
        used_resources = s.resources;
    }

    void same_usage(const State &a, const State &b, SourceLoc loc, const char *what) {
        for (std::size_t k = 0; k < a.consumed.size(); ++k) {
            if (a.consumed[k] != b.consumed[k])
                throw Error("E203", loc,
                            fmt::format("{} differ in their use of linear variable '{}'", what, locals[k].name));
        }
        if (a.resources != b.resources) throw Error("E208", loc, fmt::format("{} consume different channels", what));
    }

    void expect_type(const Type &expected, const Type &actual, SourceLoc loc, const char *what) {
        if (!type_equal(expected, actual, env_.sessions))
            throw Error("E205", loc,
                        fmt::format("{}: expected {}, found {}", what, print_type(expected), print_type(actual)));
    }

    struct BarrierGuard {
        Checker &c;
        std::size_t saved;
        explicit BarrierGuard(Checker &checker) : c(checker), saved(checker.barrier_) {
            c.barrier_ = c.locals.size();
            ++c.resource_barrier_;
        }
        ~BarrierGuard() {
            c.barrier_ = saved;
            --c.resource_barrier_;
        }
    };

    Type rule(const Expr &e, const ex::Var &v) {
        for (std::size_t k = locals.size(); k-- > 0;) {
            Local &l = locals[k];
            if (l.name != v.name) continue;
            if (!l.linear) return l.type;
            if (k < barrier_)
                throw Error("E204", e->loc,
                            fmt::format("intuitionistic function captures linear variable '{}'", v.name));
            if (l.consumed) throw Error("E201", e->loc, fmt::format("linear variable '{}' is used twice", v.name));
            l.consumed = true;
            return l.type;
        }
        throw Error("E200", e->loc, fmt::format("unbound variable '{}'", v.name));
    }

    Type rule(const Expr &e, const ex::FixVar &v) {
        for (auto it = fix_scope.rbegin(); it != fix_scope.rend(); ++it)
            if (it->first == v.name) return it->second;
        auto it = env_.functions.find(v.name);
        if (it != env_.functions.end()) return it->second;
        throw Error("E200", e->loc, fmt::format("unbound function '{}'", v.name));
    }

    Type rule(const Expr &e, const ex::Res &r) {
        auto it = env_.resources.find(r.ep);
        if (it == env_.resources.end())
            throw Error("E200", e->loc, fmt::format("unknown channel {}", to_string(r.ep)));
        if (resource_barrier_ > 0)
            throw Error("E204", e->loc, fmt::format("intuitionistic function captures channel {}", to_string(r.ep)));
        if (!used_resources.insert(r.ep).second)
            throw Error("E201", e->loc, fmt::format("channel {} is used twice", to_string(r.ep)));
        return it->second;
    }

    Type rule(const Expr &, const ex::Int &) { return t_int(); }
    Type rule(const Expr &, const ex::Bool &) { return t_bool(); }
    Type rule(const Expr &, const ex::Unit &) { return t_unit(); }

    Type rule(const Expr &e, const ex::ConstApp &c) {
        const CType *ct = env_.signature.find(c.name);
        if (!ct) throw Error("E207", e->loc, fmt::format("unknown constant '{}'", c.name));
        std::vector<Type> args;
        for (const auto &a : c.args) args.push_back(synth(a));
        return instantiate(c.name, *ct, args, env_.sessions, e->loc).result;
    }

    Type rule(const Expr &, const ex::Pair &p) {
        Type a = synth(p.first);
        Type b = synth(p.second);
        return t_prod(a, b);
    }

    Type projection(const Expr &e, const Expr &pair, bool first) {
        Type t = synth(pair);
        const auto *p = std::get_if<ty::Prod>(&t->v);
        if (!p || p->lin == Linearity::Linear)
            throw Error("E205", e->loc,
                        fmt::format("{} expects a nonlinear pair, found {}", first ? "fst" : "snd", print_type(t)));
        return first ? p->first : p->second;
    }
    Type rule(const Expr &e, const ex::Fst &f) { return projection(e, f.pair, true); }
    Type rule(const Expr &e, const ex::Snd &s) { return projection(e, s.pair, false); }

    Type rule(const Expr &e, const ex::LetPair &l) {
        Type t = synth(l.bound);
        const auto *p = std::get_if<ty::Prod>(&t->v);
        if (!p) throw Error("E205", l.bound->loc, fmt::format("let-pair expects a pair, found {}", print_type(t)));
        bind(l.first, p->first, e->loc);
        bind(l.second, p->second, e->loc);
        Type body = synth(l.body);
        unbind(2);
        return body;
    }

    Type rule(const Expr &e, const ex::If &i) {
        expect_type(t_bool(), synth(i.cond), i.cond->loc, "condition");
        State before = snapshot();
        Type a = synth(i.then_branch);
        State after_then = snapshot();
        restore(before);
        Type b = synth(i.else_branch);
        State after_else = snapshot();
        same_usage(after_then, after_else, e->loc, "branches of if");
        expect_type(a, b, i.else_branch->loc, "else branch");
        return a;
    }

    Type lambda(const Expr &e, const ex::Lam &l, const Type &param_type) {
        std::optional<BarrierGuard> guard;
        if (l.lin == Linearity::Intuitionistic) guard.emplace(*this);
        bind(l.param, param_type, e->loc);
        Type body = synth(l.body);
        unbind(1);
        return t_arrow(l.lin, param_type, body);
    }

    Type rule(const Expr &e, const ex::Lam &l) {
        if (!l.param_type)
            throw Error("E212", e->loc, fmt::format("parameter '{}' needs a type annotation", l.param));
        return lambda(e, l, l.param_type);
    }

    Type rule(const Expr &e, const ex::App &a) {
        if (const auto *lam = as<ex::Lam>(a.fn); lam && !lam->param_type) {
            Type arg = synth(a.arg);
            bind(lam->param, arg, a.fn->loc);
            Type body = synth(lam->body);
            unbind(1);
            return body;
        }
        Type f = synth(a.fn);
        const auto *arrow = std::get_if<ty::Arrow>(&f->v);
        if (!arrow) throw Error("E205", a.fn->loc, fmt::format("applying a non-function of type {}", print_type(f)));
        Type arg = synth(a.arg);
        expect_type(arrow->param, arg, e->loc, "argument");
        return arrow->result;
    }

    Type rule(const Expr &e, const ex::Fix &f) {
        auto cache_it = env_.fix_cache->find(e.get());
        if (cache_it != env_.fix_cache->end()) return cache_it->second.second;
        if (is_linear(f.type))
            throw Error("E210", e->loc, fmt::format("fix '{}' must have a nonlinear type, found {}", f.name,
                                                    print_type(f.type)));
        if (!is_value(f.body)) throw Error("E210", e->loc, fmt::format("body of fix '{}' must be a value", f.name));
        {
            BarrierGuard guard(*this);
            fix_scope.push_back({f.name, f.type});
            Type body = synth(f.body);
            fix_scope.pop_back();
            expect_type(f.type, body, f.body->loc, fmt::format("body of fix '{}'", f.name).c_str());
        }
        FreeVars fv = free_vars(e);
        if (fv.vars.empty() && fv.fix_vars.empty()) (*env_.fix_cache)[e.get()] = {e, f.type};
        return f.type;
    }

    const sess::Choice &choice_of(const Expr &chan, const Type &t, Polarity &pol, Session &state, const char *op) {
        const auto *c = std::get_if<ty::Chan>(&t->v);
        if (!c) throw Error("E211", chan->loc, fmt::format("{} expects a channel, found {}", op, print_type(t)));
        pol = c->pol;
        state = unfold_head(c->session, env_.sessions);
        const auto *choice = std::get_if<sess::Choice>(&state->v);
        if (!choice)
            throw Error("E211", chan->loc,
                        fmt::format("{} on a channel whose session {} is not a choice", op, print_session(c->session)));
        return *choice;
    }

    static bool selects(Polarity pol, ChoiceDir dir) {
        return (pol == Polarity::Pos) == (dir == ChoiceDir::SndTag);
    }

    Type rule(const Expr &e, const ex::Offer &o) {
        Type t = synth(o.chan);
        Polarity pol;
        Session state;
        const sess::Choice &choice = choice_of(o.chan, t, pol, state, "offer");
        if (selects(pol, choice.dir))
            throw Error("E211", e->loc, "offer on the endpoint that selects; use select");
        std::set<std::string> seen;
        for (const auto &arm : o.arms) {
            auto it = std::find_if(choice.branches.begin(), choice.branches.end(),
                                   [&](const sess::Branch &b) { return b.tag == arm.tag; });
            if (it == choice.branches.end())
                throw Error("E209", arm.body->loc, fmt::format("tag '{}' is not offered by {}", arm.tag,
                                                               print_session(state)));
            if (!seen.insert(arm.tag).second)
                throw Error("E209", arm.body->loc, fmt::format("tag '{}' handled twice", arm.tag));
        }
        for (const auto &b : choice.branches)
            if (!seen.contains(b.tag)) throw Error("E209", e->loc, fmt::format("tag '{}' is not handled", b.tag));

        State before = snapshot();
        std::optional<State> first_state;
        Type result;
        for (const auto &arm : o.arms) {
            restore(before);
            auto it = std::find_if(choice.branches.begin(), choice.branches.end(),
                                   [&](const sess::Branch &b) { return b.tag == arm.tag; });
            bind(arm.var, t_chan(pol, it->next), arm.body->loc);
            Type body = synth(arm.body);
            unbind(1);
            State after = snapshot();
            if (!first_state) {
                first_state = after;
                result = body;
            } else {
                same_usage(*first_state, after, arm.body->loc, "arms of offer");
                expect_type(result, body, arm.body->loc, "offer arm");
            }
        }
        return result;
    }

    Type rule(const Expr &e, const ex::Select &s) {
        Type t = synth(s.chan);
        Polarity pol;
        Session state;
        const sess::Choice &choice = choice_of(s.chan, t, pol, state, "select");
        if (!selects(pol, choice.dir))
            throw Error("E211", e->loc, "select on the endpoint that offers; use offer");
        for (const auto &b : choice.branches)
            if (b.tag == s.tag) return t_chan(pol, b.next);
        throw Error("E209", e->loc, fmt::format("tag '{}' is not part of {}", s.tag, print_session(state)));
    }
};

}  // namespace

CheckResult check_expr(const TypingCtx &ctx, const Expr &e, const CheckEnv &env) {
    Checker c(env);
    for (const auto &b : ctx.gamma) {
        if (is_linear(b.type))
            throw Error("E210", e->loc, fmt::format("'{}' of linear type in the nonlinear context", b.name));
        c.locals.push_back({b.name, b.type, false, false, {}});
    }
    std::size_t delta_start = c.locals.size();
    for (const auto &b : ctx.delta) c.locals.push_back({b.name, b.type, true, false, {}});
    CheckResult r;
    r.type = c.synth(e);
    for (std::size_t k = delta_start; k < c.locals.size(); ++k)
        if (!c.locals[k].consumed) r.leftover.push_back(c.locals[k].name);
    return r;
}

ClosedCheck check_closed(const Expr &e, const CheckEnv &env) {
    Checker c(env);
    ClosedCheck r;
    r.type = c.synth(e);
    r.consumed.assign(c.used_resources.begin(), c.used_resources.end());
    return r;
}

namespace {

CheckEnv program_env(const Program &p, const Signature &sig) {
    CheckEnv env;
    env.sessions = SessionEnv(p.sessions);
    env.signature = sig;
    return env;
}

}  // namespace

std::vector<Diagnostic> check_program(const Program &p, const Signature &sig) {
    std::vector<Diagnostic> out;
    CheckEnv env = program_env(p, sig);
    try {
        env.sessions.validate();
    } catch (const Error &err) {
        out.push_back(err.diagnostic());
        return out;
    }
    for (const auto &f : p.functions) {
        Type ft = function_type(f);
        try {
            Checker c(env);
            c.fix_scope.push_back({f.name, ft});
            Expr lam = function_lambda(f);
            Type got = c.synth(lam);
            if (!type_equal(ft, got, env.sessions))
                throw Error("E205", f.body->loc, fmt::format("function '{}' has type {}, declared {}", f.name,
                                                             print_type(got), print_type(ft)));
        } catch (const Error &err) {
            out.push_back(err.diagnostic());
        }
        env.functions[f.name] = ft;
    }
    if (p.main) {
        try {
            Checker(env).synth(p.main);
        } catch (const Error &err) {
            out.push_back(err.diagnostic());
        }
    }
    return out;
}

Type main_type(const Program &p, const Signature &sig) {
    CheckEnv env = program_env(p, sig);
    for (const auto &f : p.functions) env.functions[f.name] = function_type(f);
    if (!p.main) throw Error("E200", {}, "program has no main");
    return Checker(env).synth(p.main);
}

// ------------------------------
// pools
// ------------------------------

PoolChecker::PoolChecker(SessionEnv sessions, Signature sig) {
    env_.sessions = std::move(sessions);
    env_.signature = std::move(sig);
}

Type PoolChecker::check(const std::map<std::uint64_t, Expr> &threads, const std::vector<ChannelTyping> &channels) {
    env_.resources.clear();
    std::map<Endpoint, Session> states;
    for (const auto &ch : channels) {
        if (ch.pos_live) {
            env_.resources[{ch.id, Polarity::Pos}] = t_chpos(ch.pos_state);
            states[{ch.id, Polarity::Pos}] = ch.pos_state;
        }
        if (ch.neg_live) {
            env_.resources[{ch.id, Polarity::Neg}] = t_chneg(ch.neg_state);
            states[{ch.id, Polarity::Neg}] = ch.neg_state;
        }
        if (!matches(ch.pos_state, ch.neg_state, env_.sessions))
            throw Error("E300", {}, fmt::format("channel {} has mismatched states {} and {}", ch.id,
                                                print_session(ch.pos_state), print_session(ch.neg_state)));
    }
    if (!threads.contains(0)) throw Error("E300", {}, "pool has no main thread");
    for (auto it = cache_.begin(); it != cache_.end();)
        it = threads.contains(it->first) ? std::next(it) : cache_.erase(it);

    Type main;
    std::map<Endpoint, std::uint64_t> owner;
    for (const auto &[tid, e] : threads) {
        Cached *hit = nullptr;
        if (auto it = cache_.find(tid); it != cache_.end() && it->second.expr == e) {
            bool fresh = std::all_of(it->second.states.begin(), it->second.states.end(), [&](const auto &st) {
                auto s = states.find(st.first);
                return s != states.end() && s->second == st.second;
            });
            if (fresh) hit = &it->second;
        }
        if (!hit) {
            ClosedCheck r;
            try {
                r = check_closed(e, env_);
            } catch (const Error &err) {
                cache_.erase(tid);
                throw Error(err.code(), err.diagnostic().loc, fmt::format("thread {}: {}", tid, err.what()));
            }
            Cached c{e, r, {}};
            for (const auto &ep : r.consumed) c.states.push_back({ep, states.at(ep)});
            hit = &(cache_[tid] = std::move(c));
        }
        const ClosedCheck &r = hit->result;
        if (tid == 0) {
            main = r.type;
        } else if (!std::holds_alternative<ty::Unit>(r.type->v)) {
            throw Error("E300", {}, fmt::format("thread {} has type {}, expected unit", tid, print_type(r.type)));
        }
        for (const auto &ep : r.consumed) {
            auto [it, fresh] = owner.emplace(ep, tid);
            if (!fresh)
                throw Error("E300", {}, fmt::format("channel {} occurs in threads {} and {}", to_string(ep),
                                                    it->second, tid));
        }
    }
    for (const auto &[ep, _] : states)
        if (!owner.contains(ep))
            throw Error("E300", {}, fmt::format("live channel {} is held by no thread", to_string(ep)));
    return main;
}

Type check_pool(const std::map<std::uint64_t, Expr> &threads, const std::vector<ChannelTyping> &channels,
                const SessionEnv &sessions, const Signature &sig) {
    return PoolChecker(sessions, sig).check(threads, channels);
}

bool check_value_purity(const Expr &v, const Type &t) { return is_linear(t) || resources_of(v).empty(); }

bool canonical_form_ok(const Expr &v, const Type &t, const SessionEnv &env) {
    return std::visit(overloaded{
                          [&](const ty::Base &b) {
                              return b.kind == BaseType::Int ? as<ex::Int>(v) != nullptr : as<ex::Bool>(v) != nullptr;
                          },
                          [&](const ty::Unit &) { return as<ex::Unit>(v) != nullptr; },
                          [&](const ty::Prod &p) {
                              const auto *pair = as<ex::Pair>(v);
                              return pair && canonical_form_ok(pair->first, p.first, env) &&
                                     canonical_form_ok(pair->second, p.second, env);
                          },
                          [&](const ty::Arrow &) { return as<ex::Lam>(v) != nullptr; },
                          [&](const ty::Chan &c) {
                              const auto *r = as<ex::Res>(v);
                              return r && r->ep.pol == c.pol;
                          },
                          [&](const ty::Service &) {
                              const auto *c = as<ex::ConstApp>(v);
                              return c && c->name == "service_create";
                          },
                          [](const auto &) { return false; },
                      },
                      t->v);
}

}  // namespace mtlc
