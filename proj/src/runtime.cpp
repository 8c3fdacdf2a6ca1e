#include "mtlc/runtime.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "mtlc/ast_ops.hpp"
#include "mtlc/overloaded.hpp"
#include "mtlc/syntax.hpp"

namespace mtlc {

std::string rule_tag(Rule r) {
    switch (r) {
    case Rule::PR0: return "PR0";
    case Rule::PR1: return "PR1";
    case Rule::PR2: return "PR2";
    case Rule::PR3: return "PR3";
    case Rule::PR3x2: return "PR3x2";
    case Rule::PR4Clos: return "PR4-clos";
    case Rule::PR4Send: return "PR4-send";
    case Rule::PR4Recv: return "PR4-recv";
    case Rule::PR4Tag: return "PR4-tag";
    case Rule::LinkClos: return "LINK-clos";
    case Rule::LinkSend: return "LINK-send";
    case Rule::LinkRecv: return "LINK-recv";
    case Rule::LinkTag: return "LINK-tag";
    }
    return "?";
}

// ------------------------------
// evaluation contexts
// ------------------------------

namespace {

Expr child_at(const Expr &e, std::size_t slot) {
    return std::visit(overloaded{
                          [&](const ex::ConstApp &c) { return c.args.at(slot); },
                          [&](const ex::Pair &p) { return slot == 0 ? p.first : p.second; },
                          [](const ex::Fst &f) { return f.pair; },
                          [](const ex::Snd &s) { return s.pair; },
                          [](const ex::LetPair &l) { return l.bound; },
                          [](const ex::If &i) { return i.cond; },
                          [&](const ex::App &a) { return slot == 0 ? a.fn : a.arg; },
                          [](const ex::Offer &o) { return o.chan; },
                          [](const ex::Select &s) { return s.chan; },
                          [](const auto &) -> Expr { throw std::logic_error("expression has no evaluation position"); },
                      },
                      e->v);
}

Expr replace_child(const Expr &e, std::size_t slot, const Expr &child) {
    return std::visit(overloaded{
                          [&](const ex::ConstApp &c) {
                              auto args = c.args;
                              args.at(slot) = child;
                              return make_expr(ex::ConstApp{c.name, std::move(args)}, e->loc);
                          },
                          [&](const ex::Pair &p) {
                              return slot == 0 ? make_expr(ex::Pair{child, p.second}, e->loc)
                                               : make_expr(ex::Pair{p.first, child}, e->loc);
                          },
                          [&](const ex::Fst &) { return make_expr(ex::Fst{child}, e->loc); },
                          [&](const ex::Snd &) { return make_expr(ex::Snd{child}, e->loc); },
                          [&](const ex::LetPair &l) {
                              return make_expr(ex::LetPair{l.first, l.second, child, l.body}, e->loc);
                          },
                          [&](const ex::If &i) {
                              return make_expr(ex::If{child, i.then_branch, i.else_branch}, e->loc);
                          },
                          [&](const ex::App &a) {
                              return slot == 0 ? make_expr(ex::App{child, a.arg}, e->loc)
                                               : make_expr(ex::App{a.fn, child}, e->loc);
                          },
                          [&](const ex::Offer &o) { return make_expr(ex::Offer{child, o.arms}, e->loc); },
                          [&](const ex::Select &s) { return make_expr(ex::Select{s.tag, child}, e->loc); },
                          [](const auto &) -> Expr { throw std::logic_error("expression has no evaluation position"); },
                      },
                      e->v);
}

const std::set<std::string> kAdHoc = {"+", "-", "*", "/", "mod", "<", "<=", ">", ">=", "=", "<>", "&&", "||",
                                      "not", "randbit"};
const std::set<std::string> kSpawn = {"thread_create", "chneg_create", "chneg_create2", "service_request"};
const std::set<std::string> kPartial = {"close", "channeg_close", "send", "recv", "channeg_send", "channeg_recv",
                                        "chposneg_link"};

}  // namespace

Expr EvalContext::plug(const Expr &hole) const {
    Expr cur = hole;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) cur = replace_child(it->parent, it->slot, cur);
    return cur;
}

Decomposition decompose(const Expr &root) {
    Decomposition d;
    if (is_value(root)) {
        d.kind = Decomposition::Kind::Value;
        return d;
    }
    Expr cur = root;
    auto descend = [&](std::size_t slot) {
        d.ctx.frames.push_back({cur, slot});
        cur = child_at(cur, slot);
    };
    auto found = [&](RedexKind k) {
        d.kind = Decomposition::Kind::Redex;
        d.redex_kind = k;
        d.redex = cur;
        return true;
    };
    auto stuck = [&] {
        d.kind = Decomposition::Kind::Stuck;
        d.redex = cur;
        return true;
    };
    // Every expression reached here is not a value.
    while (true) {
        bool done = std::visit(
            overloaded{
                [&](const ex::ConstApp &c) {
                    for (std::size_t i = 0; i < c.args.size(); ++i) {
                        if (!is_value(c.args[i])) {
                            descend(i);
                            return false;
                        }
                    }
                    if (kAdHoc.contains(c.name)) return found(RedexKind::AdHoc);
                    if (kSpawn.contains(c.name)) return found(RedexKind::Spawn);
                    if (kPartial.contains(c.name)) return found(RedexKind::Partial);
                    return stuck();
                },
                [&](const ex::Pair &p) {
                    descend(is_value(p.first) ? 1 : 0);
                    return false;
                },
                [&](const ex::Fst &f) {
                    if (!is_value(f.pair)) return descend(0), false;
                    return as<ex::Pair>(f.pair) ? found(RedexKind::Pure) : stuck();
                },
                [&](const ex::Snd &s) {
                    if (!is_value(s.pair)) return descend(0), false;
                    return as<ex::Pair>(s.pair) ? found(RedexKind::Pure) : stuck();
                },
                [&](const ex::LetPair &l) {
                    if (!is_value(l.bound)) return descend(0), false;
                    return as<ex::Pair>(l.bound) ? found(RedexKind::Pure) : stuck();
                },
                [&](const ex::If &i) {
                    if (!is_value(i.cond)) return descend(0), false;
                    return as<ex::Bool>(i.cond) ? found(RedexKind::Pure) : stuck();
                },
                [&](const ex::App &a) {
                    if (!is_value(a.fn)) return descend(0), false;
                    if (!is_value(a.arg)) return descend(1), false;
                    return as<ex::Lam>(a.fn) ? found(RedexKind::Pure) : stuck();
                },
                [&](const ex::Fix &) { return found(RedexKind::Pure); },
                [&](const ex::Offer &o) {
                    if (!is_value(o.chan)) return descend(0), false;
                    return as<ex::Res>(o.chan) ? found(RedexKind::Partial) : stuck();
                },
                [&](const ex::Select &s) {
                    if (!is_value(s.chan)) return descend(0), false;
                    return as<ex::Res>(s.chan) ? found(RedexKind::Partial) : stuck();
                },
                [&](const auto &) { return stuck(); },
            },
            cur->v);
        if (done) return d;
    }
}

Expr reduce_pure(const Expr &redex) {
    return std::visit(
        overloaded{
            [](const ex::App &a) {
                const auto *lam = as<ex::Lam>(a.fn);
                if (!lam) throw std::logic_error("application of a non-lambda");
                Substitution theta;
                theta.vars[lam->param] = a.arg;
                return subst(lam->body, theta);
            },
            [](const ex::Fst &f) { return as<ex::Pair>(f.pair)->first; },
            [](const ex::Snd &s) { return as<ex::Pair>(s.pair)->second; },
            [](const ex::LetPair &l) {
                const auto *p = as<ex::Pair>(l.bound);
                if (!p) throw std::logic_error("let-pair of a non-pair");
                Substitution theta;
                theta.vars[l.first] = p->first;
                theta.vars[l.second] = p->second;
                return subst(l.body, theta);
            },
            [](const ex::If &i) {
                const auto *b = as<ex::Bool>(i.cond);
                if (!b) throw std::logic_error("if on a non-boolean");
                return b->value ? i.then_branch : i.else_branch;
            },
            [&](const ex::Fix &f) {
                Substitution theta;
                theta.fix_vars[f.name] = redex;
                return subst(f.body, theta);
            },
            [](const auto &) -> Expr { throw std::logic_error("not a pure redex"); },
        },
        redex->v);
}

Expr reduce_adhoc(const std::string &name, const std::vector<Expr> &args, Rng &rng) {
    auto int_arg = [&](std::size_t i) {
        const auto *v = i < args.size() ? as<ex::Int>(args[i]) : nullptr;
        if (!v) throw std::logic_error(fmt::format("'{}' applied to a non-integer", name));
        return v->value;
    };
    auto bool_arg = [&](std::size_t i) {
        const auto *v = i < args.size() ? as<ex::Bool>(args[i]) : nullptr;
        if (!v) throw std::logic_error(fmt::format("'{}' applied to a non-boolean", name));
        return v->value;
    };
    auto wrap = [](std::uint64_t x) { return make_expr(ex::Int{static_cast<std::int64_t>(x)}); };
    auto boolean = [](bool b) { return make_expr(ex::Bool{b}); };
    if (name == "randbit") return make_expr(ex::Int{static_cast<std::int64_t>(rng() & 1U)});
    if (name == "not") return boolean(!bool_arg(0));
    if (name == "&&") return boolean(bool_arg(0) && bool_arg(1));
    if (name == "||") return boolean(bool_arg(0) || bool_arg(1));
    std::int64_t a = int_arg(0), b = int_arg(1);
    auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
    if (name == "+") return wrap(ua + ub);
    if (name == "-") return wrap(ua - ub);
    if (name == "*") return wrap(ua * ub);
    if (name == "/") return make_expr(ex::Int{b == 0 || (b == -1 && a == INT64_MIN) ? 0 : a / b});
    if (name == "mod") return make_expr(ex::Int{b == 0 || b == -1 ? 0 : a % b});
    if (name == "<") return boolean(a < b);
    if (name == "<=") return boolean(a <= b);
    if (name == ">") return boolean(a > b);
    if (name == ">=") return boolean(a >= b);
    if (name == "=") return boolean(a == b);
    if (name == "<>") return boolean(a != b);
    throw std::logic_error(fmt::format("no ad-hoc reduct for '{}'", name));
}

// ------------------------------
// steps
// ------------------------------

namespace {

enum class Act : std::uint8_t { Close, Out, In, OutTag, InTag, Link };

struct PartialOp {
    Act act;
    Endpoint ep;
    Endpoint second;  // chposneg_link only
    Expr value;       // Out only
    std::string tag;  // OutTag only
};

std::optional<Endpoint> endpoint_of(const Expr &e) {
    if (const auto *r = as<ex::Res>(e)) return r->ep;
    return std::nullopt;
}

std::optional<PartialOp> partial_op(const Expr &redex) {
    if (const auto *s = as<ex::Select>(redex)) {
        auto ep = endpoint_of(s->chan);
        if (!ep) return std::nullopt;
        return PartialOp{Act::OutTag, *ep, {}, nullptr, s->tag};
    }
    if (const auto *o = as<ex::Offer>(redex)) {
        auto ep = endpoint_of(o->chan);
        if (!ep) return std::nullopt;
        return PartialOp{Act::InTag, *ep, {}, nullptr, {}};
    }
    const auto *c = as<ex::ConstApp>(redex);
    if (!c || c->args.empty()) return std::nullopt;
    auto ep = endpoint_of(c->args[0]);
    if (!ep) return std::nullopt;
    const std::string &n = c->name;
    Polarity want = n == "close" || n == "send" || n == "recv" || n == "chposneg_link" ? Polarity::Pos : Polarity::Neg;
    if (ep->pol != want) return std::nullopt;
    if (n == "close" || n == "channeg_close") return PartialOp{Act::Close, *ep, {}, nullptr, {}};
    if (n == "recv" || n == "channeg_send") return PartialOp{Act::In, *ep, {}, nullptr, {}};
    if (c->args.size() < 2) return std::nullopt;
    if (n == "send" || n == "channeg_recv") return PartialOp{Act::Out, *ep, {}, c->args[1], {}};
    if (n == "chposneg_link") {
        auto second = endpoint_of(c->args[1]);
        if (!second || second->pol != Polarity::Neg) return std::nullopt;
        return PartialOp{Act::Link, *ep, *second, nullptr, {}};
    }
    return std::nullopt;
}

std::optional<Rule> pairing(Act neg, Act pos, bool linked) {
    if (neg == Act::Close && pos == Act::Close) return linked ? Rule::LinkClos : Rule::PR4Clos;
    if (neg == Act::In && pos == Act::Out) return linked ? Rule::LinkSend : Rule::PR4Send;
    if (neg == Act::Out && pos == Act::In) return linked ? Rule::LinkRecv : Rule::PR4Recv;
    if ((neg == Act::OutTag && pos == Act::InTag) || (neg == Act::InTag && pos == Act::OutTag))
        return linked ? Rule::LinkTag : Rule::PR4Tag;
    return std::nullopt;
}

bool is_channel_rule(Rule r) { return r >= Rule::PR4Clos; }

}  // namespace

std::string to_string(const Step &s) {
    std::string tids, chans;
    for (std::size_t i = 0; i < s.tids.size(); ++i) tids += (i ? "," : "") + std::to_string(s.tids[i]);
    for (std::size_t i = 0; i < s.channels.size(); ++i) chans += (i ? "," : "") + std::to_string(s.channels[i]);
    return fmt::format("{} tids={} chan={}", rule_tag(s.rule), tids, chans.empty() ? "-" : chans);
}

const Decomposition &DecomposeCache::get(Tid tid, const Expr &e) {
    auto it = entries.find(tid);
    if (it == entries.end() || it->second.first != e) {
        it = entries.insert_or_assign(tid, std::make_pair(e, decompose(e))).first;
    }
    return it->second.second;
}

std::vector<Step> enabled_steps(const Pool &pool, const ChannelStore &store, DecomposeCache *cache) {
    (void)store;
    DecomposeCache local;
    DecomposeCache &dc = cache ? *cache : local;
    std::vector<Step> steps;
    std::map<Endpoint, std::pair<Tid, PartialOp>> ops;
    for (const auto &[tid, e] : pool.threads) {
        const Decomposition &d = dc.get(tid, e);
        if (d.kind == Decomposition::Kind::Value) {
            if (tid != 0 && as<ex::Unit>(e)) steps.push_back({Rule::PR2, {tid}, {}});
            continue;
        }
        if (d.kind != Decomposition::Kind::Redex) continue;
        switch (d.redex_kind) {
        case RedexKind::Pure:
        case RedexKind::AdHoc: steps.push_back({Rule::PR0, {tid}, {}}); break;
        case RedexKind::Spawn: {
            const std::string &n = as<ex::ConstApp>(d.redex)->name;
            Rule r = n == "thread_create" ? Rule::PR1 : n == "chneg_create2" ? Rule::PR3x2 : Rule::PR3;
            steps.push_back({r, {tid}, {}});
            break;
        }
        case RedexKind::Partial:
            if (auto op = partial_op(d.redex)) ops.emplace(op->ep, std::make_pair(tid, *op));
            break;
        }
    }
    for (const auto &[ep, entry] : ops) {
        const auto &[tid, op] = entry;
        if (ep.pol != Polarity::Neg || op.act == Act::Link) continue;
        Step s{Rule::PR0, {tid}, {ep.id}};
        std::set<Tid> visited{tid};
        Endpoint x = ep.dual();
        while (true) {
            auto it = ops.find(x);
            if (it == ops.end() || !visited.insert(it->second.first).second) break;
            const auto &[ptid, pop] = it->second;
            s.tids.push_back(ptid);
            if (pop.act == Act::Link) {
                x = pop.second.dual();
                s.channels.push_back(x.id);
                continue;
            }
            if (auto r = pairing(op.act, pop.act, s.tids.size() > 2)) {
                s.rule = *r;
                steps.push_back(s);
            }
            break;
        }
    }
    std::stable_sort(steps.begin(), steps.end(),
                     [](const Step &a, const Step &b) { return a.tids.front() < b.tids.front(); });
    return steps;
}

namespace {

Session advance_state(const Session &state, const SessionEnv &env, Act pos_act, const std::string &tag) {
    Session head = unfold_head(state, env);
    return std::visit(overloaded{
                          [&](const sess::Snd &s) {
                              if (pos_act != Act::Out) throw std::logic_error("positive end sends here");
                              return s.next;
                          },
                          [&](const sess::Rcv &s) {
                              if (pos_act != Act::In) throw std::logic_error("positive end receives here");
                              return s.next;
                          },
                          [&](const sess::Choice &c) {
                              for (const auto &b : c.branches)
                                  if (b.tag == tag) return b.next;
                              throw std::logic_error(fmt::format("tag '{}' not in session", tag));
                          },
                          [&](const auto &) -> Session {
                              throw std::logic_error("channel state cannot advance: " + print_session(state));
                          },
                      },
                      head->v);
}

Session param_session(const Expr &lam_expr, const char *what) {
    const auto *lam = as<ex::Lam>(lam_expr);
    if (!lam || !lam->param_type) throw std::logic_error(fmt::format("{} needs an annotated lambda", what));
    const auto *ch = std::get_if<ty::Chan>(&lam->param_type->v);
    if (!ch || ch->pol != Polarity::Pos) throw std::logic_error(fmt::format("{} needs a lambda over chpos", what));
    return ch->session;
}

Expr res(ChannelId id, Polarity pol) { return make_expr(ex::Res{{id, pol}}); }

}  // namespace

TraceEvent apply_step(Pool &pool, ChannelStore &store, const Step &step, Rng &rng, const SessionEnv &sessions,
                      DecomposeCache *cache) {
    DecomposeCache local;
    DecomposeCache &dc = cache ? *cache : local;
    TraceEvent ev;
    ev.rule = step.rule;
    ev.tids = step.tids;
    auto thread = [&](Tid tid) -> Expr & {
        auto it = pool.threads.find(tid);
        if (it == pool.threads.end()) throw std::logic_error(fmt::format("no thread {}", tid));
        return it->second;
    };
    Tid t0 = step.tids.at(0);
    switch (step.rule) {
    case Rule::PR0: {
        Expr &e = thread(t0);
        const Decomposition d = dc.get(t0, e);
        if (d.kind != Decomposition::Kind::Redex) throw std::logic_error("PR0 on a thread without a redex");
        Expr reduct;
        if (d.redex_kind == RedexKind::Pure) {
            reduct = reduce_pure(d.redex);
            ev.note = "pure";
        } else if (d.redex_kind == RedexKind::AdHoc) {
            const auto *c = as<ex::ConstApp>(d.redex);
            reduct = reduce_adhoc(c->name, c->args, rng);
            ev.note = c->name;
        } else {
            throw std::logic_error("PR0 on a thread that needs a pool rule");
        }
        e = d.ctx.plug(reduct);
        return ev;
    }
    case Rule::PR1:
    case Rule::PR3:
    case Rule::PR3x2: {
        Expr &e = thread(t0);
        const Decomposition d = dc.get(t0, e);
        const auto *c = d.kind == Decomposition::Kind::Redex ? as<ex::ConstApp>(d.redex) : nullptr;
        if (!c || d.redex_kind != RedexKind::Spawn) throw std::logic_error("spawn rule on a thread without a spawn");
        Expr fn = c->args.at(0);
        if (c->name == "service_request") {
            const auto *svc = as<ex::ConstApp>(fn);
            if (!svc || svc->name != "service_create") throw std::logic_error("service_request needs a service");
            fn = svc->args.at(0);
        }
        Tid child = pool.next_tid++;
        ev.tids = {t0, child};
        ev.note = c->name;
        Expr creator_gets;
        if (step.rule == Rule::PR1) {
            pool.threads[child] = make_expr(ex::App{fn, make_expr(ex::Unit{})});
            creator_gets = make_expr(ex::Unit{});
        } else if (step.rule == Rule::PR3) {
            Session s = param_session(fn, c->name.c_str());
            ChannelId id = store.next_id++;
            store.channels[id] = {s, s};
            ev.channels = {id};
            pool.threads[child] = make_expr(ex::App{fn, res(id, Polarity::Pos)});
            creator_gets = res(id, Polarity::Neg);
        } else {
            const auto *lam = as<ex::Lam>(fn);
            const auto *prod = lam && lam->param_type ? std::get_if<ty::Prod>(&lam->param_type->v) : nullptr;
            const auto *c1 = prod ? std::get_if<ty::Chan>(&prod->first->v) : nullptr;
            const auto *c2 = prod ? std::get_if<ty::Chan>(&prod->second->v) : nullptr;
            if (!c1 || !c2) throw std::logic_error("chneg_create2 needs a lambda over a pair of channels");
            ChannelId a = store.next_id++, b = store.next_id++;
            store.channels[a] = {c1->session, c1->session};
            store.channels[b] = {c2->session, c2->session};
            ev.channels = {a, b};
            pool.threads[child] =
                make_expr(ex::App{fn, make_expr(ex::Pair{res(a, Polarity::Pos), res(b, Polarity::Pos)})});
            creator_gets = make_expr(ex::Pair{res(a, Polarity::Neg), res(b, Polarity::Neg)});
        }
        e = d.ctx.plug(creator_gets);
        return ev;
    }
    case Rule::PR2: {
        if (t0 == 0 || !as<ex::Unit>(thread(t0))) throw std::logic_error("PR2 needs a finished non-main thread");
        pool.threads.erase(t0);
        dc.entries.erase(t0);
        return ev;
    }
    default: break;
    }

    // Channel rules: tids = negative end, linkers..., positive end; channels = the chain between them.
    if (step.tids.size() < 2 || step.channels.size() + 1 != step.tids.size())
        throw std::logic_error("malformed channel step");
    ev.channels = step.channels;
    Tid neg_tid = step.tids.front(), pos_tid = step.tids.back();
    const Decomposition dn = dc.get(neg_tid, thread(neg_tid));
    const Decomposition dp = dc.get(pos_tid, thread(pos_tid));
    auto nop = dn.blocked() ? partial_op(dn.redex) : std::nullopt;
    auto pop = dp.blocked() ? partial_op(dp.redex) : std::nullopt;
    if (!nop || !pop) throw std::logic_error("channel step on threads that are not blocked");
    if (nop->ep != Endpoint{step.channels.front(), Polarity::Neg} ||
        pop->ep != Endpoint{step.channels.back(), Polarity::Pos})
        throw std::logic_error("channel step does not match the blocked operations");
    bool linked = step.tids.size() > 2;
    auto rule = pairing(nop->act, pop->act, linked);
    if (!rule || *rule != step.rule) throw std::logic_error("blocked operations do not match");
    for (std::size_t k = 1; k + 1 < step.tids.size(); ++k) {
        const Decomposition dl = dc.get(step.tids[k], thread(step.tids[k]));
        auto lop = dl.blocked() ? partial_op(dl.redex) : std::nullopt;
        if (!lop || lop->act != Act::Link || lop->ep != Endpoint{step.channels[k - 1], Polarity::Pos} ||
            lop->second != Endpoint{step.channels[k], Polarity::Neg})
            throw std::logic_error("broken link chain");
    }

    auto fill = [&](const Decomposition &d, Tid tid, const PartialOp &op, const Expr &incoming) {
        Expr here = res(op.ep.id, op.ep.pol);
        Expr result;
        switch (op.act) {
        case Act::Close: result = make_expr(ex::Unit{}); break;
        case Act::Out:
        case Act::OutTag: result = here; break;
        case Act::In: result = make_expr(ex::Pair{here, incoming}); break;
        case Act::InTag: {
            const auto *offer = as<ex::Offer>(d.redex);
            const std::string &tag = nop->act == Act::OutTag ? nop->tag : pop->tag;
            auto arm = std::find_if(offer->arms.begin(), offer->arms.end(),
                                    [&](const ex::OfferArm &a) { return a.tag == tag; });
            if (arm == offer->arms.end()) throw std::logic_error(fmt::format("offer has no arm for '{}'", tag));
            Substitution theta;
            theta.vars[arm->var] = here;
            result = subst(arm->body, theta);
            break;
        }
        case Act::Link: throw std::logic_error("link is not an end of a chain");
        }
        thread(tid) = d.ctx.plug(result);
    };

    std::string tag = nop->act == Act::OutTag ? nop->tag : pop->act == Act::OutTag ? pop->tag : "";
    if (nop->act == Act::Close) {
        for (ChannelId id : step.channels) store.channels.erase(id);
        for (std::size_t k = 1; k + 1 < step.tids.size(); ++k) {
            const Decomposition dl = dc.get(step.tids[k], thread(step.tids[k]));
            thread(step.tids[k]) = dl.ctx.plug(make_expr(ex::Unit{}));
        }
        ev.note = "close";
    } else {
        for (ChannelId id : step.channels) {
            auto it = store.channels.find(id);
            if (it == store.channels.end()) throw std::logic_error(fmt::format("channel {} is not live", id));
            it->second.pos_state = advance_state(it->second.pos_state, sessions, pop->act, tag);
            it->second.neg_state = advance_state(it->second.neg_state, sessions, pop->act, tag);
        }
        ev.note = tag.empty() ? "message" : "tag=" + tag;
    }
    Expr payload = nop->act == Act::Out ? nop->value : pop->act == Act::Out ? pop->value : nullptr;
    fill(dn, neg_tid, *nop, payload);
    fill(dp, pos_tid, *pop, payload);
    return ev;
}

std::vector<ChannelTyping> channel_typings(const ChannelStore &store) {
    std::vector<ChannelTyping> out;
    for (const auto &[id, rec] : store.channels)
        out.push_back({id, rec.pos_state, rec.neg_state, rec.pos_live, rec.neg_live});
    return out;
}

// ------------------------------
// scheduling
// ------------------------------

std::string to_string(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Final: return "final";
    case OutcomeKind::Deadlock: return "deadlock";
    case OutcomeKind::StepLimit: return "step-limit";
    case OutcomeKind::MonitorViolation: return "monitor-violation";
    }
    return "?";
}

int exit_code(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Final: return 0;
    case OutcomeKind::Deadlock: return 2;
    case OutcomeKind::StepLimit: return 3;
    case OutcomeKind::MonitorViolation: return 4;
    }
    return 4;
}

Machine::Machine(const Program &program, const RunConfig &cfg)
    : cfg_(cfg),
      sessions_(program.sessions),
      signature_(Signature::builtin(cfg.allow_create2)),
      rng_(cfg.seed),
      checker_(sessions_, signature_) {
    if (!program.main) throw Error("E200", {}, "program has no main");
    auto diags = check_program(program, signature_);
    if (!diags.empty()) throw Error(diags.front().code, diags.front().loc, diags.front().message);
    main_type_ = main_type(program, signature_);
    pool_.threads[0] = elaborate(program).main;
}

std::vector<Step> Machine::enabled() { return enabled_steps(pool_, store_, &cache_); }

TraceEvent Machine::apply(const Step &step) {
    TraceEvent ev = apply_step(pool_, store_, step, rng_, sessions_, &cache_);
    ev.step = ++steps_;
    return ev;
}

std::size_t Machine::choose(const std::vector<Step> &steps) {
    switch (cfg_.policy) {
    case Policy::Random: return static_cast<std::size_t>(rng_() % steps.size());
    case Policy::RoundRobin: {
        std::size_t pick = 0;
        for (std::size_t i = 0; i < steps.size(); ++i)
            if (steps[i].tids.front() >= rr_cursor_) {
                pick = i;
                break;
            }
        rr_cursor_ = steps[pick].tids.front() + 1;
        return pick;
    }
    case Policy::Adversarial: {
        std::vector<std::size_t> local;
        for (std::size_t i = 0; i < steps.size(); ++i)
            if (!is_channel_rule(steps[i].rule)) local.push_back(i);
        if (local.empty()) return static_cast<std::size_t>(rng_() % steps.size());
        return local[rng_() % local.size()];
    }
    }
    return 0;
}

const std::map<Tid, ChannelSet> &Machine::current_rch() {
    for (auto it = rch_cache_.begin(); it != rch_cache_.end();) {
        if (!pool_.threads.contains(it->first)) {
            rch_.erase(it->first);
            it = rch_cache_.erase(it);
        } else {
            ++it;
        }
    }
    for (const auto &[tid, e] : pool_.threads) {
        auto it = rch_cache_.find(tid);
        if (it != rch_cache_.end() && it->second.first == e) continue;
        auto eps = resource_memo_.resources_of(e);
        ChannelSet set(eps.begin(), eps.end());
        rch_[tid] = set;
        rch_cache_[tid] = {e, std::move(set)};
    }
    return rch_;
}

std::string Machine::rch_summary() {
    std::string out = "rch=";
    for (const auto &[tid, set] : current_rch())
        out += fmt::format("{}{}:{}", out.size() > 4 ? " " : "", tid, to_string(set));
    return out;
}

std::optional<MonitorFinding> Machine::check_monitors(const std::map<Tid, ChannelSet> &prev, const TraceEvent &ev) {
    if (cfg_.monitors.types) {
        try {
            Type t = checker_.check(pool_.threads, channel_typings(store_));
            if (!type_equal(t, main_type_, sessions_))
                return MonitorFinding{ev.step, "types",
                                      fmt::format("main thread type changed from {} to {}", print_type(main_type_),
                                                  print_type(t))};
        } catch (const Error &err) {
            return MonitorFinding{ev.step, "types", fmt::format("{} {}", err.code(), err.what())};
        }
    }
    if (cfg_.monitors.df) {
        const std::map<Tid, ChannelSet> &next = current_rch();
        const Expr &main = pool_.threads.at(0);
        bool main_holds_channels_as_value = is_value(main) && !next.at(0).empty();
        if (!main_holds_channels_as_value) {
            if (auto err = monitor_step(prev, ev, next)) return MonitorFinding{ev.step, "df", *err};
        }
    }
    if (cfg_.monitors.canonical) {
        CheckEnv env;
        env.sessions = sessions_;
        env.signature = signature_;
        for (const auto &[id, rec] : store_.channels) {
            env.resources[{id, Polarity::Pos}] = t_chpos(rec.pos_state);
            env.resources[{id, Polarity::Neg}] = t_chneg(rec.neg_state);
        }
        for (Tid tid : ev.tids) {
            auto it = pool_.threads.find(tid);
            if (it == pool_.threads.end() || !is_value(it->second)) continue;
            try {
                ClosedCheck r = check_closed(it->second, env);
                if (!canonical_form_ok(it->second, r.type, sessions_))
                    return MonitorFinding{ev.step, "canonical",
                                          fmt::format("thread {} value {} does not have the shape of {}", tid,
                                                      print_expr(it->second), print_type(r.type))};
                if (!check_value_purity(it->second, r.type))
                    return MonitorFinding{ev.step, "canonical",
                                          fmt::format("thread {} holds channels in a nonlinear value", tid)};
            } catch (const Error &err) {
                return MonitorFinding{ev.step, "canonical", fmt::format("{} {}", err.code(), err.what())};
            }
        }
    }
    return std::nullopt;
}

std::vector<std::string> Machine::deadlock_witness() {
    std::vector<std::string> out;
    std::map<Endpoint, Tid> holder;
    for (const auto &[tid, e] : pool_.threads)
        for (const auto &ep : resources_of(e)) holder[ep] = tid;
    for (const auto &[tid, e] : pool_.threads) {
        const Decomposition &d = cache_.get(tid, e);
        if (!d.blocked()) {
            out.push_back(fmt::format("thread {} is {}", tid,
                                      d.kind == Decomposition::Kind::Value ? "a value" : "not blocked"));
            continue;
        }
        auto op = partial_op(d.redex);
        std::string what = print_expr(d.redex);
        if (what.size() > 80) what = what.substr(0, 77) + "...";
        out.push_back(fmt::format("thread {} blocked on {}", tid, what));
        if (!op) continue;
        std::vector<Endpoint> waits{op->ep};
        if (op->act == Act::Link) waits.push_back(op->second);
        for (const auto &ep : waits) {
            auto h = holder.find(ep.dual());
            if (h != holder.end())
                out.push_back(fmt::format("wait {} -> {} on channel {}", tid, h->second, ep.id));
        }
    }
    return out;
}

Outcome Machine::run() {
    Outcome out;
    std::map<Tid, ChannelSet> prev;
    if (cfg_.monitors.df) prev = current_rch();
    while (true) {
        const Expr &main = pool_.threads.at(0);
        if (pool_.threads.size() == 1 && is_value(main)) {
            out.kind = OutcomeKind::Final;
            out.value = main;
            break;
        }
        std::vector<Step> steps = enabled();
        if (steps.empty()) {
            if (is_value(main) && !resources_of(main).empty()) {
                out.kind = OutcomeKind::Final;
                out.value = main;
                out.residual = true;
                break;
            }
            for (const auto &[tid, e] : pool_.threads) {
                if (cache_.get(tid, e).kind == Decomposition::Kind::Stuck) {
                    out.kind = OutcomeKind::MonitorViolation;
                    out.detail = fmt::format("thread {} is stuck at {}", tid, print_expr(cache_.get(tid, e).redex));
                    out.steps = steps_;
                    return out;
                }
            }
            out.kind = OutcomeKind::Deadlock;
            out.witness = deadlock_witness();
            break;
        }
        if (steps_ >= cfg_.step_limit) {
            out.kind = OutcomeKind::StepLimit;
            break;
        }
        const Step &step = steps[choose(steps)];
        TraceEvent ev;
        try {
            ev = apply(step);
        } catch (const std::logic_error &err) {
            out.kind = OutcomeKind::MonitorViolation;
            out.detail = fmt::format("step {} failed: {}", to_string(step), err.what());
            break;
        }
        if (cfg_.on_event) {
            ev.note += " " + rch_summary();
            cfg_.on_event(ev);
        }
        if (cfg_.monitors.any()) {
            if (auto finding = check_monitors(prev, ev)) {
                out.findings.push_back(*finding);
                if (!cfg_.observe_only) {
                    out.kind = OutcomeKind::MonitorViolation;
                    out.detail = fmt::format("{} monitor at step {}: {}", finding->monitor, finding->step,
                                             finding->detail);
                    break;
                }
            }
            if (cfg_.monitors.df) prev = current_rch();
        }
    }
    out.steps = steps_;
    return out;
}

Outcome run_program(const Program &program, const RunConfig &cfg) { return Machine(program, cfg).run(); }

}  // namespace mtlc
