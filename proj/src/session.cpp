#include "mtlc/session.hpp"

#include <fmt/format.h>

#include "mtlc/error.hpp"
#include "mtlc/overloaded.hpp"
#include "mtlc/syntax.hpp"

namespace mtlc {

SessionEnv::SessionEnv(const std::vector<SessionDef> &defs) {
    for (const auto &d : defs) define(d.name, d.body);
}

void SessionEnv::define(const std::string &name, Session body) { defs_[name] = std::move(body); }

const Session &SessionEnv::body(const std::string &name) const {
    auto it = defs_.find(name);
    if (it == defs_.end()) throw Error("E101", {}, fmt::format("unknown session type '{}'", name));
    return it->second;
}

namespace {

void check_names(const Session &s, const SessionEnv &env, const std::string &owner);

void check_type_names(const Type &t, const SessionEnv &env, const std::string &owner) {
    std::visit(overloaded{
                   [&](const ty::Prod &p) {
                       check_type_names(p.first, env, owner);
                       check_type_names(p.second, env, owner);
                   },
                   [&](const ty::Arrow &a) {
                       check_type_names(a.param, env, owner);
                       check_type_names(a.result, env, owner);
                   },
                   [&](const ty::Chan &c) { check_names(c.session, env, owner); },
                   [&](const ty::Service &c) { check_names(c.session, env, owner); },
                   [](const auto &) {},
               },
               t->v);
}

void check_names(const Session &s, const SessionEnv &env, const std::string &owner) {
    std::visit(overloaded{
                   [&](const sess::Snd &x) {
                       check_type_names(x.payload, env, owner);
                       check_names(x.next, env, owner);
                   },
                   [&](const sess::Rcv &x) {
                       check_type_names(x.payload, env, owner);
                       check_names(x.next, env, owner);
                   },
                   [&](const sess::Named &n) {
                       if (!env.contains(n.name))
                           throw Error("E101", {},
                                       fmt::format("session type '{}' refers to undefined '{}'", owner, n.name));
                   },
                   [&](const sess::Choice &c) {
                       std::set<std::string> seen;
                       for (const auto &b : c.branches) {
                           if (!seen.insert(b.tag).second)
                               throw Error("E101", {},
                                           fmt::format("session type '{}' repeats tag '{}'", owner, b.tag));
                           check_names(b.next, env, owner);
                       }
                   },
                   [](const auto &) {},
               },
               s->v);
}

}  // namespace

void SessionEnv::validate() const {
    for (const auto &[name, body] : defs_) check_names(body, *this, name);
    for (const auto &[name, body] : defs_) unfold_head(s_named(name), *this);
}

Session dual(const Session &s) {
    return std::visit(overloaded{
                          [](const sess::Nil &) { return s_nilbar(); },
                          [](const sess::NilBar &) { return s_nil(); },
                          [](const sess::Snd &x) { return s_rcv(x.payload, dual(x.next)); },
                          [](const sess::Rcv &x) { return s_snd(x.payload, dual(x.next)); },
                          [](const sess::Named &n) { return s_named(n.name, !n.dual); },
                          [](const sess::Choice &c) {
                              std::vector<sess::Branch> branches;
                              for (const auto &b : c.branches) branches.push_back({b.tag, dual(b.next)});
                              return s_choice(flip(c.dir), std::move(branches));
                          },
                          [&](const sess::Var &) -> Session {
                              throw Error("E101", {}, "cannot dualize a session variable");
                          },
                      },
                      s->v);
}

Session unfold(const Session &s, const SessionEnv &env) {
    const auto *n = std::get_if<sess::Named>(&s->v);
    if (!n) return s;
    const Session &body = env.body(n->name);
    return n->dual ? dual(body) : body;
}

Session unfold_head(const Session &s, const SessionEnv &env) {
    Session cur = s;
    for (std::size_t i = 0; i <= env.size() + 1; ++i) {
        if (!std::holds_alternative<sess::Named>(cur->v)) return cur;
        cur = unfold(cur, env);
    }
    throw Error("E101", {}, fmt::format("session type '{}' is not contractive", print_session(s)));
}

namespace {

class Equality {
public:
    explicit Equality(const SessionEnv &env) : env_(env) {}

    bool sessions(const Session &a, const Session &b) {
        if (same_session(a, b)) return true;
        bool a_named = std::holds_alternative<sess::Named>(a->v);
        bool b_named = std::holds_alternative<sess::Named>(b->v);
        if (a_named || b_named) {
            if (!assumed_.insert({print_session(a), print_session(b)}).second) return true;
            return sessions(a_named ? unfold_head(a, env_) : a, b_named ? unfold_head(b, env_) : b);
        }
        if (a->v.index() != b->v.index()) return false;
        return std::visit(overloaded{
                              [&](const sess::Snd &x, const sess::Snd &y) {
                                  return types(x.payload, y.payload) && sessions(x.next, y.next);
                              },
                              [&](const sess::Rcv &x, const sess::Rcv &y) {
                                  return types(x.payload, y.payload) && sessions(x.next, y.next);
                              },
                              [&](const sess::Choice &x, const sess::Choice &y) {
                                  if (x.dir != y.dir || x.branches.size() != y.branches.size()) return false;
                                  for (std::size_t i = 0; i < x.branches.size(); ++i) {
                                      if (x.branches[i].tag != y.branches[i].tag ||
                                          !sessions(x.branches[i].next, y.branches[i].next))
                                          return false;
                                  }
                                  return true;
                              },
                              [](const auto &, const auto &) { return false; },
                          },
                          a->v, b->v);
    }

    bool types(const Type &a, const Type &b) {
        if (same_type(a, b)) return true;
        if (a->v.index() != b->v.index()) return false;
        return std::visit(overloaded{
                              [&](const ty::Prod &x, const ty::Prod &y) {
                                  return x.lin == y.lin && types(x.first, y.first) && types(x.second, y.second);
                              },
                              [&](const ty::Arrow &x, const ty::Arrow &y) {
                                  return x.lin == y.lin && types(x.param, y.param) && types(x.result, y.result);
                              },
                              [&](const ty::Chan &x, const ty::Chan &y) {
                                  return x.pol == y.pol && sessions(x.session, y.session);
                              },
                              [&](const ty::Service &x, const ty::Service &y) { return sessions(x.session, y.session); },
                              [](const auto &, const auto &) { return false; },
                          },
                          a->v, b->v);
    }

private:
    const SessionEnv &env_;
    std::set<std::pair<std::string, std::string>> assumed_;
};

}  // namespace

bool session_equal(const Session &a, const Session &b, const SessionEnv &env) {
    return Equality(env).sessions(a, b);
}

bool type_equal(const Type &a, const Type &b, const SessionEnv &env) { return Equality(env).types(a, b); }

bool matches(const Session &pos, const Session &neg, const SessionEnv &env) { return session_equal(pos, neg, env); }

}  // namespace mtlc
