#include "mtlc/ast_ops.hpp"

#include <algorithm>
#include <stdexcept>

#include "mtlc/overloaded.hpp"

namespace mtlc {

bool is_constructor(const std::string &const_name) { return const_name == "service_create"; }

bool is_value(const Expr &e) {
    return std::visit(overloaded{
                          [](const ex::Var &) { return true; },
                          [](const ex::Res &) { return true; },
                          [](const ex::Int &) { return true; },
                          [](const ex::Bool &) { return true; },
                          [](const ex::Unit &) { return true; },
                          [](const ex::Lam &) { return true; },
                          [](const ex::Pair &p) { return is_value(p.first) && is_value(p.second); },
                          [](const ex::ConstApp &c) {
                              return is_constructor(c.name) &&
                                     std::all_of(c.args.begin(), c.args.end(),
                                                 [](const Expr &a) { return is_value(a); });
                          },
                          [](const auto &) { return false; },
                      },
                      e->v);
}

namespace {

void collect_resources(const Expr &e, std::vector<Endpoint> &out, ResourceMemo *memo) {
    std::visit(overloaded{
                   [&](const ex::Res &r) { out.push_back(r.ep); },
                   [&](const ex::ConstApp &c) {
                       for (const auto &a : c.args) collect_resources(a, out, memo);
                   },
                   [&](const ex::Pair &p) {
                       collect_resources(p.first, out, memo);
                       collect_resources(p.second, out, memo);
                   },
                   [&](const ex::Fst &f) { collect_resources(f.pair, out, memo); },
                   [&](const ex::Snd &s) { collect_resources(s.pair, out, memo); },
                   [&](const ex::LetPair &l) {
                       collect_resources(l.bound, out, memo);
                       collect_resources(l.body, out, memo);
                   },
                   [&](const ex::If &i) {
                       collect_resources(i.cond, out, memo);
                       collect_resources(i.then_branch, out, memo);
                   },
                   [&](const ex::Lam &l) {
                       if (memo)
                           memo->append(e, l.body, out);
                       else
                           collect_resources(l.body, out, memo);
                   },
                   [&](const ex::App &a) {
                       collect_resources(a.fn, out, memo);
                       collect_resources(a.arg, out, memo);
                   },
                   [&](const ex::Fix &f) {
                       if (memo)
                           memo->append(e, f.body, out);
                       else
                           collect_resources(f.body, out, memo);
                   },
                   [&](const ex::Offer &o) {
                       collect_resources(o.chan, out, memo);
                       if (!o.arms.empty()) collect_resources(o.arms.front().body, out, memo);
                   },
                   [&](const ex::Select &s) { collect_resources(s.chan, out, memo); },
                   [](const auto &) {},
               },
               e->v);
}

void collect_free(const Expr &e, std::set<std::string> &bound, std::set<std::string> &bound_fix, FreeVars &out) {
    auto under = [&](const std::vector<std::string> &names, const Expr &body) {
        std::vector<std::string> added;
        for (const auto &n : names)
            if (bound.insert(n).second) added.push_back(n);
        collect_free(body, bound, bound_fix, out);
        for (const auto &n : added) bound.erase(n);
    };
    std::visit(overloaded{
                   [&](const ex::Var &v) {
                       if (!bound.contains(v.name)) out.vars.insert(v.name);
                   },
                   [&](const ex::FixVar &v) {
                       if (!bound_fix.contains(v.name)) out.fix_vars.insert(v.name);
                   },
                   [&](const ex::ConstApp &c) {
                       for (const auto &a : c.args) collect_free(a, bound, bound_fix, out);
                   },
                   [&](const ex::Pair &p) {
                       collect_free(p.first, bound, bound_fix, out);
                       collect_free(p.second, bound, bound_fix, out);
                   },
                   [&](const ex::Fst &f) { collect_free(f.pair, bound, bound_fix, out); },
                   [&](const ex::Snd &s) { collect_free(s.pair, bound, bound_fix, out); },
                   [&](const ex::LetPair &l) {
                       collect_free(l.bound, bound, bound_fix, out);
                       under({l.first, l.second}, l.body);
                   },
                   [&](const ex::If &i) {
                       collect_free(i.cond, bound, bound_fix, out);
                       collect_free(i.then_branch, bound, bound_fix, out);
                       collect_free(i.else_branch, bound, bound_fix, out);
                   },
                   [&](const ex::Lam &l) { under({l.param}, l.body); },
                   [&](const ex::App &a) {
                       collect_free(a.fn, bound, bound_fix, out);
                       collect_free(a.arg, bound, bound_fix, out);
                   },
                   [&](const ex::Fix &f) {
                       bool added = bound_fix.insert(f.name).second;
                       collect_free(f.body, bound, bound_fix, out);
                       if (added) bound_fix.erase(f.name);
                   },
                   [&](const ex::Offer &o) {
                       collect_free(o.chan, bound, bound_fix, out);
                       for (const auto &arm : o.arms) under({arm.var}, arm.body);
                   },
                   [&](const ex::Select &s) { collect_free(s.chan, bound, bound_fix, out); },
                   [](const auto &) {},
               },
               e->v);
}

class Substituter {
public:
    explicit Substituter(const Substitution &theta) {
        for (const auto &[_, r] : theta.vars) add_range(r);
        for (const auto &[_, r] : theta.fix_vars) add_range(r);
    }

    Expr run(const Expr &e, const Substitution &theta) {
        if (theta.empty()) return e;
        return std::visit([&](const auto &node) { return go(e, node, theta); }, e->v);
    }

private:
    std::set<std::string> range_vars_;
    std::set<std::string> range_fix_vars_;
    int fresh_ = 0;

    void add_range(const Expr &r) {
        FreeVars fv = free_vars(r);
        range_vars_.insert(fv.vars.begin(), fv.vars.end());
        range_fix_vars_.insert(fv.fix_vars.begin(), fv.fix_vars.end());
    }

    std::string fresh(const std::string &base) {
        std::string name;
        do {
            name = base + "%" + std::to_string(++fresh_);
        } while (range_vars_.contains(name));
        return name;
    }

    // Drops the binder from theta, renaming it when a substituted term mentions the same name.
    std::string bind(const std::string &name, Substitution &theta) {
        theta.vars.erase(name);
        if (!range_vars_.contains(name) || theta.empty()) return name;
        std::string renamed = fresh(name);
        theta.vars[name] = make_expr(ex::Var{renamed});
        return renamed;
    }

    Expr go(const Expr &e, const ex::Var &v, const Substitution &theta) {
        auto it = theta.vars.find(v.name);
        return it == theta.vars.end() ? e : it->second;
    }
    Expr go(const Expr &e, const ex::FixVar &v, const Substitution &theta) {
        auto it = theta.fix_vars.find(v.name);
        return it == theta.fix_vars.end() ? e : it->second;
    }
    Expr go(const Expr &e, const ex::Res &, const Substitution &) { return e; }
    Expr go(const Expr &e, const ex::Int &, const Substitution &) { return e; }
    Expr go(const Expr &e, const ex::Bool &, const Substitution &) { return e; }
    Expr go(const Expr &e, const ex::Unit &, const Substitution &) { return e; }
    Expr go(const Expr &e, const ex::ConstApp &c, const Substitution &theta) {
        std::vector<Expr> args;
        bool changed = false;
        for (const auto &a : c.args) {
            args.push_back(run(a, theta));
            changed = changed || args.back() != a;
        }
        return changed ? make_expr(ex::ConstApp{c.name, std::move(args)}, e->loc) : e;
    }
    Expr go(const Expr &e, const ex::Pair &p, const Substitution &theta) {
        Expr a = run(p.first, theta), b = run(p.second, theta);
        return a == p.first && b == p.second ? e : make_expr(ex::Pair{a, b}, e->loc);
    }
    Expr go(const Expr &e, const ex::Fst &f, const Substitution &theta) {
        Expr a = run(f.pair, theta);
        return a == f.pair ? e : make_expr(ex::Fst{a}, e->loc);
    }
    Expr go(const Expr &e, const ex::Snd &s, const Substitution &theta) {
        Expr a = run(s.pair, theta);
        return a == s.pair ? e : make_expr(ex::Snd{a}, e->loc);
    }
    Expr go(const Expr &e, const ex::LetPair &l, const Substitution &theta) {
        Expr bound = run(l.bound, theta);
        Substitution inner = theta;
        std::string x1 = bind(l.first, inner);
        std::string x2 = bind(l.second, inner);
        Expr body = run(l.body, inner);
        if (bound == l.bound && body == l.body && x1 == l.first && x2 == l.second) return e;
        return make_expr(ex::LetPair{x1, x2, bound, body}, e->loc);
    }
    Expr go(const Expr &e, const ex::If &i, const Substitution &theta) {
        Expr c = run(i.cond, theta), t = run(i.then_branch, theta), f = run(i.else_branch, theta);
        if (c == i.cond && t == i.then_branch && f == i.else_branch) return e;
        return make_expr(ex::If{c, t, f}, e->loc);
    }
    Expr go(const Expr &e, const ex::Lam &l, const Substitution &theta) {
        Substitution inner = theta;
        std::string x = bind(l.param, inner);
        Expr body = run(l.body, inner);
        if (body == l.body && x == l.param) return e;
        return make_expr(ex::Lam{x, l.param_type, l.lin, body}, e->loc);
    }
    Expr go(const Expr &e, const ex::App &a, const Substitution &theta) {
        Expr f = run(a.fn, theta), x = run(a.arg, theta);
        return f == a.fn && x == a.arg ? e : make_expr(ex::App{f, x}, e->loc);
    }
    Expr go(const Expr &e, const ex::Fix &f, const Substitution &theta) {
        Substitution inner = theta;
        inner.fix_vars.erase(f.name);
        std::string name = f.name;
        if (range_fix_vars_.contains(name) && !inner.empty()) {
            name = fresh(name);
            inner.fix_vars[f.name] = make_expr(ex::FixVar{name});
        }
        Expr body = run(f.body, inner);
        if (body == f.body && name == f.name) return e;
        return make_expr(ex::Fix{name, f.type, body}, e->loc);
    }
    Expr go(const Expr &e, const ex::Offer &o, const Substitution &theta) {
        Expr chan = run(o.chan, theta);
        bool changed = chan != o.chan;
        std::vector<ex::OfferArm> arms;
        for (const auto &arm : o.arms) {
            Substitution inner = theta;
            std::string x = bind(arm.var, inner);
            Expr body = run(arm.body, inner);
            changed = changed || body != arm.body || x != arm.var;
            arms.push_back({arm.tag, x, body});
        }
        return changed ? make_expr(ex::Offer{chan, std::move(arms)}, e->loc) : e;
    }
    Expr go(const Expr &e, const ex::Select &s, const Substitution &theta) {
        Expr chan = run(s.chan, theta);
        return chan == s.chan ? e : make_expr(ex::Select{s.tag, chan}, e->loc);
    }
};

}  // namespace

void ResourceMemo::append(const Expr &node, const Expr &body, std::vector<Endpoint> &out) {
    auto it = memo_.find(node.get());
    if (it == memo_.end()) {
        if (memo_.size() > 100'000) memo_.clear();
        std::vector<Endpoint> inner;
        collect_resources(body, inner, this);
        it = memo_.emplace(node.get(), std::make_pair(node, std::move(inner))).first;
    }
    out.insert(out.end(), it->second.second.begin(), it->second.second.end());
}

std::vector<Endpoint> ResourceMemo::resources_of(const Expr &e) {
    std::vector<Endpoint> out;
    collect_resources(e, out, this);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Endpoint> resources_of(const Expr &e) {
    std::vector<Endpoint> out;
    collect_resources(e, out, nullptr);
    std::sort(out.begin(), out.end());
    return out;
}

FreeVars free_vars(const Expr &e) {
    FreeVars out;
    std::set<std::string> bound, bound_fix;
    collect_free(e, bound, bound_fix, out);
    return out;
}

Expr subst(const Expr &e, const Substitution &theta) {
    if (theta.empty()) return e;
    Substituter s(theta);
    return s.run(e, theta);
}

Type function_param_type(const FunDef &f) {
    if (f.params.empty()) return t_unit();
    Type t = f.params.back().type;
    for (auto it = f.params.rbegin() + 1; it != f.params.rend(); ++it) t = t_prod(it->type, t);
    return t;
}

Type function_type(const FunDef &f) {
    return t_arrow(Linearity::Intuitionistic, function_param_type(f), f.result);
}

Expr function_lambda(const FunDef &f) {
    Type param_type = function_param_type(f);
    if (f.params.empty())
        return make_expr(ex::Lam{kArgName, param_type, Linearity::Intuitionistic, f.body}, f.loc);
    if (f.params.size() == 1)
        return make_expr(ex::Lam{f.params[0].name, param_type, Linearity::Intuitionistic, f.body}, f.loc);
    // let (x1, _arg1) = _arg in let (x2, _arg2) = _arg1 in ... let (xn-1, xn) = _argn-2 in body
    std::size_t n = f.params.size();
    auto rest = [](std::size_t k) { return k == 0 ? std::string(kArgName) : kArgName + std::to_string(k); };
    Expr body = f.body;
    for (std::size_t k = n - 1; k-- > 0;) {
        std::string second = k + 2 == n ? f.params[n - 1].name : rest(k + 1);
        body = make_expr(ex::LetPair{f.params[k].name, second, make_expr(ex::Var{rest(k)}, f.loc), body}, f.loc);
    }
    return make_expr(ex::Lam{kArgName, param_type, Linearity::Intuitionistic, body}, f.loc);
}

Elaborated elaborate(const Program &p) {
    Elaborated out;
    Substitution earlier;
    for (const auto &f : p.functions) {
        Expr fix = make_expr(ex::Fix{f.name, function_type(f), function_lambda(f)}, f.loc);
        fix = subst(fix, earlier);
        out.functions[f.name] = fix;
        earlier.fix_vars[f.name] = fix;
    }
    if (p.main) out.main = subst(p.main, earlier);
    return out;
}

}  // namespace mtlc
