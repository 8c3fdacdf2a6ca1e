#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtlc/ast.hpp"

namespace mtlc {

// The value grammar: lam-variables, resources, literals and saturated
// constructor applications, unit, pairs of values, lambdas. Fix-variables are not values.
bool is_value(const Expr &e);

// Constant functions that act as constructors (their saturated applications are values).
bool is_constructor(const std::string &const_name);

// Multiset of channel endpoints, sorted. `if` and `offer` count only the first branch.
std::vector<Endpoint> resources_of(const Expr &e);

// resources_of with results kept for lambda and fix nodes, which are shared between
// many terms during evaluation. Keeps the nodes it has seen alive.
class ResourceMemo {
public:
    std::vector<Endpoint> resources_of(const Expr &e);
    void append(const Expr &node, const Expr &body, std::vector<Endpoint> &out);

private:
    std::unordered_map<const ExprNode *, std::pair<Expr, std::vector<Endpoint>>> memo_;
};

struct FreeVars {
    std::set<std::string> vars;
    std::set<std::string> fix_vars;
};
FreeVars free_vars(const Expr &e);

// Simultaneous capture-avoiding substitution. `vars` replaces lam-variables,
// `fix_vars` replaces fix-variables.
struct Substitution {
    std::map<std::string, Expr> vars;
    std::map<std::string, Expr> fix_vars;
    bool empty() const { return vars.empty() && fix_vars.empty(); }
};
Expr subst(const Expr &e, const Substitution &theta);

// Names chosen for the parameter plumbing introduced by elaboration.
inline constexpr const char *kArgName = "_arg";

// The parameter type and lambda of a function definition:
// `fun f(x: A, y: B): C = e` becomes `fix f: (A * B) -> C => lam (_arg: A * B) => let (x, y) = _arg in e`.
Type function_param_type(const FunDef &f);
Type function_type(const FunDef &f);
Expr function_lambda(const FunDef &f);

// Closed fix-expressions for every function (earlier functions substituted in),
// and the closed main expression.
struct Elaborated {
    std::map<std::string, Expr> functions;
    Expr main;
};
Elaborated elaborate(const Program &p);

}  // namespace mtlc
