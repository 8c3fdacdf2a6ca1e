#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mtlc/ast.hpp"
#include "mtlc/error.hpp"
#include "mtlc/session.hpp"

namespace mtlc {

// Parameter schemas and result of a constant; may mention 'a (nonlinear), ^a (linear) and %s (session) variables.
struct CType {
    std::vector<Type> params;
    Type result;
};

class Signature {
public:
    // chneg_create2 is only present when allow_create2 is set.
    static Signature builtin(bool allow_create2 = false);

    const CType *find(const std::string &name) const;
    bool allow_create2() const { return allow_create2_; }

private:
    std::map<std::string, CType> ctypes_;
    bool allow_create2_ = false;
};

struct TypeSubst {
    std::map<std::string, Type> vars;
    std::map<std::string, Type> linvars;
    std::map<std::string, Session> sessions;
};

Type apply_subst(const TypeSubst &theta, const Type &t);
Session apply_subst(const TypeSubst &theta, const Session &s);

struct Instance {
    TypeSubst theta;
    Type result;
};

// One-way matching of schemas against argument types. Throws E206 (no instance) or E210
// (a nonlinear variable would be bound to a linear type).
Instance instantiate(const std::string &name, const CType &ctype, const std::vector<Type> &args,
                     const SessionEnv &env, SourceLoc loc = {});

struct Binding {
    std::string name;
    Type type;
};

// Gamma holds nonlinear bindings, delta linear ones.
struct TypingCtx {
    std::vector<Binding> gamma;
    std::vector<Binding> delta;
};

struct CheckEnv {
    SessionEnv sessions;
    Signature signature = Signature::builtin();
    std::map<std::string, Type> functions;  // fix-variables in scope
    std::map<Endpoint, Type> resources;     // types of live channel endpoints
    // Types of closed fix-expressions already checked under this environment.
    std::shared_ptr<std::map<const ExprNode *, std::pair<Expr, Type>>> fix_cache =
        std::make_shared<std::map<const ExprNode *, std::pair<Expr, Type>>>();
};

struct CheckResult {
    Type type;
    std::vector<std::string> leftover;  // linear bindings of the input not consumed
};

// Leftover-threading check: linear bindings of ctx.delta may stay unconsumed and are reported back.
// Throws Error on the first violation.
CheckResult check_expr(const TypingCtx &ctx, const Expr &e, const CheckEnv &env);

// Closed expression in the empty context. Returns the type and the endpoints it consumes.
struct ClosedCheck {
    Type type;
    std::vector<Endpoint> consumed;
};
ClosedCheck check_closed(const Expr &e, const CheckEnv &env);

// All findings of a program, one per failing definition.
std::vector<Diagnostic> check_program(const Program &p, const Signature &sig);

// Type of main when the program is well-typed.
Type main_type(const Program &p, const Signature &sig);

struct ChannelTyping {
    ChannelId id;
    Session pos_state;
    Session neg_state;
    bool pos_live = true;
    bool neg_live = true;
};

// Re-checks pools step after step, reusing results for threads whose expression and channel
// states did not change.
class PoolChecker {
public:
    PoolChecker(SessionEnv sessions, Signature sig);
    Type check(const std::map<std::uint64_t, Expr> &threads, const std::vector<ChannelTyping> &channels);

private:
    struct Cached {
        Expr expr;
        ClosedCheck result;
        std::vector<std::pair<Endpoint, Session>> states;
    };
    CheckEnv env_;
    std::map<std::uint64_t, Cached> cache_;
};

// Types thread 0 at any type and every other thread at unit, with endpoints typed from the
// channel states. Each live endpoint must occur in exactly one thread; the positive and negative
// states of every channel must match. Throws Error (E300 for pool-level failures).
Type check_pool(const std::map<std::uint64_t, Expr> &threads, const std::vector<ChannelTyping> &channels,
                const SessionEnv &sessions, const Signature &sig);

// A closed nonlinear value holds no channels.
bool check_value_purity(const Expr &v, const Type &t);

// Head constructor of a closed value agrees with its type (recursively through pairs).
bool canonical_form_ok(const Expr &v, const Type &t, const SessionEnv &env);

}  // namespace mtlc
