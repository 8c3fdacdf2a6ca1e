#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace mtlc {

struct SourceLoc {
    int line = 0;
    int column = 0;
};

enum class Polarity : std::uint8_t { Pos, Neg };
enum class Linearity : std::uint8_t { Intuitionistic, Linear };
enum class BaseType : std::uint8_t { Int, Bool };

// Who sends the tag, seen from the positive endpoint.
enum class ChoiceDir : std::uint8_t { SndTag, RcvTag };

inline Polarity flip(Polarity p) { return p == Polarity::Pos ? Polarity::Neg : Polarity::Pos; }
inline ChoiceDir flip(ChoiceDir d) {
    return d == ChoiceDir::SndTag ? ChoiceDir::RcvTag : ChoiceDir::SndTag;
}

using ChannelId = std::uint32_t;

// ch_i is (i, Pos); ~ch_i is (i, Neg). Both ends share the id.
struct Endpoint {
    ChannelId id = 0;
    Polarity pol = Polarity::Pos;

    Endpoint dual() const { return {id, flip(pol)}; }
    auto operator<=>(const Endpoint &) const = default;
};

std::string to_string(Endpoint ep);

// ------------------------------
// session types and viewtypes
// ------------------------------

struct SessionNode;
struct TypeNode;
using Session = std::shared_ptr<const SessionNode>;
using Type = std::shared_ptr<const TypeNode>;

namespace sess {
struct Nil {};
struct NilBar {};
struct Snd {
    Type payload;
    Session next;
};
struct Rcv {
    Type payload;
    Session next;
};
// Reference to a session definition; `dual` marks a deferred dual(name).
struct Named {
    std::string name;
    bool dual = false;
};
struct Branch {
    std::string tag;
    Session next;
};
// Tag-indexed branching; the tag number of a branch is its position.
struct Choice {
    ChoiceDir dir;
    std::vector<Branch> branches;
};
// Session variable, only present in c-type schemas.
struct Var {
    std::string name;
};
}  // namespace sess

struct SessionNode {
    std::variant<sess::Nil, sess::NilBar, sess::Snd, sess::Rcv, sess::Named, sess::Choice, sess::Var> v;
};

namespace ty {
struct Var {
    std::string name;
};
struct LinVar {
    std::string name;
};
struct Base {
    BaseType kind;
};
struct Unit {};
struct Prod {
    Linearity lin;
    Type first;
    Type second;
};
struct Arrow {
    Linearity lin;
    Type param;
    Type result;
};
struct Chan {
    Polarity pol;
    Session session;
};
struct Service {
    Session session;
};
}  // namespace ty

struct TypeNode {
    std::variant<ty::Var, ty::LinVar, ty::Base, ty::Unit, ty::Prod, ty::Arrow, ty::Chan, ty::Service> v;
};

Session s_nil();
Session s_nilbar();
Session s_snd(Type payload, Session next);
Session s_rcv(Type payload, Session next);
Session s_named(std::string name, bool dual = false);
Session s_choice(ChoiceDir dir, std::vector<sess::Branch> branches);
Session s_var(std::string name);

Type t_var(std::string name);
Type t_linvar(std::string name);
Type t_int();
Type t_bool();
Type t_unit();
// Products are canonical: `*` when both sides are nonlinear, tensor otherwise.
Type t_prod(Type first, Type second);
Type t_arrow(Linearity lin, Type param, Type result);
Type t_chan(Polarity pol, Session s);
Type t_chpos(Session s);
Type t_chneg(Session s);
Type t_service(Session s);

// True viewtypes must be consumed exactly once. Linear type variables count as linear.
bool is_linear(const Type &t);

bool same_session(const Session &a, const Session &b);
bool same_type(const Type &a, const Type &b);

// ------------------------------
// expressions
// ------------------------------

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

namespace ex {
struct Var {
    std::string name;
};
struct FixVar {
    std::string name;
};
struct Res {
    Endpoint ep;
};
struct Int {
    std::int64_t value;
};
struct Bool {
    bool value;
};
struct Unit {};
struct ConstApp {
    std::string name;
    std::vector<Expr> args;
};
struct Pair {
    Expr first;
    Expr second;
};
struct Fst {
    Expr pair;
};
struct Snd {
    Expr pair;
};
struct LetPair {
    std::string first;
    std::string second;
    Expr bound;
    Expr body;
};
struct If {
    Expr cond;
    Expr then_branch;
    Expr else_branch;
};
// param_type is null only for the lambda produced by `let x = e1 in e2`.
struct Lam {
    std::string param;
    Type param_type;
    Linearity lin;
    Expr body;
};
struct App {
    Expr fn;
    Expr arg;
};
struct Fix {
    std::string name;
    Type type;
    Expr body;
};
struct OfferArm {
    std::string tag;
    std::string var;
    Expr body;
};
struct Offer {
    Expr chan;
    std::vector<OfferArm> arms;
};
struct Select {
    std::string tag;
    Expr chan;
};
}  // namespace ex

struct ExprNode {
    std::variant<ex::Var, ex::FixVar, ex::Res, ex::Int, ex::Bool, ex::Unit, ex::ConstApp, ex::Pair, ex::Fst,
                 ex::Snd, ex::LetPair, ex::If, ex::Lam, ex::App, ex::Fix, ex::Offer, ex::Select>
        v;
    SourceLoc loc;
};

template <typename Node>
Expr make_expr(Node node, SourceLoc loc = {}) {
    return std::make_shared<const ExprNode>(ExprNode{std::move(node), loc});
}

template <typename Node>
const Node *as(const Expr &e) {
    return std::get_if<Node>(&e->v);
}

// Structural equality; source locations are ignored.
bool same_expr(const Expr &a, const Expr &b);

// ------------------------------
// programs
// ------------------------------

struct SessionDef {
    std::string name;
    Session body;
    SourceLoc loc;
};

struct Param {
    std::string name;
    Type type;
};

// `fun name(params) : result = body`, elaborated to a fix over an intuitionistic lambda.
struct FunDef {
    std::string name;
    std::vector<Param> params;
    Type result;  // null only for main
    Expr body;
    SourceLoc loc;
};

struct Program {
    std::vector<SessionDef> sessions;
    std::vector<FunDef> functions;  // excludes main
    Expr main;                      // null for a library without main
    SourceLoc main_loc;
};

bool same_program(const Program &a, const Program &b);

}  // namespace mtlc
