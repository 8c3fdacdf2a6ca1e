#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "mtlc/ast.hpp"

namespace mtlc {

// Session definitions by name. Bodies may refer to any definition, including themselves.
class SessionEnv {
public:
    SessionEnv() = default;
    explicit SessionEnv(const std::vector<SessionDef> &defs);

    void define(const std::string &name, Session body);
    bool contains(const std::string &name) const { return defs_.contains(name); }
    const Session &body(const std::string &name) const;
    std::size_t size() const { return defs_.size(); }

    // Throws E101 for dangling names and for definitions that never reach a constructor.
    void validate() const;

private:
    std::map<std::string, Session> defs_;
};

Session dual(const Session &s);

// One-step replacement of a (possibly dualized) name by its body.
Session unfold(const Session &s, const SessionEnv &env);

// Unfolds names until a constructor is exposed.
Session unfold_head(const Session &s, const SessionEnv &env);

// Equality up to unfolding of names (coinductive).
bool session_equal(const Session &a, const Session &b, const SessionEnv &env);
bool type_equal(const Type &a, const Type &b, const SessionEnv &env);

// chpos(pos) matches chneg(neg) iff both name the same protocol.
bool matches(const Session &pos, const Session &neg, const SessionEnv &env);

}  // namespace mtlc
