#pragma once

#include <set>
#include <string>
#include <string_view>

#include "mtlc/ast.hpp"

namespace mtlc {

// Built-in constant names (channel primitives, services, arithmetic and logic).
const std::set<std::string> &constant_names();

// Throws Error with code E100 (syntax), E101 (unknown session name) or E212 (missing annotation).
Program parse_program(std::string_view text);

// Single expression; `functions` are resolved as fix-variables, `sessions` may be named in annotations.
Expr parse_expr(std::string_view text, const std::set<std::string> &functions = {},
                const std::set<std::string> &sessions = {});
Type parse_type(std::string_view text, const std::set<std::string> &sessions = {});
Session parse_session(std::string_view text, const std::set<std::string> &sessions = {});

std::string print_session(const Session &s);
std::string print_type(const Type &t);
std::string print_expr(const Expr &e);
std::string print_program(const Program &p);

}  // namespace mtlc
