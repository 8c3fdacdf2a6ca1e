#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mtlc/ast.hpp"

namespace mtlc {

struct Diagnostic {
    std::string level = "error";
    SourceLoc loc;
    std::string code;
    std::string message;
};

// `LEVEL file:line:col CODE message`
std::string format_diagnostic(const Diagnostic &d, const std::string &file);

class Error : public std::runtime_error {
public:
    Error(std::string code, SourceLoc loc, const std::string &message)
        : std::runtime_error(message), diag_{"error", loc, std::move(code), message} {}

    const Diagnostic &diagnostic() const { return diag_; }
    const std::string &code() const { return diag_.code; }

private:
    Diagnostic diag_;
};

}  // namespace mtlc
