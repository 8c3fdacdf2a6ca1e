#pragma once

#include <iosfwd>

namespace mtlc {

// Exit status: check 0/1, run 0/2/3/4 by outcome, df-check 0/1, 5 for unreadable or malformed input.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace mtlc
