#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlc/ast.hpp"

namespace mtlc::stdlib {

// Connectives of linear logic read as sessions, seen from the client (negative) end.
Session times(const Session &a, const Session &b);     // snd(chneg(a)) :: b
Session limplies(const Session &a, const Session &b);  // rcv(chneg(a)) :: b
Session adisj(const Session &a, const Session &b);     // sndtag{ l => a | r => b }
Session aconj(const Session &a, const Session &b);     // rcvtag{ l => a | r => b }

// Sources shipped under corpus/, embedded at build time.
// Names are file stems; reject cases are named "reject/<stem>".
std::optional<std::string> corpus_source(std::string_view name);

// Programs that must typecheck and run to a final value.
const std::vector<std::string> &corpus_programs();

// Deadlocks once chneg_create2 is allowed.
inline constexpr const char *kCounterexample = "create2_deadlock";

struct RejectCase {
    std::string name;
    std::string source;
    std::string code;
};
std::vector<RejectCase> reject_suite();

// The sieve program with a main that pulls the first n primes and returns them as a right-nested tuple.
std::string sieve_source(int n);

// (v1, (v2, ... ())) as a list.
std::optional<std::vector<std::int64_t>> int_list(const Expr &v);

struct QueueOp {
    bool enq;
    std::int64_t value;  // enq only
    bool operator==(const QueueOp &) const = default;
};
std::vector<QueueOp> random_queue_script(std::size_t n, std::uint64_t seed);

// The queue program with a main replaying `ops`; the result lists each dequeued value, -1 for an empty queue.
std::string queue_source(const std::vector<QueueOp> &ops);

}  // namespace mtlc::stdlib
