#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mtlc/ast.hpp"
#include "mtlc/ast_ops.hpp"
#include "mtlc/dfcheck.hpp"
#include "mtlc/pool.hpp"
#include "mtlc/session.hpp"
#include "mtlc/typecheck.hpp"

namespace mtlc {

// ------------------------------
// evaluation contexts
// ------------------------------

struct Frame {
    Expr parent;
    std::size_t slot;  // which child of parent holds the hole
};

// Frames from the root down to the hole.
struct EvalContext {
    std::vector<Frame> frames;
    Expr plug(const Expr &hole) const;
};

enum class RedexKind : std::uint8_t {
    Pure,     // beta, fst, snd, let-pair, if, fix
    AdHoc,    // arithmetic, comparisons, logic, randbit
    Spawn,    // thread_create, chneg_create, chneg_create2, service_request
    Partial,  // channel operations waiting for a partner, chposneg_link, offer, select
};

struct Decomposition {
    enum class Kind : std::uint8_t { Value, Redex, Stuck } kind = Kind::Stuck;
    RedexKind redex_kind = RedexKind::Pure;
    EvalContext ctx;
    Expr redex;

    bool blocked() const { return kind == Kind::Redex && redex_kind == RedexKind::Partial; }
};

Decomposition decompose(const Expr &e);

// Throws std::logic_error when `redex` is not a pure redex.
Expr reduce_pure(const Expr &redex);

using Rng = std::mt19937_64;

// Throws std::logic_error on an undefined application. Division and remainder by zero give 0.
Expr reduce_adhoc(const std::string &name, const std::vector<Expr> &args, Rng &rng);

// ------------------------------
// pool steps
// ------------------------------

struct Step {
    Rule rule;
    std::vector<Tid> tids;            // thread with the redex first; for channel rules: negative end, linkers, positive end
    std::vector<ChannelId> channels;  // for channel rules: the chain from the negative end to the positive end
};

std::string to_string(const Step &s);

// Per-thread decompositions keyed by the thread's current expression.
struct DecomposeCache {
    std::map<Tid, std::pair<Expr, Decomposition>> entries;
    const Decomposition &get(Tid tid, const Expr &e);
};

std::vector<Step> enabled_steps(const Pool &pool, const ChannelStore &store, DecomposeCache *cache = nullptr);

// Throws std::logic_error if the step is not applicable.
TraceEvent apply_step(Pool &pool, ChannelStore &store, const Step &step, Rng &rng, const SessionEnv &sessions,
                      DecomposeCache *cache = nullptr);

std::vector<ChannelTyping> channel_typings(const ChannelStore &store);

// ------------------------------
// scheduling
// ------------------------------

enum class Policy : std::uint8_t { Random, RoundRobin, Adversarial };

struct Monitors {
    bool types = false;      // re-typecheck the pool after every step
    bool df = false;         // channel sets stay regular, reducible and change per the rule
    bool canonical = false;  // values agree with their types
    bool any() const { return types || df || canonical; }
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t step_limit = 1'000'000;
    Policy policy = Policy::Random;
    Monitors monitors;
    bool allow_create2 = false;
    // Record monitor findings and keep going instead of stopping at the first one.
    bool observe_only = false;
    std::function<void(const TraceEvent &)> on_event;
};

enum class OutcomeKind : std::uint8_t { Final, Deadlock, StepLimit, MonitorViolation };

std::string to_string(OutcomeKind k);
int exit_code(OutcomeKind k);

struct MonitorFinding {
    std::size_t step;
    std::string monitor;  // "types", "df" or "canonical"
    std::string detail;
};

struct Outcome {
    OutcomeKind kind = OutcomeKind::StepLimit;
    Expr value;                 // main thread's value when final
    bool residual = false;      // main finished holding channels while other threads wait
    std::size_t steps = 0;
    std::vector<std::string> witness;  // deadlock: blocked operations and wait edges
    std::vector<MonitorFinding> findings;
    std::string detail;
};

class Machine {
public:
    Machine(const Program &program, const RunConfig &cfg);

    const Pool &pool() const { return pool_; }
    const ChannelStore &store() const { return store_; }
    std::vector<Step> enabled();
    TraceEvent apply(const Step &step);
    Outcome run();

private:
    RunConfig cfg_;
    SessionEnv sessions_;
    Signature signature_;
    Pool pool_;
    ChannelStore store_;
    Rng rng_;
    DecomposeCache cache_;
    PoolChecker checker_;
    Type main_type_;
    std::size_t steps_ = 0;
    Tid rr_cursor_ = 0;

    std::size_t choose(const std::vector<Step> &steps);
    std::optional<MonitorFinding> check_monitors(const std::map<Tid, ChannelSet> &prev, const TraceEvent &ev);
    std::vector<std::string> deadlock_witness();
    std::string rch_summary();
    // Channel sets per thread, rescanning only threads whose expression changed.
    const std::map<Tid, ChannelSet> &current_rch();
    std::map<Tid, std::pair<Expr, ChannelSet>> rch_cache_;
    ResourceMemo resource_memo_;
    std::map<Tid, ChannelSet> rch_;
};

Outcome run_program(const Program &program, const RunConfig &cfg);

}  // namespace mtlc
