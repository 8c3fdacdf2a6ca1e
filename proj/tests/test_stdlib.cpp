#include <doctest.h>

#include <deque>

#include "mtlc/runtime.hpp"
#include "mtlc/session.hpp"
#include "mtlc/stdlib.hpp"
#include "mtlc/syntax.hpp"
#include "mtlc/typecheck.hpp"

using namespace mtlc;

namespace {

std::vector<std::int64_t> trial_division_primes(std::size_t n) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 2; out.size() < n; ++k) {
        bool prime = true;
        for (std::int64_t d = 2; d * d <= k; ++d)
            if (k % d == 0) prime = false;
        if (prime) out.push_back(k);
    }
    return out;
}

std::vector<std::int64_t> fifo(const std::vector<stdlib::QueueOp> &ops) {
    std::deque<std::int64_t> q;
    std::vector<std::int64_t> out;
    for (const auto &op : ops) {
        if (op.enq) {
            q.push_back(op.value);
        } else if (q.empty()) {
            out.push_back(-1);
        } else {
            out.push_back(q.front());
            q.pop_front();
        }
    }
    return out;
}

Outcome run_src(const std::string &src, std::uint64_t seed = 0, bool monitors = true) {
    RunConfig cfg;
    cfg.seed = seed;
    if (monitors) cfg.monitors = {true, true, true};
    return run_program(parse_program(src), cfg);
}

std::int64_t factorial(std::int64_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("sieve against trial division") {
    for (int n : {1, 2, 10}) {
        CAPTURE(n);
        auto o = run_src(stdlib::sieve_source(n));
        REQUIRE(o.kind == OutcomeKind::Final);
        CHECK(o.findings.empty());
        auto got = stdlib::int_list(o.value);
        REQUIRE(got);
        CHECK(*got == trial_division_primes(static_cast<std::size_t>(n)));
    }
}

TEST_CASE("queue against a FIFO") {
    using Op = stdlib::QueueOp;
    std::vector<std::vector<Op>> scripts{
        {{true, 1}, {true, 2}, {true, 3}, {false, 0}, {false, 0}, {false, 0}},
        {{false, 0}},
        {{true, 5}, {false, 0}, {false, 0}, {true, 6}, {false, 0}},
        {},
    };
    for (std::uint64_t seed = 0; seed < 3; ++seed) scripts.push_back(stdlib::random_queue_script(40, seed));
    for (const auto &ops : scripts) {
        auto o = run_src(stdlib::queue_source(ops));
        REQUIRE(o.kind == OutcomeKind::Final);
        CHECK(o.findings.empty());
        auto got = stdlib::int_list(o.value);
        REQUIRE(got);
        CHECK(*got == fifo(ops));
    }
}

TEST_CASE("random queue script with 200 ops") {
    auto ops = stdlib::random_queue_script(200, 99);
    CHECK(ops.size() == 200);
    CHECK(ops == stdlib::random_queue_script(200, 99));
    auto o = run_src(stdlib::queue_source(ops), 3, false);
    REQUIRE(o.kind == OutcomeKind::Final);
    CHECK(*stdlib::int_list(o.value) == fifo(ops));
}

TEST_CASE("int_list") {
    CHECK(stdlib::int_list(parse_expr("(1, (2, ()))")) == std::vector<std::int64_t>{1, 2});
    CHECK(stdlib::int_list(parse_expr("()")) == std::vector<std::int64_t>{});
    CHECK(!stdlib::int_list(parse_expr("(true, ())")));
}

TEST_CASE("corpus programs typecheck and reach the expected values") {
    std::map<std::string, std::string> expected{
        {"toy_arith", "(" + std::to_string(factorial(10)) + ", (7, true))"},
        {"times", "7"},
        {"limplies", "42"},
        {"bang", std::to_string(55)},
        {"service_echo", "(1, 2)"},
        {"link_demo", "101"},
        {"queue", "(1, (2, (3, (-1, ()))))"},
    };
    for (const auto &name : stdlib::corpus_programs()) {
        CAPTURE(name);
        auto src = *stdlib::corpus_source(name);
        CHECK(check_program(parse_program(src), Signature::builtin()).empty());
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto o = run_src(src, seed);
            REQUIRE(o.kind == OutcomeKind::Final);
            CHECK(o.findings.empty());
            if (auto it = expected.find(name); it != expected.end()) CHECK(print_expr(o.value) == it->second);
        }
    }
}

TEST_CASE("each service request opens a fresh channel") {
    std::vector<ChannelId> created;
    RunConfig cfg;
    cfg.on_event = [&](const TraceEvent &ev) {
        if (ev.rule == Rule::PR3) created.insert(created.end(), ev.channels.begin(), ev.channels.end());
    };
    auto o = run_program(parse_program(*stdlib::corpus_source("service_echo")), cfg);
    REQUIRE(o.kind == OutcomeKind::Final);
    REQUIRE(created.size() == 2);
    CHECK(created[0] != created[1]);
}

TEST_CASE("connectives") {
    Session a = s_snd(t_int(), s_nil()), b = s_rcv(t_bool(), s_nil());
    SessionEnv env;
    CHECK(session_equal(dual(stdlib::times(a, b)), s_rcv(t_chneg(a), dual(b)), env));
    CHECK(session_equal(dual(stdlib::adisj(a, b)), stdlib::aconj(dual(a), dual(b)), env));
    CHECK(session_equal(dual(stdlib::limplies(a, b)), s_snd(t_chneg(a), dual(b)), env));
}

TEST_CASE("the times program ends with an empty store") {
    Machine m(parse_program(*stdlib::corpus_source("times")), {});
    auto o = m.run();
    REQUIRE(o.kind == OutcomeKind::Final);
    CHECK(m.store().channels.empty());
    CHECK(m.pool().threads.size() == 1);
}

TEST_CASE("create2") {
    auto src = *stdlib::corpus_source(stdlib::kCounterexample);
    auto diags = check_program(parse_program(src), Signature::builtin());
    REQUIRE(!diags.empty());
    CHECK(diags[0].code == "E207");
    CHECK(check_program(parse_program(src), Signature::builtin(true)).empty());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RunConfig cfg;
        cfg.seed = seed;
        cfg.allow_create2 = true;
        cfg.observe_only = true;
        cfg.monitors.df = true;
        auto o = run_program(parse_program(src), cfg);
        CHECK(o.kind == OutcomeKind::Deadlock);
        REQUIRE(!o.findings.empty());
        CHECK(o.findings[0].monitor == "df");
        CHECK(o.findings[0].step <= o.steps);
    }
}
