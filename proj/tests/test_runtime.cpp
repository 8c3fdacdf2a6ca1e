#include <doctest.h>

#include <algorithm>

#include "mtlc/ast_ops.hpp"
#include "mtlc/runtime.hpp"
#include "mtlc/stdlib.hpp"
#include "mtlc/syntax.hpp"

using namespace mtlc;

namespace {

Expr res(ChannelId id, Polarity p) { return make_expr(ex::Res{{id, p}}); }
Expr num(std::int64_t n) { return make_expr(ex::Int{n}); }
Expr unit() { return make_expr(ex::Unit{}); }
Expr call(const std::string &n, std::vector<Expr> args) { return make_expr(ex::ConstApp{n, std::move(args)}); }
Expr parse(const std::string &s) { return parse_expr(s); }

std::vector<Rule> rules(const std::vector<Step> &steps) {
    std::vector<Rule> out;
    for (const auto &s : steps) out.push_back(s.rule);
    return out;
}

SessionEnv no_sessions;

std::vector<std::string> trace_of(const Program &p, std::uint64_t seed, Policy policy) {
    std::vector<std::string> out;
    RunConfig cfg;
    cfg.seed = seed;
    cfg.policy = policy;
    cfg.on_event = [&](const TraceEvent &ev) { out.push_back(rule_tag(ev.rule) + " " + ev.note); };
    Outcome o = run_program(p, cfg);
    out.push_back(to_string(o.kind) + " " + (o.value ? print_expr(o.value) : ""));
    return out;
}

}  // namespace

TEST_CASE("decompose examples") {
    auto beta = parse("app(llam (x: unit) => x, ())");
    auto d = decompose(beta);
    CHECK(d.kind == Decomposition::Kind::Redex);
    CHECK(d.redex_kind == RedexKind::Pure);
    CHECK(d.ctx.frames.empty());

    auto e = make_expr(ex::Fst{make_expr(ex::Pair{num(1), call("send", {res(1, Polarity::Pos), num(2)})})});
    auto b = decompose(e);
    CHECK(b.blocked());
    REQUIRE(b.ctx.frames.size() == 2);
    CHECK(b.ctx.frames[0].slot == 0);
    CHECK(b.ctx.frames[1].slot == 1);
    CHECK(same_expr(b.redex, call("send", {res(1, Polarity::Pos), num(2)})));
    CHECK(same_expr(b.ctx.plug(b.redex), e));

    auto c = decompose(call("close", {res(1, Polarity::Pos)}));
    CHECK(c.blocked());
    CHECK(c.ctx.frames.empty());

    auto left_first = decompose(call("+", {parse("1 + 2"), parse("3 + 4")}));
    CHECK(same_expr(left_first.redex, parse("1 + 2")));
}

TEST_CASE("reduce_pure examples") {
    CHECK(same_expr(reduce_pure(parse("if true then 1 else 2")), num(1)));
    CHECK(same_expr(reduce_pure(parse("let (a, b) = (1, 2) in b + a")), parse("2 + 1")));
    auto fix = parse("fix f: int -> int => lam (x: int) => app(f, x)");
    auto once = reduce_pure(fix);
    const auto *lam = as<ex::Lam>(once);
    REQUIRE(lam);
    const auto *app = as<ex::App>(lam->body);
    REQUIRE(app);
    CHECK(same_expr(app->fn, fix));
    CHECK(same_expr(reduce_pure(parse("fst((1, 2))")), num(1)));
}

TEST_CASE("reduce_adhoc examples") {
    Rng rng(0);
    CHECK(same_expr(reduce_adhoc("+", {num(1), num(1)}, rng), num(2)));
    CHECK(same_expr(reduce_adhoc("<", {num(3), num(2)}, rng), make_expr(ex::Bool{false})));
    CHECK(same_expr(reduce_adhoc("/", {num(3), num(0)}, rng), num(0)));
    CHECK_THROWS_AS(reduce_adhoc("+", {num(1), make_expr(ex::Bool{true})}, rng), std::logic_error);
    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i) CHECK(same_expr(reduce_adhoc("randbit", {}, a), reduce_adhoc("randbit", {}, b)));
    Rng c(1);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 64; ++i) seen.insert(as<ex::Int>(reduce_adhoc("randbit", {}, c))->value);
    CHECK(seen == std::set<std::int64_t>{0, 1});
}

TEST_CASE("enabled_steps examples") {
    Pool p;
    p.threads = {{0, num(5)}, {1, unit()}};
    CHECK(rules(enabled_steps(p, {})) == std::vector<Rule>{Rule::PR2});

    Pool q;
    q.threads = {{0, call("send", {res(1, Polarity::Pos), num(5)})}, {1, call("channeg_send", {res(1, Polarity::Neg)})}};
    auto steps = enabled_steps(q, {});
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == Rule::PR4Send);
    CHECK(steps[0].tids == std::vector<Tid>{1, 0});

    Pool r;
    r.threads = {{0, call("send", {res(1, Polarity::Pos), num(5)})}, {1, call("channeg_recv", {res(1, Polarity::Neg), num(3)})}};
    CHECK(enabled_steps(r, {}).empty());
}

TEST_CASE("PR3 places the negative end with the creator") {
    Pool p;
    p.threads[0] = make_expr(ex::Pair{num(0), parse_expr("chneg_create(llam (c: chpos(nil)) => close(c))")});
    ChannelStore store;
    Rng rng(0);
    auto steps = enabled_steps(p, store);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == Rule::PR3);
    auto ev = apply_step(p, store, steps[0], rng, no_sessions);
    CHECK(ev.channels == std::vector<ChannelId>{1});
    CHECK(same_expr(p.threads.at(0), make_expr(ex::Pair{num(0), res(1, Polarity::Neg)})));
    REQUIRE(p.threads.contains(1));
    const auto *app = as<ex::App>(p.threads.at(1));
    REQUIRE(app);
    CHECK(same_expr(app->arg, res(1, Polarity::Pos)));
    CHECK(store.channels.contains(1));
}

TEST_CASE("PR4 rules rewrite both ends") {
    SessionEnv env;
    Rng rng(0);
    {
        Pool p;
        ChannelStore store;
        store.channels[1] = {s_nil(), s_nil()};
        p.threads = {{0, make_expr(ex::Pair{call("close", {res(1, Polarity::Pos)}), num(1)})},
                     {1, call("channeg_close", {res(1, Polarity::Neg)})}};
        auto steps = enabled_steps(p, store);
        REQUIRE(steps.size() == 1);
        CHECK(steps[0].rule == Rule::PR4Clos);
        apply_step(p, store, steps[0], rng, env);
        CHECK(same_expr(p.threads.at(0), make_expr(ex::Pair{unit(), num(1)})));
        CHECK(same_expr(p.threads.at(1), unit()));
        CHECK(store.channels.empty());
    }
    {
        Session s = s_rcv(t_int(), s_nil());
        Pool p;
        ChannelStore store;
        store.channels[1] = {s, s};
        p.threads = {{0, call("recv", {res(1, Polarity::Pos)})}, {1, call("channeg_recv", {res(1, Polarity::Neg), num(7)})}};
        auto steps = enabled_steps(p, store);
        REQUIRE(steps.size() == 1);
        CHECK(steps[0].rule == Rule::PR4Recv);
        apply_step(p, store, steps[0], rng, env);
        CHECK(same_expr(p.threads.at(1), res(1, Polarity::Neg)));
        CHECK(same_expr(p.threads.at(0), make_expr(ex::Pair{res(1, Polarity::Pos), num(7)})));
        CHECK(same_session(store.channels.at(1).pos_state, s_nil()));
    }
    {
        Session s = s_snd(t_int(), s_nil());
        Pool p;
        ChannelStore store;
        store.channels[1] = {s, s};
        p.threads = {{0, call("send", {res(1, Polarity::Pos), num(5)})}, {1, call("channeg_send", {res(1, Polarity::Neg)})}};
        auto steps = enabled_steps(p, store);
        REQUIRE(steps.size() == 1);
        apply_step(p, store, steps[0], rng, env);
        CHECK(same_expr(p.threads.at(0), res(1, Polarity::Pos)));
        CHECK(same_expr(p.threads.at(1), make_expr(ex::Pair{res(1, Polarity::Neg), num(5)})));
    }
}

TEST_CASE("the link rule forwards a message and leaves the linker in place") {
    SessionEnv env;
    Rng rng(0);
    Session s = s_rcv(t_int(), s_nil());
    Pool p;
    ChannelStore store;
    store.channels[1] = {s, s};
    store.channels[2] = {s, s};
    Expr linker = call("chposneg_link", {res(1, Polarity::Pos), res(2, Polarity::Neg)});
    p.threads = {{1, call("channeg_recv", {res(1, Polarity::Neg), num(9)})}, {2, linker}, {3, call("recv", {res(2, Polarity::Pos)})},
                 {0, unit()}};
    auto steps = enabled_steps(p, store);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == Rule::LinkRecv);
    CHECK(steps[0].tids == std::vector<Tid>{1, 2, 3});
    CHECK(steps[0].channels == std::vector<ChannelId>{1, 2});
    apply_step(p, store, steps[0], rng, env);
    CHECK(same_expr(p.threads.at(1), res(1, Polarity::Neg)));
    CHECK(same_expr(p.threads.at(2), linker));
    CHECK(same_expr(p.threads.at(3), make_expr(ex::Pair{res(2, Polarity::Pos), num(9)})));

    p.threads[1] = call("channeg_close", {res(1, Polarity::Neg)});
    p.threads[3] = call("close", {res(2, Polarity::Pos)});
    steps = enabled_steps(p, store);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == Rule::LinkClos);
    apply_step(p, store, steps[0], rng, env);
    for (Tid t : {1, 2, 3}) CHECK(same_expr(p.threads.at(t), unit()));
    CHECK(store.channels.empty());
}

TEST_CASE("run outcomes") {
    auto trivial = run_program(parse_program("fun main() = 1 + 1"), {});
    CHECK(trivial.kind == OutcomeKind::Final);
    CHECK(same_expr(trivial.value, num(2)));
    CHECK(trivial.steps == 1);

    RunConfig limited;
    limited.step_limit = 10;
    auto sieve = run_program(parse_program(*stdlib::corpus_source("sieve")), limited);
    CHECK(sieve.kind == OutcomeKind::StepLimit);
    CHECK(exit_code(sieve.kind) == 3);

    RunConfig c2;
    c2.allow_create2 = true;
    auto dl = run_program(parse_program(*stdlib::corpus_source(stdlib::kCounterexample)), c2);
    CHECK(dl.kind == OutcomeKind::Deadlock);
    CHECK(exit_code(dl.kind) == 2);
    CHECK(!dl.witness.empty());

    auto residual = run_program(parse_program("fun main() = chneg_create(llam (c: chpos(nil)) => close(c))"), {});
    CHECK(residual.kind == OutcomeKind::Final);
    CHECK(residual.residual);
}

TEST_CASE("property: identical seeds give identical traces") {
    for (const auto &name : stdlib::corpus_programs()) {
        Program p = parse_program(*stdlib::corpus_source(name));
        for (Policy pol : {Policy::Random, Policy::RoundRobin, Policy::Adversarial}) {
            CAPTURE(name);
            CHECK(trace_of(p, 17, pol) == trace_of(p, 17, pol));
        }
    }
}

TEST_CASE("property: regularity and channel conservation hold after every step") {
    for (const auto &name : stdlib::corpus_programs()) {
        CAPTURE(name);
        Program p = parse_program(*stdlib::corpus_source(name));
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            RunConfig cfg;
            cfg.seed = seed;
            Machine m(p, cfg);
            auto all_endpoints = [&] {
                std::vector<Endpoint> eps;
                for (const auto &[_, e] : m.pool().threads) {
                    auto r = resources_of(e);
                    eps.insert(eps.end(), r.begin(), r.end());
                }
                std::sort(eps.begin(), eps.end());
                return eps;
            };
            auto before = all_endpoints();
            for (int i = 0; i < 5000; ++i) {
                auto steps = m.enabled();
                if (steps.empty()) break;
                auto ev = m.apply(steps[(seed * 7 + i) % steps.size()]);
                auto after = all_endpoints();
                CHECK(std::adjacent_find(after.begin(), after.end()) == after.end());
                for (const auto &ep : after) CHECK(std::binary_search(after.begin(), after.end(), ep.dual()));
                std::set<ChannelId> ids;
                for (const auto &ep : after) ids.insert(ep.id);
                std::set<ChannelId> live;
                for (const auto &[id, _] : m.store().channels) live.insert(id);
                CHECK(ids == live);
                bool creates = ev.rule == Rule::PR3 || ev.rule == Rule::PR3x2;
                bool closes = ev.rule == Rule::PR4Clos || ev.rule == Rule::LinkClos;
                if (!creates && !closes) CHECK(after == before);
                if (creates) CHECK(after.size() == before.size() + 2 * ev.channels.size());
                if (closes) CHECK(after.size() + 2 * ev.channels.size() == before.size());
                before = after;
            }
            CHECK(m.enabled().empty());
        }
    }
}

TEST_CASE("policies all reach the final value") {
    Program p = parse_program(*stdlib::corpus_source("queue"));
    for (Policy pol : {Policy::Random, Policy::RoundRobin, Policy::Adversarial}) {
        RunConfig cfg;
        cfg.policy = pol;
        cfg.monitors = {true, true, true};
        auto o = run_program(p, cfg);
        CHECK(o.kind == OutcomeKind::Final);
        CHECK(o.findings.empty());
    }
}
