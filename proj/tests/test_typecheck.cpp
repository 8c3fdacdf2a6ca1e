#include <doctest.h>

#include "mtlc/ast_ops.hpp"
#include "mtlc/runtime.hpp"
#include "mtlc/stdlib.hpp"
#include "mtlc/syntax.hpp"
#include "mtlc/typecheck.hpp"

using namespace mtlc;

namespace {

Expr res(ChannelId id, Polarity p) { return make_expr(ex::Res{{id, p}}); }
Expr var(const std::string &n) { return make_expr(ex::Var{n}); }

std::string error_code(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    return "";
}

std::string first_code(const std::string &src, bool create2 = false) {
    try {
        auto d = check_program(parse_program(src), Signature::builtin(create2));
        return d.empty() ? "" : d.front().code;
    } catch (const Error &e) {
        return e.code();
    }
}

}  // namespace

TEST_CASE("check examples") {
    CheckEnv env;
    auto id = make_expr(ex::Lam{"x", t_int(), Linearity::Intuitionistic, var("x")});
    auto r = check_expr({}, id, env);
    CHECK(same_type(r.type, t_arrow(Linearity::Intuitionistic, t_int(), t_int())));
    CHECK(r.leftover.empty());

    TypingCtx ctx;
    ctx.delta.push_back({"x", t_chpos(s_nil())});
    auto cond = make_expr(ex::If{make_expr(ex::Bool{true}), var("x"), var("x")});
    auto rc = check_expr(ctx, cond, env);
    CHECK(same_type(rc.type, t_chpos(s_nil())));
    CHECK(rc.leftover.empty());

    auto pair = make_expr(ex::Pair{var("x"), var("x")});
    CHECK(error_code([&] { check_expr(ctx, pair, env); }) == "E201");

    CheckEnv with_ch;
    with_ch.resources[{1, Polarity::Pos}] = t_chpos(s_nil());
    auto cl = check_closed(make_expr(ex::ConstApp{"close", {res(1, Polarity::Pos)}}), with_ch);
    CHECK(same_type(cl.type, t_unit()));
    CHECK(cl.consumed == std::vector<Endpoint>{{1, Polarity::Pos}});
}

TEST_CASE("linear variables left over are reported, not rejected, by check_expr") {
    CheckEnv env;
    TypingCtx ctx;
    ctx.delta.push_back({"x", t_chpos(s_nil())});
    auto r = check_expr(ctx, make_expr(ex::Int{1}), env);
    CHECK(r.leftover == std::vector<std::string>{"x"});
}

TEST_CASE("instantiate examples") {
    Signature sig = Signature::builtin();
    SessionEnv env;
    auto inst = instantiate("send", *sig.find("send"), {t_chpos(s_snd(t_int(), s_nil())), t_int()}, env);
    CHECK(same_type(inst.result, t_chpos(s_nil())));
    CHECK(same_type(inst.theta.linvars.at("a"), t_int()));
    CHECK(same_session(inst.theta.sessions.at("s"), s_nil()));

    auto tc = instantiate("thread_create", *sig.find("thread_create"), {t_arrow(Linearity::Linear, t_unit(), t_unit())}, env);
    CHECK(same_type(tc.result, t_unit()));

    CHECK(error_code([&] {
              instantiate("send", *sig.find("send"), {t_chpos(s_rcv(t_int(), s_nil())), t_int()}, env);
          }) == "E206");
    CHECK(error_code([&] { instantiate("close", *sig.find("close"), {}, env); }) == "E206");
}

TEST_CASE("the signature holds exactly the built-in constants") {
    Signature sig = Signature::builtin();
    for (const char *n : {"thread_create", "chneg_create", "send", "recv", "channeg_send", "channeg_recv", "close",
                          "channeg_close", "chposneg_link", "service_create", "service_request", "randbit", "+", "<",
                          "&&", "not"})
        CHECK(sig.find(n) != nullptr);
    CHECK(sig.find("chneg_create2") == nullptr);
    CHECK(Signature::builtin(true).find("chneg_create2") != nullptr);
}

TEST_CASE("type rules reject what they should") {
    CHECK(first_code("fun main() = if true then 1 else false") == "E205");
    CHECK(first_code("fun main() = lam (x: int) => y") == "E200");
    CHECK(first_code("fun f(x: int): int = x + 1\nfun main() = f(true)") == "E205");
    CHECK(first_code("sesstype s = nil\nfun main() = chneg_create(lam (c: chpos(s)) => close(c))") == "E206");
    CHECK(first_code("sesstype s = nil\nfun main() = let c = chneg_create(llam (c: chpos(s)) => close(c)) in "
                     "let f = lam (u: unit) => channeg_close(c) in app(f, ())") == "E204");
    CHECK(first_code("fun f(x: int) = x\nfun main() = 0") == "E212");
    CHECK(first_code("sesstype s = sndtag{ a => nil | b => nil }\nfun serve(c: chpos(s)): unit = close(select[a](c))\n"
                     "fun main() = let c = chneg_create(llam (p: chpos(s)) => serve(p)) in "
                     "offer c { a(c) => channeg_close(c) }") == "E209");
    CHECK(first_code("sesstype s = sndtag{ a => nil | b => nil }\nfun serve(c: chpos(s)): unit = close(select[a](c))\n"
                     "fun main() = let c = chneg_create(llam (p: chpos(s)) => serve(p)) in "
                     "channeg_close(select[a](c))") == "E211");
    CHECK(first_code("fun main() = fix f: int -> int => 3") == "E205");
    CHECK(first_code("fun main() = fix f: int -> int => app(f, 1)") == "E210");
    CHECK(first_code("sesstype s = snd(int) :: nil\nfun main() = let c = chneg_create(llam (p: chpos(s)) => close(send(p, 1))) in "
                     "offer c { a(x) => 1 }") == "E211");
}

TEST_CASE("corpus programs typecheck and mutants fail with the expected code") {
    for (const auto &name : stdlib::corpus_programs()) {
        CAPTURE(name);
        CHECK(first_code(*stdlib::corpus_source(name)) == "");
    }
    CHECK(first_code(*stdlib::corpus_source(stdlib::kCounterexample), true) == "");
    auto rejects = stdlib::reject_suite();
    CHECK(rejects.size() >= 8);
    for (const auto &c : rejects) {
        CAPTURE(c.name);
        CHECK(first_code(c.source) == c.code);
    }
}

TEST_CASE("check_pool examples") {
    SessionEnv env;
    Signature sig = Signature::builtin();
    std::map<std::uint64_t, Expr> unit_pool{{0, make_expr(ex::Unit{})}};
    CHECK(same_type(check_pool(unit_pool, {}, env, sig), t_unit()));

    Session s = s_rcv(t_int(), s_nil());
    std::map<std::uint64_t, Expr> pool{
        {0, make_expr(ex::ConstApp{"recv", {res(1, Polarity::Pos)}})},
        {1, make_expr(ex::ConstApp{"channeg_close", {make_expr(ex::ConstApp{"channeg_recv", {res(1, Polarity::Neg), make_expr(ex::Int{4})}})}})},
    };
    CHECK(same_type(check_pool(pool, {{1, s, s}}, env, sig), t_prod(t_chpos(s_nil()), t_int())));

    std::map<std::uint64_t, Expr> twice{
        {0, make_expr(ex::ConstApp{"close", {res(1, Polarity::Pos)}})},
        {1, make_expr(ex::ConstApp{"close", {res(1, Polarity::Pos)}})},
    };
    CHECK(error_code([&] { check_pool(twice, {{1, s_nil(), s_nil()}}, env, sig); }) == "E300");

    CHECK(error_code([&] { check_pool(pool, {{1, s, s_rcv(t_bool(), s_nil())}}, env, sig); }) == "E300");
    std::map<std::uint64_t, Expr> non_unit{{0, make_expr(ex::Unit{})}, {1, make_expr(ex::Int{3})}};
    CHECK(error_code([&] { check_pool(non_unit, {}, env, sig); }) == "E300");
}

TEST_CASE("value purity and canonical forms") {
    SessionEnv env;
    CHECK(check_value_purity(make_expr(ex::Unit{}), t_unit()));
    CHECK(check_value_purity(make_expr(ex::Pair{make_expr(ex::Int{1}), make_expr(ex::Bool{true})}), t_prod(t_int(), t_bool())));
    CHECK(canonical_form_ok(make_expr(ex::Int{1}), t_int(), env));
    CHECK_FALSE(canonical_form_ok(make_expr(ex::Bool{true}), t_int(), env));
    CHECK(canonical_form_ok(res(1, Polarity::Neg), t_chneg(s_nil()), env));
    CHECK_FALSE(canonical_form_ok(res(1, Polarity::Pos), t_chneg(s_nil()), env));
    CHECK(canonical_form_ok(make_expr(ex::Pair{make_expr(ex::Int{1}), make_expr(ex::Unit{})}), t_prod(t_int(), t_unit()), env));
}

TEST_CASE("property: incremental pool checking agrees with a full check") {
    for (const auto &name : stdlib::corpus_programs()) {
        CAPTURE(name);
        Program p = parse_program(*stdlib::corpus_source(name));
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            RunConfig cfg;
            cfg.seed = seed;
            Machine m(p, cfg);
            SessionEnv env(p.sessions);
            Signature sig = Signature::builtin();
            PoolChecker inc(env, sig);
            Type main_t = main_type(p, sig);
            for (int step = 0; step < 400; ++step) {
                auto steps = m.enabled();
                if (steps.empty()) break;
                m.apply(steps[seed % steps.size()]);
                auto typings = channel_typings(m.store());
                Type a = inc.check(m.pool().threads, typings);
                Type b = check_pool(m.pool().threads, typings, env, sig);
                CHECK(same_type(a, b));
                CHECK(type_equal(a, main_t, env));
            }
        }
    }
}
