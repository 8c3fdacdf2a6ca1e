#include <doctest.h>

#include "gen.hpp"
#include "mtlc/error.hpp"
#include "mtlc/session.hpp"
#include "mtlc/stdlib.hpp"
#include "mtlc/syntax.hpp"

using namespace mtlc;

namespace {

SessionEnv sslist_env() {
    SessionEnv env;
    env.define("sslist", s_choice(ChoiceDir::RcvTag, {{"nil", s_nil()}, {"cons", s_snd(t_int(), s_named("sslist"))}}));
    return env;
}

// Definitions whose bodies start with a constructor, so every name is contractive.
SessionEnv random_env(gen::Rng &rng, const std::vector<std::string> &names) {
    SessionEnv env;
    for (const auto &n : names) env.define(n, s_snd(t_int(), gen::session(rng, names, 3)));
    return env;
}

}  // namespace

TEST_CASE("dual examples") {
    CHECK(same_session(dual(s_nil()), s_nilbar()));
    CHECK(same_session(dual(s_snd(t_int(), s_nil())), s_rcv(t_int(), s_nilbar())));
    Session r = s_rcv(t_bool(), s_nil());
    CHECK(same_session(dual(dual(r)), r));
    CHECK(same_session(dual(s_named("a")), s_named("a", true)));
}

TEST_CASE("nil and nilbar are distinct") {
    SessionEnv env;
    CHECK_FALSE(session_equal(s_nil(), s_nilbar(), env));
    CHECK_FALSE(matches(s_nil(), s_nilbar(), env));
}

TEST_CASE("unfold examples") {
    SessionEnv env = sslist_env();
    Session body = unfold(s_named("sslist"), env);
    CHECK(same_session(body, parse_session("rcvtag{ nil => nil | cons => snd(int) :: sslist }", {"sslist"})));

    Session dual_body = unfold(s_named("sslist", true), env);
    CHECK(same_session(dual_body, parse_session("sndtag{ nil => nilbar | cons => rcv(int) :: dual(sslist) }", {"sslist"})));

    try {
        unfold(s_named("undefined"), env);
        FAIL("expected an unknown name");
    } catch (const Error &e) {
        CHECK(e.code() == "E101");
    }
}

TEST_CASE("non-contractive definitions are rejected") {
    try {
        parse_program("sesstype a = b\nsesstype b = a\nfun main() = ()");
        FAIL("expected E101");
    } catch (const Error &e) {
        CHECK(e.code() == "E101");
    }
}

TEST_CASE("matches examples") {
    SessionEnv env = sslist_env();
    CHECK(matches(s_nil(), s_nil(), env));
    CHECK_FALSE(matches(s_snd(t_int(), s_nil()), s_rcv(t_int(), s_nil()), env));
    CHECK(matches(s_named("sslist"), unfold(s_named("sslist"), env), env));
    CHECK(matches(unfold(s_named("sslist"), env), s_named("sslist"), env));
    CHECK_FALSE(matches(s_named("sslist"), s_named("sslist", true), env));
}

TEST_CASE("property: dual is an involution") {
    gen::Rng rng(1);
    std::vector<std::string> names{"p", "q"};
    for (int i = 0; i < 1000; ++i) {
        Session s = gen::session(rng, names, 5);
        CAPTURE(print_session(s));
        CHECK(same_session(dual(dual(s)), s));
    }
}

TEST_CASE("property: dual commutes with unfold") {
    gen::Rng rng(2);
    std::vector<std::string> names{"p", "q", "r"};
    for (int i = 0; i < 300; ++i) {
        SessionEnv env = random_env(rng, names);
        for (const auto &n : names) {
            Session s = s_named(n, gen::pick(rng, 2) == 1);
            CHECK(same_session(unfold(dual(s), env), dual(unfold(s, env))));
        }
    }
}

TEST_CASE("property: every session matches itself") {
    gen::Rng rng(3);
    std::vector<std::string> names{"p", "q"};
    for (int i = 0; i < 500; ++i) {
        SessionEnv env = random_env(rng, names);
        Session s = gen::session(rng, names, 5);
        CAPTURE(print_session(s));
        CHECK(matches(s, s, env));
        CHECK(session_equal(dual(dual(s)), s, env));
        CHECK(session_equal(s, unfold_head(s, env), env));
    }
}

TEST_CASE("connective builders") {
    SessionEnv env;
    CHECK(same_session(stdlib::times(s_nil(), s_nil()), s_snd(t_chneg(s_nil()), s_nil())));
    CHECK(same_session(stdlib::limplies(s_nil(), s_nilbar()), s_rcv(t_chneg(s_nil()), s_nilbar())));
    auto d = stdlib::adisj(s_nil(), s_snd(t_int(), s_nil()));
    const auto *c = std::get_if<sess::Choice>(&d->v);
    REQUIRE(c);
    CHECK(c->dir == ChoiceDir::SndTag);
    CHECK(c->branches.size() == 2);
    CHECK(c->branches[0].tag == "l");
    auto a = stdlib::aconj(s_nil(), s_nil());
    CHECK(std::get<sess::Choice>(a->v).dir == ChoiceDir::RcvTag);
    CHECK(session_equal(dual(d), stdlib::aconj(s_nilbar(), s_rcv(t_int(), s_nilbar())), env));
}
