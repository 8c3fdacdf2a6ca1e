#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "df_oracle.hpp"
#include "gen.hpp"
#include "mtlc/dfcheck.hpp"

using namespace mtlc;

namespace {

Endpoint pos(ChannelId id) { return {id, Polarity::Pos}; }
Endpoint neg(ChannelId id) { return {id, Polarity::Neg}; }

}  // namespace

TEST_CASE("df examples") {
    Collection cycle{{pos(1), neg(2)}, {neg(1), pos(2)}};
    auto v = is_df_reducible(cycle);
    CHECK(!v.reducible);
    REQUIRE(v.self_loop);
    CHECK(v.witness().find("self-looping") != std::string::npos);
    CHECK(!is_df_reducible_fast(cycle));

    Collection path{{pos(1)}, {neg(1), pos(2)}, {neg(2)}};
    auto p = is_df_reducible(path);
    CHECK(p.reducible);
    CHECK(p.trace.size() == 2);
    CHECK(is_df_reducible_fast(path));

    CHECK(is_df_reducible(Collection{{}}).reducible);
    CHECK(is_df_reducible(Collection{}).reducible);
    CHECK(!is_df_reducible(Collection{{pos(1), neg(1)}}).reducible);

    std::string why;
    CHECK(!is_regular(Collection{{pos(1)}}, &why));
    CHECK(why.find("unpaired") != std::string::npos);
    CHECK(!is_regular(Collection{{pos(1), neg(1)}, {pos(1)}}, &why));
    CHECK_THROWS_AS(is_df_reducible(Collection{{pos(1)}}), std::invalid_argument);
    CHECK_THROWS_AS(df_reduce(Collection{{pos(1), neg(1)}}, 1), std::invalid_argument);
    CHECK_THROWS_AS(df_reduce(Collection{{pos(1)}, {neg(1)}}, 2), std::invalid_argument);
    CHECK(df_reduce(Collection{{pos(1), pos(2)}, {neg(1)}}, 1) == Collection{{pos(2)}});
}

TEST_CASE("parse_collection") {
    CHECK(parse_collection("+1 -2\n-1 +2\n") == Collection{{pos(1), neg(2)}, {neg(1), pos(2)}});
    CHECK(parse_collection("{+1, -2}\n{}\n\n") == Collection{{pos(1), neg(2)}, {}, {}});
    CHECK(parse_collection("") == Collection{{}});
    CHECK_THROWS_WITH_AS(parse_collection("+1\nx\n"), doctest::Contains("line 2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_collection("+1 +1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_collection("{+1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_collection("+"), std::invalid_argument);
}

TEST_CASE("property: exhaustive agreement with the literal definition") {
    std::size_t n = 0, placements = 0;
    for (std::size_t sets = 1; sets <= 3; ++sets)
        for (std::size_t pairs = 0; pairs <= 3; ++pairs) {
            std::size_t count = 1;
            for (std::size_t e = 0; e < 2 * pairs; ++e) count *= sets;
            placements += count;
            gen::each_collection(sets, pairs, [&](const Collection &m) {
                ++n;
                bool expect = literal::reducible(m);
                auto v = is_df_reducible(m);
                CAPTURE(to_string(m));
                CHECK(v.reducible == expect);
                CHECK(is_df_reducible_fast(m) == expect);
                CHECK(oracle_df_reducible(m) == expect);
                if (expect) CHECK(literal::replay(m, v.trace));
            });
        }
    CHECK(n == placements);
}

TEST_CASE("property: random collections agree with the literal definition") {
    gen::Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        Collection m = gen::collection(rng, 1 + gen::pick(rng, 4), gen::pick(rng, 4));
        bool expect = literal::reducible(m);
        auto v = is_df_reducible(m);
        CAPTURE(to_string(m));
        CHECK(v.reducible == expect);
        CHECK(is_df_reducible_fast(m) == expect);
        if (expect) {
            CHECK(literal::replay(m, v.trace));
        } else {
            REQUIRE(v.self_loop);
            const auto &loop = v.normal_form[*v.self_loop];
            bool has_pair = std::any_of(loop.begin(), loop.end(), [&](const Endpoint &e) { return loop.contains(e.dual()); });
            CHECK(has_pair);
            CHECK(literal::replay(m, v.trace) == false);
        }
    }
}

TEST_CASE("property: empty sets do not change the verdict") {
    gen::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        Collection m = gen::collection(rng, 1 + gen::pick(rng, 5), gen::pick(rng, 5));
        Collection padded = m;
        padded.emplace_back();
        padded.insert(padded.begin(), ChannelSet{});
        bool a = is_df_reducible(m).reducible;
        CHECK(is_df_reducible(remove_empty_sets(m)).reducible == a);
        CHECK(is_df_reducible(padded).reducible == a);
        CHECK(is_df_reducible_fast(padded) == a);
    }
}

TEST_CASE("property: n sets joined by n channels in a ring are not reducible, a chain is") {
    for (ChannelId n = 1; n <= 4; ++n) {
        Collection ring(n), chain(n + 1);
        for (ChannelId i = 0; i < n; ++i) {
            ring[i].insert(pos(i + 1));
            ring[(i + 1) % n].insert(neg(i + 1));
            chain[i].insert(pos(i + 1));
            chain[i + 1].insert(neg(i + 1));
        }
        CHECK(!literal::reducible(ring));
        CHECK(!is_df_reducible(ring).reducible);
        CHECK(literal::reducible(chain));
        CHECK(is_df_reducible(chain).reducible);
    }
}

TEST_CASE("property: more channels than a tree allows is never reducible") {
    gen::Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        std::size_t sets = 1 + gen::pick(rng, 4);
        Collection m = gen::collection(rng, sets, sets + gen::pick(rng, 3));
        CHECK(!is_df_reducible(m).reducible);
    }
}

TEST_CASE("monitor_step") {
    std::map<Tid, ChannelSet> prev{{0, {}}};
    TraceEvent create{1, Rule::PR3, {0, 1}, {1}, ""};
    CHECK(!monitor_step(prev, create, {{0, {neg(1)}}, {1, {pos(1)}}}));
    auto bad = monitor_step(prev, create, {{0, {neg(1), pos(1)}}, {1, {}}});
    REQUIRE(bad);
    CHECK(bad->find("DF-reducible") != std::string::npos);

    std::map<Tid, ChannelSet> two{{0, {neg(1)}}, {1, {pos(1)}}};
    TraceEvent pure{2, Rule::PR0, {0}, {}, ""};
    CHECK(!monitor_step(two, pure, two));
    CHECK(monitor_step(two, pure, {{0, {pos(1)}}, {1, {neg(1)}}}));

    TraceEvent close{3, Rule::PR4Clos, {0, 1}, {1}, ""};
    CHECK(!monitor_step(two, close, {{0, {}}, {1, {}}}));
    CHECK(monitor_step(two, close, {{0, {neg(1)}}, {1, {pos(1)}}}));

    CHECK(monitor_step(two, pure, {{0, {neg(1)}}}));
}
