#pragma once

#include <random>
#include <string>
#include <vector>

#include "mtlc/ast.hpp"
#include "mtlc/dfcheck.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng &rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline mtlc::Type type(Rng &rng, const std::vector<std::string> &names, int depth);

inline mtlc::Session session(Rng &rng, const std::vector<std::string> &names, int depth) {
    using namespace mtlc;
    std::size_t k = depth <= 0 ? pick(rng, 3) : pick(rng, 7);
    switch (k) {
    case 0: return s_nil();
    case 1: return s_nilbar();
    case 2:
        if (names.empty()) return s_nil();
        return s_named(names[pick(rng, names.size())], pick(rng, 2) == 1);
    case 3: return s_snd(type(rng, names, depth - 1), session(rng, names, depth - 1));
    case 4: return s_rcv(type(rng, names, depth - 1), session(rng, names, depth - 1));
    default: {
        std::vector<sess::Branch> bs;
        std::size_t n = 1 + pick(rng, 3);
        for (std::size_t i = 0; i < n; ++i) bs.push_back({"t" + std::to_string(i), session(rng, names, depth - 1)});
        return s_choice(pick(rng, 2) ? ChoiceDir::SndTag : ChoiceDir::RcvTag, std::move(bs));
    }
    }
}

inline mtlc::Type type(Rng &rng, const std::vector<std::string> &names, int depth) {
    using namespace mtlc;
    std::size_t k = depth <= 0 ? pick(rng, 3) : pick(rng, 9);
    switch (k) {
    case 0: return t_int();
    case 1: return t_bool();
    case 2: return t_unit();
    case 3: return t_prod(type(rng, names, depth - 1), type(rng, names, depth - 1));
    case 4: return t_arrow(Linearity::Intuitionistic, type(rng, names, depth - 1), type(rng, names, depth - 1));
    case 5: return t_arrow(Linearity::Linear, type(rng, names, depth - 1), type(rng, names, depth - 1));
    case 6: return t_chpos(session(rng, names, depth - 1));
    case 7: return t_chneg(session(rng, names, depth - 1));
    default: return t_service(session(rng, names, depth - 1));
    }
}

// Expressions over variables x, y, z and endpoints of channels 1..3. Integer literals are non-negative.
inline mtlc::Expr expr(Rng &rng, int depth) {
    using namespace mtlc;
    static const char *vars[] = {"x", "y", "z"};
    auto var = [&] { return std::string(vars[pick(rng, 3)]); };
    std::size_t k = depth <= 0 ? pick(rng, 5) : pick(rng, 17);
    switch (k) {
    case 0: return make_expr(ex::Var{var()});
    case 1: return make_expr(ex::Int{static_cast<std::int64_t>(pick(rng, 100))});
    case 2: return make_expr(ex::Bool{pick(rng, 2) == 1});
    case 3: return make_expr(ex::Unit{});
    case 4:
        return make_expr(ex::Res{{static_cast<ChannelId>(1 + pick(rng, 3)), pick(rng, 2) ? Polarity::Pos : Polarity::Neg}});
    case 5: {
        static const char *ops[] = {"+", "-", "*", "<", "=", "&&", "send", "channeg_recv"};
        return make_expr(ex::ConstApp{ops[pick(rng, 8)], {expr(rng, depth - 1), expr(rng, depth - 1)}});
    }
    case 6: {
        static const char *ops[] = {"not", "close", "recv", "channeg_send", "thread_create"};
        return make_expr(ex::ConstApp{ops[pick(rng, 5)], {expr(rng, depth - 1)}});
    }
    case 7: return make_expr(ex::Pair{expr(rng, depth - 1), expr(rng, depth - 1)});
    case 8: return make_expr(ex::Fst{expr(rng, depth - 1)});
    case 9: return make_expr(ex::Snd{expr(rng, depth - 1)});
    case 10: {
        std::string a = var(), b = var();
        if (a == b) b = a + "2";
        return make_expr(ex::LetPair{a, b, expr(rng, depth - 1), expr(rng, depth - 1)});
    }
    case 11: return make_expr(ex::If{expr(rng, depth - 1), expr(rng, depth - 1), expr(rng, depth - 1)});
    case 12:
        return make_expr(ex::Lam{var(), type(rng, {}, 1), pick(rng, 2) ? Linearity::Linear : Linearity::Intuitionistic,
                                 expr(rng, depth - 1)});
    case 13: return make_expr(ex::App{expr(rng, depth - 1), expr(rng, depth - 1)});
    case 14:
        return make_expr(ex::Offer{expr(rng, depth - 1),
                                   {{"a", var(), expr(rng, depth - 1)}, {"b", var(), expr(rng, depth - 1)}}});
    case 15: return make_expr(ex::Select{pick(rng, 2) ? "a" : "b", expr(rng, depth - 1)});
    default:
        return make_expr(ex::Fix{"f", t_arrow(Linearity::Intuitionistic, t_int(), t_int()),
                                 make_expr(ex::Lam{var(), t_int(), Linearity::Intuitionistic, expr(rng, depth - 1)})});
    }
}

// Regular collection: `pairs` channels, both endpoints placed in one of `sets` sets.
inline mtlc::Collection collection(Rng &rng, std::size_t sets, std::size_t pairs) {
    mtlc::Collection m(sets);
    for (std::size_t i = 1; i <= pairs; ++i) {
        m[pick(rng, sets)].insert({static_cast<mtlc::ChannelId>(i), mtlc::Polarity::Pos});
        m[pick(rng, sets)].insert({static_cast<mtlc::ChannelId>(i), mtlc::Polarity::Neg});
    }
    return m;
}

// Every placement of `pairs` channels' endpoints into `sets` sets.
template <class F>
void each_collection(std::size_t sets, std::size_t pairs, F &&f) {
    std::vector<std::size_t> slot(2 * pairs, 0);
    while (true) {
        mtlc::Collection m(sets);
        for (std::size_t e = 0; e < slot.size(); ++e)
            m[slot[e]].insert({static_cast<mtlc::ChannelId>(e / 2 + 1), e % 2 ? mtlc::Polarity::Neg : mtlc::Polarity::Pos});
        f(m);
        std::size_t i = 0;
        while (i < slot.size() && ++slot[i] == sets) slot[i++] = 0;
        if (i == slot.size()) return;
    }
}

}  // namespace gen
