#include "mtlc/dfcheck.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

#include "mtlc/ast_ops.hpp"

namespace mtlc {

std::string to_string(const ChannelSet &s) {
    std::string out = "{";
    for (auto it = s.begin(); it != s.end(); ++it) out += (it == s.begin() ? "" : " ") + to_string(*it);
    return out + "}";
}

std::string to_string(const Collection &m) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) out += (i ? ", " : "") + to_string(m[i]);
    return out + "]";
}

bool is_regular(const Collection &m, std::string *why) {
    std::map<Endpoint, std::size_t> where;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (const auto &ep : m[i]) {
            auto [it, fresh] = where.emplace(ep, i);
            if (!fresh) {
                if (why) *why = fmt::format("endpoint {} occurs in sets {} and {}", to_string(ep), it->second, i);
                return false;
            }
        }
    }
    for (const auto &[ep, i] : where) {
        if (!where.contains(ep.dual())) {
            if (why) *why = fmt::format("unpaired endpoint {} in set {}", to_string(ep), i);
            return false;
        }
    }
    return true;
}

namespace {

std::optional<std::size_t> holder(const Collection &m, Endpoint ep) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i].contains(ep)) return i;
    return std::nullopt;
}

Collection merge(const Collection &m, std::size_t left, std::size_t right, ChannelId id) {
    Collection out;
    out.reserve(m.size() - 1);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i == right) continue;
        if (i == left) {
            ChannelSet merged = m[left];
            merged.insert(m[right].begin(), m[right].end());
            merged.erase({id, Polarity::Pos});
            merged.erase({id, Polarity::Neg});
            out.push_back(std::move(merged));
        } else {
            out.push_back(m[i]);
        }
    }
    return out;
}

// Channels whose two endpoints sit in different sets.
std::vector<ChannelId> reducible_ids(const Collection &m) {
    std::map<ChannelId, std::size_t> pos;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (const auto &ep : m[i])
            if (ep.pol == Polarity::Pos) pos[ep.id] = i;
    std::vector<ChannelId> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (const auto &ep : m[i])
            if (ep.pol == Polarity::Neg) {
                auto it = pos.find(ep.id);
                if (it != pos.end() && it->second != i) out.push_back(ep.id);
            }
    std::sort(out.begin(), out.end());
    return out;
}

bool all_empty(const Collection &m) {
    return std::all_of(m.begin(), m.end(), [](const ChannelSet &s) { return s.empty(); });
}

Collection sorted(Collection m) {
    std::sort(m.begin(), m.end());
    return m;
}

}  // namespace

Collection df_reduce(const Collection &m, ChannelId id) {
    auto left = holder(m, {id, Polarity::Pos});
    auto right = holder(m, {id, Polarity::Neg});
    if (!left || !right) throw std::invalid_argument(fmt::format("channel {} is not in the collection", id));
    if (*left == *right)
        throw std::invalid_argument(fmt::format("set {} holds both endpoints of channel {}", *left, id));
    std::size_t a = std::min(*left, *right), b = std::max(*left, *right);
    return merge(m, a, b, id);
}

std::string DFVerdict::witness() const {
    if (reducible) return "";
    if (self_loop)
        return fmt::format("self-looping set {} in normal form {}", to_string(normal_form[*self_loop]),
                           to_string(normal_form));
    return fmt::format("normal form {}", to_string(normal_form));
}

bool is_df_reducible_fast(const Collection &m) {
    std::vector<std::size_t> parent(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<ChannelId, std::size_t> pos;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (const auto &ep : m[i])
            if (ep.pol == Polarity::Pos) pos[ep.id] = i;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (const auto &ep : m[i]) {
            if (ep.pol != Polarity::Neg) continue;
            auto it = pos.find(ep.id);
            if (it == pos.end()) throw std::invalid_argument("collection is not regular: unpaired endpoint");
            std::size_t a = find(i), b = find(it->second);
            if (a == b) return false;
            parent[a] = b;
        }
    }
    return true;
}

DFVerdict is_df_reducible(const Collection &m) {
    std::string why;
    if (!is_regular(m, &why)) throw std::invalid_argument("collection is not regular: " + why);
    DFVerdict v;
    Collection cur = m;
    while (true) {
        auto ids = reducible_ids(cur);
        if (ids.empty()) break;
        ChannelId id = ids.front();
        std::size_t l = *holder(cur, {id, Polarity::Pos}), r = *holder(cur, {id, Polarity::Neg});
        v.trace.push_back({id, std::min(l, r), std::max(l, r)});
        cur = df_reduce(cur, id);
    }
    v.reducible = all_empty(cur);
    for (std::size_t i = 0; i < cur.size() && !v.reducible; ++i)
        if (!cur[i].empty()) {
            v.self_loop = i;
            break;
        }
    v.normal_form = std::move(cur);
    return v;
}

namespace {

bool oracle(const Collection &m, std::map<Collection, bool> &memo) {
    if (all_empty(m)) return true;
    Collection key = sorted(m);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto ids = reducible_ids(m);
    bool result = !ids.empty();
    for (ChannelId id : ids) {
        if (!oracle(df_reduce(m, id), memo)) {
            result = false;
            break;
        }
    }
    memo[key] = result;
    return result;
}

}  // namespace

bool oracle_df_reducible(const Collection &m, std::size_t bound) {
    std::size_t n = 0;
    for (const auto &s : m) n += s.size();
    if (n > bound) throw std::invalid_argument(fmt::format("{} endpoints exceed the oracle bound {}", n, bound));
    std::string why;
    if (!is_regular(m, &why)) throw std::invalid_argument("collection is not regular: " + why);
    std::map<Collection, bool> memo;
    return oracle(m, memo);
}

Collection parse_collection(std::string_view text) {
    Collection out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ChannelSet set;
        std::size_t i = 0;
        auto fail = [&](const std::string &what) {
            throw std::invalid_argument(fmt::format("line {}: {}", line_no, what));
        };
        auto skip = [&] {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
        };
        skip();
        bool braced = i < line.size() && line[i] == '{';
        if (braced) ++i;
        while (true) {
            skip();
            if (i >= line.size()) {
                if (braced) fail("missing '}'");
                break;
            }
            if (line[i] == '}') {
                if (!braced) fail("unexpected '}'");
                ++i;
                skip();
                if (i < line.size()) fail("text after '}'");
                break;
            }
            Polarity pol;
            if (line[i] == '+')
                pol = Polarity::Pos;
            else if (line[i] == '-')
                pol = Polarity::Neg;
            else
                fail(fmt::format("expected +<id> or -<id> at column {}", i + 1));
            ++i;
            ChannelId id = 0;
            auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), id);
            if (ec != std::errc{} || ptr == line.data() + i) fail(fmt::format("bad channel id at column {}", i + 1));
            i = static_cast<std::size_t>(ptr - line.data());
            if (!set.insert({id, pol}).second)
                fail(fmt::format("endpoint {} repeated", to_string(Endpoint{id, pol})));
        }
        out.push_back(std::move(set));
    }
    if (out.empty()) out.emplace_back();
    return out;
}

Collection remove_empty_sets(const Collection &m) {
    Collection out;
    for (const auto &s : m)
        if (!s.empty()) out.push_back(s);
    return out;
}

std::map<Tid, ChannelSet> rch(const Pool &pool) {
    std::map<Tid, ChannelSet> out;
    for (const auto &[tid, e] : pool.threads) {
        auto eps = resources_of(e);
        out[tid] = ChannelSet(eps.begin(), eps.end());
    }
    return out;
}

Collection as_collection(const std::map<Tid, ChannelSet> &sets) {
    Collection out;
    for (const auto &[_, s] : sets) out.push_back(s);
    return out;
}

namespace {

std::optional<Collection> reduce_all(Collection m, const std::vector<ChannelId> &ids) {
    try {
        for (ChannelId id : ids) m = df_reduce(m, id);
    } catch (const std::invalid_argument &) {
        return std::nullopt;
    }
    return m;
}

std::string ids_text(const std::vector<ChannelId> &ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
    return out;
}

std::optional<std::string> others_unchanged(const std::map<Tid, ChannelSet> &prev, const std::map<Tid, ChannelSet> &next,
                                            const std::vector<Tid> &participants) {
    std::set<Tid> skip(participants.begin(), participants.end());
    for (const auto &[tid, s] : prev) {
        if (skip.contains(tid)) continue;
        auto it = next.find(tid);
        if (it == next.end() || it->second != s)
            return fmt::format("thread {} changed its channels without taking part in the step", tid);
    }
    for (const auto &[tid, _] : next)
        if (!skip.contains(tid) && !prev.contains(tid)) return fmt::format("thread {} appeared from nowhere", tid);
    return std::nullopt;
}

std::optional<std::string> shape(const std::map<Tid, ChannelSet> &prev, const TraceEvent &ev,
                                 const std::map<Tid, ChannelSet> &next) {
    if (auto err = others_unchanged(prev, next, ev.tids)) return err;
    auto at = [](const std::map<Tid, ChannelSet> &m, Tid t) {
        auto it = m.find(t);
        return it == m.end() ? ChannelSet{} : it->second;
    };
    switch (ev.rule) {
    case Rule::PR0:
        if (prev != next) return std::string("pure step changed the channel sets");
        return std::nullopt;
    case Rule::PR1: {
        Tid creator = ev.tids.at(0), child = ev.tids.at(1);
        ChannelSet a = at(next, creator), b = at(next, child), joined = a;
        joined.insert(b.begin(), b.end());
        if (prev.contains(child) || joined.size() != a.size() + b.size() || joined != at(prev, creator))
            return fmt::format("thread {} and its child {} do not split the creator's channels", creator, child);
        return std::nullopt;
    }
    case Rule::PR2: {
        Tid t = ev.tids.at(0);
        if (!at(prev, t).empty() || next.contains(t))
            return fmt::format("finished thread {} still held channels", t);
        return std::nullopt;
    }
    case Rule::PR3:
    case Rule::PR3x2: {
        auto back = reduce_all(as_collection(next), ev.channels);
        if (!back || sorted(*back) != sorted(as_collection(prev)))
            return fmt::format("collection does not reduce back to its predecessor via new channel(s) {}",
                               ids_text(ev.channels));
        return std::nullopt;
    }
    case Rule::PR4Send:
    case Rule::PR4Recv:
    case Rule::PR4Tag:
    case Rule::LinkSend:
    case Rule::LinkRecv:
    case Rule::LinkTag: {
        auto before = reduce_all(as_collection(prev), ev.channels);
        auto after = reduce_all(as_collection(next), ev.channels);
        if (!before || !after || sorted(*before) != sorted(*after))
            return fmt::format("collections before and after do not agree after reducing via channel(s) {}",
                               ids_text(ev.channels));
        return std::nullopt;
    }
    case Rule::PR4Clos:
    case Rule::LinkClos: {
        auto before = reduce_all(as_collection(prev), ev.channels);
        Collection merged;
        ChannelSet joined;
        std::set<Tid> parts(ev.tids.begin(), ev.tids.end());
        for (const auto &[tid, s] : next) {
            if (parts.contains(tid))
                joined.insert(s.begin(), s.end());
            else
                merged.push_back(s);
        }
        merged.push_back(joined);
        for (ChannelId id : ev.channels)
            if (joined.contains({id, Polarity::Pos}) || joined.contains({id, Polarity::Neg}))
                return fmt::format("closed channel {} is still held", id);
        if (!before || sorted(*before) != sorted(merged))
            return fmt::format("closing channel(s) {} did not just remove their endpoints", ids_text(ev.channels));
        return std::nullopt;
    }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> monitor_step(const std::map<Tid, ChannelSet> &prev, const TraceEvent &event,
                                        const std::map<Tid, ChannelSet> &next) {
    Collection m = as_collection(next);
    std::string why;
    if (!is_regular(m, &why)) return "channel sets not regular: " + why;
    if (!is_df_reducible_fast(m)) return "channel sets not DF-reducible: " + is_df_reducible(m).witness();
    return shape(prev, event, next);
}

}  // namespace mtlc
