#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtlc/pool.hpp"

namespace mtlc {

using ChannelSet = std::set<Endpoint>;
// A multiset of channel sets; positions are stable so verdicts can name the set they talk about.
using Collection = std::vector<ChannelSet>;

std::string to_string(const ChannelSet &s);
std::string to_string(const Collection &m);

// Pairwise disjoint, and every endpoint's dual also occurs. `why` receives the first problem found.
bool is_regular(const Collection &m, std::string *why = nullptr);

// Merges the sets holding +id and -id, dropping both endpoints. Throws std::invalid_argument when
// the id is absent or both endpoints already sit in one set.
Collection df_reduce(const Collection &m, ChannelId id);

struct ReductionStep {
    ChannelId id;
    std::size_t left;   // indices before the merge; the merged set takes the place of `left`
    std::size_t right;
};

struct DFVerdict {
    bool reducible = false;
    std::vector<ReductionStep> trace;
    Collection normal_form;
    std::optional<std::size_t> self_loop;  // a set of the normal form holding some channel and its dual
    std::string witness() const;
};

// Reduces along one maximal path. Throws std::invalid_argument on a non-regular collection.
DFVerdict is_df_reducible(const Collection &m);

// Same answer without a trace: a regular collection is DF-reducible iff the graph with one node per
// set and one edge per channel is a forest.
bool is_df_reducible_fast(const Collection &m);

// The definition taken literally: all sets empty, or some successor exists and every successor is
// reducible. Throws std::invalid_argument when the collection holds more than `bound` endpoints.
bool oracle_df_reducible(const Collection &m, std::size_t bound = 12);

// One set per line, endpoints `+<id>` / `-<id>` separated by blanks, optional braces; a blank line is
// an empty set. Throws std::invalid_argument naming the offending line.
Collection parse_collection(std::string_view text);

Collection remove_empty_sets(const Collection &m);

// Channel sets per thread.
std::map<Tid, ChannelSet> rch(const Pool &pool);
Collection as_collection(const std::map<Tid, ChannelSet> &sets);

// Checks the step kept the collection regular and reducible, and that its change has the shape
// the rule allows. Returns a description of the first failed check.
std::optional<std::string> monitor_step(const std::map<Tid, ChannelSet> &prev, const TraceEvent &event,
                                        const std::map<Tid, ChannelSet> &next);

}  // namespace mtlc
