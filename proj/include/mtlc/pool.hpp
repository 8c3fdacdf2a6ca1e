#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtlc/ast.hpp"

namespace mtlc {

using Tid = std::uint64_t;

// Thread 0 is the main thread and is always present.
struct Pool {
    std::map<Tid, Expr> threads;
    Tid next_tid = 1;
};

// Protocol state seen from each end; both advance together on every communication.
struct ChannelRecord {
    Session pos_state;
    Session neg_state;
    bool pos_live = true;
    bool neg_live = true;
};

struct ChannelStore {
    std::map<ChannelId, ChannelRecord> channels;
    ChannelId next_id = 1;
};

enum class Rule : std::uint8_t {
    PR0,      // pure or ad-hoc reduction inside one thread
    PR1,      // thread_create
    PR2,      // finished non-main thread removed
    PR3,      // chneg_create / service_request
    PR3x2,    // chneg_create2
    PR4Clos,
    PR4Send,
    PR4Recv,
    PR4Tag,   // select meets offer
    LinkClos, // the same four, through one or more chposneg_link threads
    LinkSend,
    LinkRecv,
    LinkTag,
};

std::string rule_tag(Rule r);

struct TraceEvent {
    std::size_t step = 0;
    Rule rule = Rule::PR0;
    std::vector<Tid> tids;             // participants; the first one initiated the step
    std::vector<ChannelId> channels;   // new channels (PR3) or the channels a message crossed (PR4, LINK)
    std::string note;
};

}  // namespace mtlc
