#include "sdiv/flowtable.hpp"

#include <algorithm>

namespace sdiv {

Address multicast_address_of(const Topology& topo, const NodeId& camera) {
    if (topo.node(camera).role != NodeRole::Camera)
        throw Error("node '" + camera + "' is not a camera");
    return Address{AddressKind::Multicast, camera};
}

ApplyResult apply_actions(const Rule& rule, const Header& h) {
    ApplyResult res;
    Header working = h;
    for (const Action& a : rule.actions) {
        switch (a.type) {
            case Action::Type::Output:
                res.outputs.emplace_back(a.port, working);
                break;
            case Action::Type::SetDst:
                working.dst = a.addr;
                break;
            case Action::Type::PacketIn:
                res.packet_in = true;
                break;
            case Action::Type::Drop:
                res.drop = true;
                break;
        }
    }
    return res;
}

Rule* FlowTable::lookup(const Header& h, SimTime now) {
    Rule* best = nullptr;
    for (Rule& r : entries_) {
        if (r.expired(now) || !r.match.matches(h)) continue;
        if (!best || r.priority > best->priority ||
            (r.priority == best->priority && r.seq > best->seq)) {
            best = &r;
        }
    }
    if (best) best->last_matched_us = now;
    return best;
}

const Rule* FlowTable::peek(const Header& h, SimTime now) const {
    const Rule* best = nullptr;
    for (const Rule& r : entries_) {
        if (r.expired(now) || !r.match.matches(h)) continue;
        if (!best || r.priority > best->priority ||
            (r.priority == best->priority && r.seq > best->seq)) {
            best = &r;
        }
    }
    return best;
}

InstallResult FlowTable::install(Rule rule, SimTime now) {
    rule.last_matched_us = now;
    rule.seq = next_seq_++;
    for (Rule& r : entries_) {
        if (r.match == rule.match && r.priority == rule.priority) {
            r = std::move(rule);
            return InstallResult::Replaced;
        }
    }
    if (capacity_ && entries_.size() >= *capacity_) return InstallResult::Rejected;
    entries_.push_back(std::move(rule));
    return InstallResult::Installed;
}

std::vector<Rule> FlowTable::expire_idle(SimTime now) {
    std::vector<Rule> removed;
    auto it = std::stable_partition(entries_.begin(), entries_.end(),
                                    [now](const Rule& r) { return !r.expired(now); });
    removed.assign(std::make_move_iterator(it), std::make_move_iterator(entries_.end()));
    entries_.erase(it, entries_.end());
    return removed;
}

}  // namespace sdiv
