#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdiv/topology.hpp"

namespace sdiv {

/// Port number 0 stands for an AP's wireless interface; wired ports start at 1.
inline constexpr int kWirelessPort = 0;

enum class AddressKind { Unicast, Multicast };

/// Endpoint identifier. Unicast addresses name topology nodes or vehicles;
/// multicast addresses are derived from camera ids and live in their own
/// space, so a multicast address never equals any unicast address.
struct Address {
    AddressKind kind = AddressKind::Unicast;
    std::string id;

    bool operator==(const Address& o) const { return kind == o.kind && id == o.id; }
    bool operator!=(const Address& o) const { return !(*this == o); }
    bool operator<(const Address& o) const {
        if (kind != o.kind) return kind < o.kind;
        return id < o.id;
    }

    std::string str() const { return kind == AddressKind::Multicast ? id + "'" : id; }
};

inline Address unicast(const std::string& id) { return Address{AddressKind::Unicast, id}; }

/// Deterministic injective mapping from a camera node to its multicast address.
Address multicast_address_of(const Topology& topo, const NodeId& camera);

struct Header {
    Address src;
    Address dst;

    bool operator==(const Header& o) const { return src == o.src && dst == o.dst; }
    bool operator<(const Header& o) const {
        if (!(src == o.src)) return src < o.src;
        return dst < o.dst;
    }

    std::string str() const { return "(" + src.str() + ">" + dst.str() + ")"; }
};

/// Match over (src, dst); an empty optional is a wildcard.
struct MatchPattern {
    std::optional<Address> src;
    std::optional<Address> dst;

    bool matches(const Header& h) const {
        if (src && !(*src == h.src)) return false;
        if (dst && !(*dst == h.dst)) return false;
        return true;
    }

    bool operator==(const MatchPattern& o) const { return src == o.src && dst == o.dst; }
    bool operator<(const MatchPattern& o) const {
        if (src != o.src) return src < o.src;
        return dst < o.dst;
    }

    std::string str() const {
        auto f = [](const std::optional<Address>& a) { return a ? a->str() : std::string("*"); };
        return "(" + f(src) + ">" + f(dst) + ")";
    }
};

struct Action {
    enum class Type { Output, SetDst, PacketIn, Drop };

    Type type = Type::Drop;
    int port = 0;     // Output
    Address addr;     // SetDst

    static Action output(int port) { return {Type::Output, port, {}}; }
    static Action set_dst(Address a) { return {Type::SetDst, 0, std::move(a)}; }
    static Action packet_in() { return {Type::PacketIn, 0, {}}; }
    static Action drop() { return {Type::Drop, 0, {}}; }

    bool operator==(const Action& o) const {
        return type == o.type && port == o.port && addr == o.addr;
    }
};

/// Priority bands used by the controller: 1 generic destination rules,
/// 5 last-hop multicast rewrites, 10 exact branch/disambiguation rules.
inline constexpr int kPriorityGeneric = 1;
inline constexpr int kPriorityMulticast = 5;
inline constexpr int kPriorityExact = 10;

struct Rule {
    MatchPattern match;
    int priority = kPriorityGeneric;
    std::vector<Action> actions;
    SimTime idle_timeout_us = 0;
    SimTime last_matched_us = 0;
    std::uint64_t seq = 0;  // install order, assigned by the table

    bool expired(SimTime now) const {
        return idle_timeout_us > 0 && now - last_matched_us >= idle_timeout_us;
    }
};

/// Result of walking a rule's action list against a packet header.
struct ApplyResult {
    std::vector<std::pair<int, Header>> outputs;  // (port, header copy at emission)
    bool packet_in = false;
    bool drop = false;
};

/// Walks the action list with a working header initialized to h. Every Output
/// emits a copy of the current working header; SetDst mutates the working
/// header for all subsequent outputs.
ApplyResult apply_actions(const Rule& rule, const Header& h);

enum class InstallResult { Installed, Replaced, Rejected };

/// OpenFlow-style prioritized flow table owned by exactly one node within one
/// simulation instance.
class FlowTable {
public:
    FlowTable() = default;
    explicit FlowTable(std::optional<std::size_t> capacity) : capacity_(capacity) {}

    /// Highest-priority live match; ties go to the most recently installed.
    /// On hit, refreshes last_matched. Returns nullptr on miss.
    Rule* lookup(const Header& h, SimTime now);

    /// lookup without refreshing last_matched (used by queries and oracles).
    const Rule* peek(const Header& h, SimTime now) const;

    /// Adds the entry with last_matched := now, replacing any entry with the
    /// same (match, priority). Rejects when the table is at capacity.
    InstallResult install(Rule rule, SimTime now);

    /// Removes and returns every rule idle for at least its timeout.
    std::vector<Rule> expire_idle(SimTime now);

    std::size_t size() const { return entries_.size(); }
    const std::vector<Rule>& entries() const { return entries_; }

private:
    std::vector<Rule> entries_;
    std::optional<std::size_t> capacity_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace sdiv
