// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors
/** @file
    Data model for rules, match expressions, actions, interface assignments,
    and packet patterns. Shared vocabulary of parser, preprocessor,
    certifier, and simulator. All types are immutable value types once
    constructed.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nospoof/wordset.hpp"

namespace nospoof {

enum class ActionKind {
  Accept,
  Drop,
  Reject,
  Log,
  Return,
  Call,
  Empty,
};

/// Rule action. `chain` is the jump target for Call and empty otherwise.
/// After preprocessing only Accept and Drop occur.
struct Action {
  ActionKind kind = ActionKind::Empty;
  std::string chain;

  static Action accept() { return {ActionKind::Accept, {}}; }
  static Action drop() { return {ActionKind::Drop, {}}; }
  static Action reject() { return {ActionKind::Reject, {}}; }
  static Action log() { return {ActionKind::Log, {}}; }
  static Action ret() { return {ActionKind::Return, {}}; }
  static Action empty() { return {ActionKind::Empty, {}}; }
  static Action call(std::string target) {
    return {ActionKind::Call, std::move(target)};
  }

  bool operator==(const Action&) const = default;
};

std::string_view action_kind_name(ActionKind kind);

/// Connection-tracking states distinguished by the model.
enum class CtState : std::uint8_t {
  New = 1u << 0,
  Established = 1u << 1,
  Related = 1u << 2,
  Invalid = 1u << 3,
  Untracked = 1u << 4,
};

std::string_view ct_state_name(CtState s);
std::optional<CtState> ct_state_from_name(std::string_view name);

/// Subset of the CtState values, as a bitmask.
struct CtStateSet {
  std::uint8_t bits = 0;

  bool contains(CtState s) const {
    return (bits & static_cast<std::uint8_t>(s)) != 0;
  }
  void insert(CtState s) { bits |= static_cast<std::uint8_t>(s); }
  bool empty() const { return bits == 0; }
  std::string to_string() const;

  bool operator==(const CtStateSet&) const = default;
};

/// One possibly-negated match primitive. A fixed set of conditions is
/// modeled exactly; everything else is captured verbatim as Unknown.
struct MatchPrim {
  enum class Kind {
    InIface,   // input interface pattern; trailing '+' is a wildcard
    SrcIp,     // source address set
    DstIp,     // destination address set
    Protocol,  // protocol name (lowercased)
    DstPort,   // inclusive destination port range
    CtState,   // connection-tracking state subset
    Unknown,   // unparsed match text, preserved verbatim
  };

  Kind kind = Kind::Unknown;
  bool negated = false;
  std::string text;            // InIface pattern / Protocol name / Unknown raw
  IntervalSet addrs;           // SrcIp, DstIp
  std::uint16_t port_lo = 0;   // DstPort
  std::uint16_t port_hi = 0;
  CtStateSet states;           // CtState

  static MatchPrim in_iface(std::string pattern, bool negated = false);
  static MatchPrim src_ip(IntervalSet set, bool negated = false);
  static MatchPrim dst_ip(IntervalSet set, bool negated = false);
  static MatchPrim protocol(std::string name, bool negated = false);
  static MatchPrim dst_port(std::uint16_t lo, std::uint16_t hi,
                            bool negated = false);
  static MatchPrim ct_state(CtStateSet states, bool negated = false);
  static MatchPrim unknown(std::string raw, bool negated = false);

  bool operator==(const MatchPrim&) const = default;
};

/// Conjunction of match primitives; the empty conjunction is
/// unconditionally true. Order is preserved from the input.
struct MatchExpr {
  std::vector<MatchPrim> conjuncts;

  bool is_true() const { return conjuncts.empty(); }

  bool operator==(const MatchExpr&) const = default;
};

/// Where a rule came from, for diagnostics.
struct RuleOrigin {
  std::string chain;
  int line = 0;

  bool operator==(const RuleOrigin&) const = default;
};

struct Rule {
  MatchExpr match;
  Action action;
  RuleOrigin origin;

  bool operator==(const Rule&) const = default;
};

/// Ordered rule list of one chain. Built-in chains carry a policy
/// (Accept or Drop); user-defined chains have none.
struct Chain {
  std::string name;
  std::optional<ActionKind> policy;
  std::vector<Rule> rules;
  int decl_line = 0;

  bool operator==(const Chain&) const = default;
};

/// One iptables table ("filter", ...) with its chains in declaration
/// order.
struct RulesetTable {
  std::string name;
  std::vector<Chain> chains;

  const Chain* find_chain(std::string_view name) const;
  Chain* find_chain(std::string_view name);

  bool operator==(const RulesetTable&) const = default;
};

/// Interface -> permitted source address set, in file order. Interface
/// names are unique and sets non-empty.
struct Ipassmt {
  std::vector<std::pair<std::string, IntervalSet>> entries;

  const IntervalSet* find(std::string_view iface) const;

  bool operator==(const Ipassmt&) const = default;
};

/// A concrete packet description for the access (lockout) check. Absent
/// optional fields make the corresponding match primitives undecidable.
struct PacketPattern {
  std::string in_iface;
  Word src_ip;
  std::optional<Word> dst_ip;
  std::optional<std::string> protocol;
  std::optional<std::uint16_t> dst_port;
  CtState state = CtState::New;
};

/// Per-interface certification verdict. On failure, first_violation
/// points at the earliest rule index after which the running
/// (allowed \ denied) set escapes the assigned range, with the escaping
/// addresses at that point.
struct CertResult {
  struct Violation {
    std::size_t rule_index = 0;
    IntervalSet offending;
  };

  bool certified = false;
  std::optional<Violation> first_violation;
  IntervalSet final_allowed;
};

}  // namespace nospoof
