// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include "nospoof/model.hpp"

#include <array>

namespace nospoof {

std::string_view action_kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::Accept: return "ACCEPT";
    case ActionKind::Drop: return "DROP";
    case ActionKind::Reject: return "REJECT";
    case ActionKind::Log: return "LOG";
    case ActionKind::Return: return "RETURN";
    case ActionKind::Call: return "CALL";
    case ActionKind::Empty: return "EMPTY";
  }
  return "?";
}

namespace {

constexpr std::array<std::pair<CtState, std::string_view>, 5> kStateNames = {{
    {CtState::New, "NEW"},
    {CtState::Established, "ESTABLISHED"},
    {CtState::Related, "RELATED"},
    {CtState::Invalid, "INVALID"},
    {CtState::Untracked, "UNTRACKED"},
}};

}  // namespace

std::string_view ct_state_name(CtState s) {
  for (const auto& [state, name] : kStateNames) {
    if (state == s) return name;
  }
  return "?";
}

std::optional<CtState> ct_state_from_name(std::string_view name) {
  for (const auto& [state, n] : kStateNames) {
    if (n == name) return state;
  }
  return std::nullopt;
}

std::string CtStateSet::to_string() const {
  std::string out;
  for (const auto& [state, name] : kStateNames) {
    if (!contains(state)) continue;
    if (!out.empty()) out += ",";
    out += name;
  }
  return out;
}

MatchPrim MatchPrim::in_iface(std::string pattern, bool negated) {
  MatchPrim p;
  p.kind = Kind::InIface;
  p.negated = negated;
  p.text = std::move(pattern);
  return p;
}

MatchPrim MatchPrim::src_ip(IntervalSet set, bool negated) {
  MatchPrim p;
  p.kind = Kind::SrcIp;
  p.negated = negated;
  p.addrs = std::move(set);
  return p;
}

MatchPrim MatchPrim::dst_ip(IntervalSet set, bool negated) {
  MatchPrim p;
  p.kind = Kind::DstIp;
  p.negated = negated;
  p.addrs = std::move(set);
  return p;
}

MatchPrim MatchPrim::protocol(std::string name, bool negated) {
  MatchPrim p;
  p.kind = Kind::Protocol;
  p.negated = negated;
  p.text = std::move(name);
  return p;
}

MatchPrim MatchPrim::dst_port(std::uint16_t lo, std::uint16_t hi,
                              bool negated) {
  MatchPrim p;
  p.kind = Kind::DstPort;
  p.negated = negated;
  p.port_lo = lo;
  p.port_hi = hi;
  return p;
}

MatchPrim MatchPrim::ct_state(CtStateSet states, bool negated) {
  MatchPrim p;
  p.kind = Kind::CtState;
  p.negated = negated;
  p.states = states;
  return p;
}

MatchPrim MatchPrim::unknown(std::string raw, bool negated) {
  MatchPrim p;
  p.kind = Kind::Unknown;
  p.negated = negated;
  p.text = std::move(raw);
  return p;
}

const Chain* RulesetTable::find_chain(std::string_view name) const {
  for (const Chain& c : chains) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Chain* RulesetTable::find_chain(std::string_view name) {
  for (Chain& c : chains) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const IntervalSet* Ipassmt::find(std::string_view iface) const {
  for (const auto& [name, set] : entries) {
    if (name == iface) return &set;
  }
  return nullptr;
}

}  // namespace nospoof
