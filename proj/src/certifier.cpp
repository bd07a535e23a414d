// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include "nospoof/certifier.hpp"

#include <stdexcept>

namespace nospoof {

Ternary ternary_not(Ternary t) {
  switch (t) {
    case Ternary::True: return Ternary::False;
    case Ternary::False: return Ternary::True;
    case Ternary::Unknown: return Ternary::Unknown;
  }
  return Ternary::Unknown;
}

Ternary ternary_and(Ternary a, Ternary b) {
  if (a == Ternary::False || b == Ternary::False) return Ternary::False;
  if (a == Ternary::Unknown || b == Ternary::Unknown) return Ternary::Unknown;
  return Ternary::True;
}

bool iface_matches(std::string_view pattern, std::string_view iface) {
  if (!pattern.empty() && pattern.back() == '+') {
    pattern.remove_suffix(1);
    return iface.substr(0, pattern.size()) == pattern;
  }
  return pattern == iface;
}

namespace {

// True when an InIface primitive admits packets arriving on 'iface'.
bool iface_prim_holds(const MatchPrim& p, std::string_view iface) {
  return iface_matches(p.text, iface) != p.negated;
}

IntervalSet intersect_src_prims(const MatchExpr& m, int width) {
  IntervalSet acc = IntervalSet::universe(width);
  for (const MatchPrim& p : m.conjuncts) {
    if (p.kind != MatchPrim::Kind::SrcIp) continue;
    acc = acc & (p.negated ? p.addrs.complement() : p.addrs);
  }
  return acc;
}

}  // namespace

IntervalSet may_match_srcs(const MatchExpr& m, std::string_view iface,
                           int width) {
  for (const MatchPrim& p : m.conjuncts) {
    if (p.kind == MatchPrim::Kind::InIface && !iface_prim_holds(p, iface)) {
      return IntervalSet::empty_set(width);
    }
  }
  return intersect_src_prims(m, width);
}

IntervalSet must_match_srcs(const MatchExpr& m, std::string_view iface,
                            int width) {
  for (const MatchPrim& p : m.conjuncts) {
    switch (p.kind) {
      case MatchPrim::Kind::InIface:
        if (!iface_prim_holds(p, iface)) return IntervalSet::empty_set(width);
        break;
      case MatchPrim::Kind::SrcIp:
        break;
      default:
        // Whether the rule applies then depends on more than the source
        // address, so no address is guaranteed to be matched.
        return IntervalSet::empty_set(width);
    }
  }
  return intersect_src_prims(m, width);
}

CertResult sp(const std::vector<Rule>& rules, std::string_view iface,
              const IntervalSet& assigned) {
  const int width = assigned.width();

  // Per-rule contributions, kept for the failure replay.
  std::vector<IntervalSet> contribs;
  contribs.reserve(rules.size());

  IntervalSet allowed = IntervalSet::empty_set(width);
  IntervalSet denied = IntervalSet::empty_set(width);
  for (const Rule& rule : rules) {
    switch (rule.action.kind) {
      case ActionKind::Accept: {
        IntervalSet may = may_match_srcs(rule.match, iface, width);
        allowed = allowed | may;
        contribs.push_back(std::move(may));
        break;
      }
      case ActionKind::Drop: {
        IntervalSet must = must_match_srcs(rule.match, iface, width);
        denied = denied | (must - allowed);
        contribs.push_back(std::move(must));
        break;
      }
      default:
        throw std::invalid_argument("sp requires a preprocessed rule list");
    }
  }

  CertResult result;
  result.final_allowed = allowed - denied;
  result.certified = is_subset(result.final_allowed, assigned);
  if (result.certified) return result;

  IntervalSet a = IntervalSet::empty_set(width);
  IntervalSet d = IntervalSet::empty_set(width);
  for (std::size_t k = 0; k < rules.size(); ++k) {
    if (rules[k].action.kind == ActionKind::Accept) {
      a = a | contribs[k];
    } else {
      d = d | (contribs[k] - a);
    }
    IntervalSet escaped = (a - d) - assigned;
    if (!is_empty(escaped)) {
      result.first_violation =
          CertResult::Violation{k, std::move(escaped)};
      break;
    }
  }
  return result;
}

std::vector<std::pair<std::string, CertResult>> certify_all(
    const std::vector<Rule>& rules, const Ipassmt& ipassmt) {
  if (ipassmt.entries.empty()) {
    throw std::invalid_argument("certify_all requires a non-empty ipassmt");
  }
  std::vector<std::pair<std::string, CertResult>> results;
  results.reserve(ipassmt.entries.size());
  for (const auto& [iface, assigned] : ipassmt.entries) {
    results.emplace_back(iface, sp(rules, iface, assigned));
  }
  return results;
}

bool all_certified(
    const std::vector<std::pair<std::string, CertResult>>& results) {
  for (const auto& [iface, result] : results) {
    if (!result.certified) return false;
  }
  return true;
}

namespace {

Ternary eval_prim(const MatchPrim& p, const PacketPattern& packet) {
  auto exact = [&p](bool holds) {
    return (holds != p.negated) ? Ternary::True : Ternary::False;
  };
  switch (p.kind) {
    case MatchPrim::Kind::InIface:
      return exact(iface_matches(p.text, packet.in_iface));
    case MatchPrim::Kind::SrcIp:
      return exact(member(packet.src_ip, p.addrs));
    case MatchPrim::Kind::DstIp:
      if (!packet.dst_ip) return Ternary::Unknown;
      return exact(member(*packet.dst_ip, p.addrs));
    case MatchPrim::Kind::Protocol:
      if (!packet.protocol) return Ternary::Unknown;
      return exact(*packet.protocol == p.text);
    case MatchPrim::Kind::DstPort:
      if (!packet.dst_port) return Ternary::Unknown;
      return exact(p.port_lo <= *packet.dst_port &&
                   *packet.dst_port <= p.port_hi);
    case MatchPrim::Kind::CtState:
      return exact(p.states.contains(packet.state));
    case MatchPrim::Kind::Unknown:
      return Ternary::Unknown;
  }
  return Ternary::Unknown;
}

}  // namespace

Ternary eval_ternary(const MatchExpr& m, const PacketPattern& p) {
  Ternary acc = Ternary::True;
  for (const MatchPrim& prim : m.conjuncts) {
    acc = ternary_and(acc, eval_prim(prim, p));
    if (acc == Ternary::False) break;
  }
  return acc;
}

bool certify_access(const std::vector<Rule>& rules, const PacketPattern& p) {
  for (const Rule& rule : rules) {
    Ternary t = eval_ternary(rule.match, p);
    if (rule.action.kind == ActionKind::Accept) {
      if (t == Ternary::True) return true;
    } else if (rule.action.kind == ActionKind::Drop) {
      if (t != Ternary::False) return false;
    }
  }
  return false;
}

}  // namespace nospoof
