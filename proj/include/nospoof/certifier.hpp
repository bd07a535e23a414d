// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nospoof/model.hpp"
#include "nospoof/wordset.hpp"

namespace nospoof {

// Kleene three-valued truth value.
enum class Ternary { False, Unknown, True };

Ternary ternary_not(Ternary t);
Ternary ternary_and(Ternary a, Ternary b);

// Interface pattern match. A trailing '+' matches any (possibly empty)
// suffix; otherwise the names must be identical.
bool iface_matches(std::string_view pattern, std::string_view iface);

// Over-approximation: a superset of the source addresses with which a
// packet arriving on 'iface' could satisfy m under some interpretation of
// the opaque primitives.  An interface primitive that rules out 'iface'
// gives the empty set; otherwise the source primitives are intersected
// (negated ones as complements) and every other primitive is ignored.
IntervalSet may_match_srcs(const MatchExpr& m, std::string_view iface,
                           int width);

// Under-approximation: a subset of the source addresses guaranteed to
// satisfy m for every packet carrying them on 'iface'.  Any primitive
// other than interface and source address forces the empty set; the rest
// is computed as in may_match_srcs.
IntervalSet must_match_srcs(const MatchExpr& m, std::string_view iface,
                            int width);

// One pass over a preprocessed rule list: Accept rules grow the allowed
// set by their over-approximated sources, Drop rules grow the denied set
// by their under-approximated sources minus what is already allowed.
// Certified iff (allowed \ denied) ends up inside 'assigned'.  On failure
// the prefix states are replayed to locate the first rule index whose
// prefix already lets some address escape 'assigned'.
//
// Throws std::invalid_argument on a rule that is not Accept or Drop.
CertResult sp(const std::vector<Rule>& rules, std::string_view iface,
              const IntervalSet& assigned);

// Runs sp for every interface of 'ipassmt', preserving its order.
// Throws std::invalid_argument if 'ipassmt' is empty.
std::vector<std::pair<std::string, CertResult>> certify_all(
    const std::vector<Rule>& rules, const Ipassmt& ipassmt);

bool all_certified(
    const std::vector<std::pair<std::string, CertResult>>& results);

// Three-valued match of m against a partially specified packet: opaque
// primitives are Unknown, primitives whose packet field is absent are
// Unknown, everything else evaluates exactly.
Ternary eval_ternary(const MatchExpr& m, const PacketPattern& p);

// Lockout check under the strictest reading: a Drop that could match
// blocks, an Accept counts only when it definitely matches.  True means
// the packet is accepted no matter how the opaque primitives behave.
bool certify_access(const std::vector<Rule>& rules, const PacketPattern& p);

}  // namespace nospoof
