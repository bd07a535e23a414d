// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "nospoof/model.hpp"
#include "nospoof/wordset.hpp"

namespace nospoof {

// Fully concrete packet for ground-truth simulation.
struct SimPacket {
  std::string in_iface;
  std::uint64_t src_ip = 0;
  std::uint64_t dst_ip = 0;
  std::string protocol = "tcp";
  std::uint16_t dst_port = 0;
  CtState state = CtState::New;
};

// Deterministic interpretation of opaque match primitives: a fixed seed
// makes each (raw text, packet) pair a fixed boolean.
class UnknownInterp {
 public:
  explicit UnknownInterp(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  bool operator()(std::string_view raw, const SimPacket& p) const;

 private:
  std::uint64_t seed_;
};

enum class Verdict { Accept, Drop };

// Exact evaluation of a non-opaque primitive against a concrete packet.
// Throws std::invalid_argument on an opaque primitive.
bool eval_known_prim(const MatchPrim& prim, const SimPacket& p);

// Walks the original chain structure: first matching Accept/Drop/Reject
// decides, Log and Empty rules are skipped, Call descends and Return (or
// chain exhaustion) resumes at the caller, and the entry policy decides
// whatever falls through.  Throws std::invalid_argument if 'entry' is
// missing or has no policy, std::runtime_error on a call cycle or a
// missing call target.
Verdict simulate(const RulesetTable& table, const std::string& entry,
                 const SimPacket& p, const UnknownInterp& f);

// Reusable simulate() for many interpretations of one packet: primitive
// evaluations that do not depend on the interpretation are computed once
// per packet.  The table must outlive the evaluator.
class TableEvaluator {
 public:
  TableEvaluator(const RulesetTable& table, const std::string& entry);

  Verdict simulate_one(const SimPacket& p, const UnknownInterp& f) const;
  void simulate_multi(const SimPacket& p,
                      const std::vector<UnknownInterp>& interps,
                      std::vector<Verdict>& out) const;

 private:
  struct PreppedRule {
    const Rule* rule;
    int call_target = -1;  // index into chains_ for Call actions
    std::vector<const MatchPrim*> known;
    std::vector<const MatchPrim*> unknown;
  };
  struct PreppedChain {
    const Chain* chain;
    std::vector<PreppedRule> rules;
    std::size_t first_flat = 0;  // index of rules[0] in the known cache
  };

  Verdict walk(const SimPacket& p, const UnknownInterp& f,
               const std::vector<signed char>& known_cache) const;

  std::vector<PreppedChain> chains_;
  int entry_index_ = -1;
  ActionKind policy_ = ActionKind::Drop;
  std::size_t total_rules_ = 0;
};

// First-match walker over a preprocessed (Accept/Drop only) rule list,
// factored the same way as TableEvaluator.  The list must outlive the
// evaluator.
class FlatEvaluator {
 public:
  struct FirstMatch {
    static constexpr std::size_t npos =
        std::numeric_limits<std::size_t>::max();
    std::size_t index = npos;
    bool accept = false;
  };

  explicit FlatEvaluator(const std::vector<Rule>& rules);

  // out[j] = first rule matched under interps[j], or npos if none.
  void first_match_multi(const SimPacket& p,
                         const std::vector<UnknownInterp>& interps,
                         std::vector<FirstMatch>& out) const;

 private:
  struct PreppedRule {
    const Rule* rule;
    bool accept;
    std::vector<const MatchPrim*> known;
    std::vector<const MatchPrim*> unknown;
  };

  std::vector<PreppedRule> rules_;
};

// Enumeration alphabet for the non-source packet fields, derived from the
// constants the rules actually test: interval endpoints plus sentinels.
// Two values the rules cannot tell apart are represented once.
struct PacketSpace {
  std::vector<std::uint64_t> dsts;
  std::vector<std::string> protocols;
  std::vector<std::uint16_t> ports;
  std::vector<CtState> states;

  static PacketSpace from_rules(const std::vector<Rule>& rules, int width);
  static PacketSpace from_table(const RulesetTable& table, int width);

  std::size_t combos() const {
    return dsts.size() * protocols.size() * ports.size() * states.size();
  }
};

// Ground-truth summary for one source address, aggregated over every
// enumerated packet and every sampled interpretation, from a single
// first-match walk of the full rule list per sample.  Prefix queries for
// any length L then read off:
//   accepted by prefix L        iff min_accept_k < L
//   denied by every sample at L iff any_sample && all_matched
//                                    && all_matched_drop && max_match_k < L
struct SrcStats {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t min_accept_k = npos;
  std::size_t max_match_k = 0;
  bool all_matched_drop = true;
  bool all_matched = true;
  bool any_sample = false;

  bool accepted_by_prefix(std::size_t len) const {
    return min_accept_k < len;
  }
  bool denied_by_prefix(std::size_t len) const {
    return any_sample && all_matched && all_matched_drop &&
           max_match_k < len;
  }
};

// One entry per source address (2^width of them).  Packets are fixed to
// arrive on 'iface'.  Throws std::invalid_argument for width > 16.
std::vector<SrcStats> flat_src_stats(const std::vector<Rule>& rules,
                                     std::string_view iface,
                                     const PacketSpace& space,
                                     const std::vector<UnknownInterp>& interps,
                                     int width);

// Enumerated ground truth for a rule-list prefix: a_lower holds the
// sources with some accepted sample, denied_all[src] says every sample
// with that source matched a Drop within the prefix.
struct ExactSets {
  IntervalSet a_lower;
  std::vector<bool> denied_all;
};

ExactSets exact_sets(const std::vector<Rule>& prefix, std::string_view iface,
                     const std::vector<UnknownInterp>& interps, int width);

// Fuzz-corpus generation.  All draws come from one seeded engine, so a
// seed fixes the table exactly.  unknown_rate is the per-primitive chance
// of replacing a generated primitive with an opaque one; guard_rate is
// the per-interface chance of a leading anti-spoofing Drop rule (only
// with an ipassmt, since guards cite its ranges); simple_returns keeps
// Return matches to at most one primitive.
struct RandomTableParams {
  int max_chains = 4;
  int max_rules = 30;
  std::vector<std::string> iface_pool = {"eth0", "eth1", "eth2"};
  double unknown_rate = 0.2;
  int addr_width = 8;
  bool simple_returns = false;
  bool with_state = true;
  double guard_rate = 0.5;
};

RulesetTable random_table(std::uint64_t seed, const RandomTableParams& params,
                          const Ipassmt* ipassmt = nullptr);

// 1..2 random blocks per interface, each strictly smaller than the
// universe.
Ipassmt random_ipassmt(std::uint64_t seed,
                       const std::vector<std::string>& ifaces, int width);

}  // namespace nospoof
