// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include "nospoof/oracle.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "nospoof/certifier.hpp"

namespace nospoof {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

bool UnknownInterp::operator()(std::string_view raw, const SimPacket& p) const {
  std::uint64_t h = 14695981039346656037ULL;
  h = fnv1a(h, raw);
  h = fnv1a(h, p.in_iface);
  h = fnv1a(h, p.protocol);
  h = splitmix64(h ^ p.src_ip);
  h = splitmix64(h ^ (p.dst_ip << 1));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(p.dst_port) << 8) ^
                 static_cast<std::uint64_t>(static_cast<std::uint8_t>(p.state)));
  h = splitmix64(h ^ seed_);
  return (h >> 17) & 1;
}

bool eval_known_prim(const MatchPrim& p, const SimPacket& packet) {
  bool holds = false;
  switch (p.kind) {
    case MatchPrim::Kind::InIface:
      holds = iface_matches(p.text, packet.in_iface);
      break;
    case MatchPrim::Kind::SrcIp:
      holds = p.addrs.contains(packet.src_ip);
      break;
    case MatchPrim::Kind::DstIp:
      holds = p.addrs.contains(packet.dst_ip);
      break;
    case MatchPrim::Kind::Protocol:
      holds = p.text == packet.protocol;
      break;
    case MatchPrim::Kind::DstPort:
      holds = p.port_lo <= packet.dst_port && packet.dst_port <= p.port_hi;
      break;
    case MatchPrim::Kind::CtState:
      holds = p.states.contains(packet.state);
      break;
    case MatchPrim::Kind::Unknown:
      throw std::invalid_argument("opaque primitive has no exact value");
  }
  return holds != p.negated;
}

TableEvaluator::TableEvaluator(const RulesetTable& table,
                               const std::string& entry) {
  chains_.reserve(table.chains.size());
  for (const Chain& chain : table.chains) {
    PreppedChain pc{&chain, {}, total_rules_};
    pc.rules.reserve(chain.rules.size());
    for (const Rule& rule : chain.rules) {
      PreppedRule pr{&rule, -1, {}, {}};
      for (const MatchPrim& prim : rule.match.conjuncts) {
        if (prim.kind == MatchPrim::Kind::Unknown) {
          pr.unknown.push_back(&prim);
        } else {
          pr.known.push_back(&prim);
        }
      }
      pc.rules.push_back(std::move(pr));
      ++total_rules_;
    }
    chains_.push_back(std::move(pc));
  }

  auto index_of = [this](const std::string& name) {
    for (std::size_t i = 0; i < chains_.size(); ++i) {
      if (chains_[i].chain->name == name) return static_cast<int>(i);
    }
    return -1;
  };

  for (PreppedChain& pc : chains_) {
    for (PreppedRule& pr : pc.rules) {
      if (pr.rule->action.kind != ActionKind::Call) continue;
      pr.call_target = index_of(pr.rule->action.chain);
      if (pr.call_target < 0) {
        throw std::runtime_error("call to undeclared chain '" +
                                 pr.rule->action.chain + "'");
      }
    }
  }

  entry_index_ = index_of(entry);
  if (entry_index_ < 0) {
    throw std::invalid_argument("entry chain '" + entry + "' not found");
  }
  const Chain* entry_chain = chains_[entry_index_].chain;
  if (!entry_chain->policy) {
    throw std::invalid_argument("entry chain '" + entry + "' has no policy");
  }
  policy_ = *entry_chain->policy;
}

Verdict TableEvaluator::walk(const SimPacket& p, const UnknownInterp& f,
                             const std::vector<signed char>& known_cache)
    const {
  struct Frame {
    int chain;
    std::size_t next;
  };
  std::vector<Frame> frames;
  frames.reserve(chains_.size());
  std::vector<signed char> on_stack(chains_.size(), 0);

  frames.push_back({entry_index_, 0});
  on_stack[entry_index_] = 1;
  while (!frames.empty()) {
    Frame& fr = frames.back();
    const PreppedChain& pc = chains_[fr.chain];
    if (fr.next >= pc.rules.size()) {
      on_stack[fr.chain] = 0;
      frames.pop_back();
      continue;
    }
    const std::size_t idx = fr.next++;
    const PreppedRule& pr = pc.rules[idx];
    if (!known_cache[pc.first_flat + idx]) continue;
    bool matched = true;
    for (const MatchPrim* prim : pr.unknown) {
      if (f(prim->text, p) == prim->negated) {
        matched = false;
        break;
      }
    }
    if (!matched) continue;

    switch (pr.rule->action.kind) {
      case ActionKind::Accept:
        return Verdict::Accept;
      case ActionKind::Drop:
      case ActionKind::Reject:
        return Verdict::Drop;
      case ActionKind::Log:
      case ActionKind::Empty:
        break;
      case ActionKind::Return:
        on_stack[fr.chain] = 0;
        frames.pop_back();
        break;
      case ActionKind::Call: {
        const int target = pr.call_target;
        if (on_stack[target]) {
          throw std::runtime_error("call cycle through chain '" +
                                   chains_[target].chain->name + "'");
        }
        frames.push_back({target, 0});
        on_stack[target] = 1;
        break;
      }
    }
  }
  return policy_ == ActionKind::Accept ? Verdict::Accept : Verdict::Drop;
}

Verdict TableEvaluator::simulate_one(const SimPacket& p,
                                     const UnknownInterp& f) const {
  std::vector<UnknownInterp> one{f};
  std::vector<Verdict> out;
  simulate_multi(p, one, out);
  return out.front();
}

void TableEvaluator::simulate_multi(const SimPacket& p,
                                    const std::vector<UnknownInterp>& interps,
                                    std::vector<Verdict>& out) const {
  std::vector<signed char> known_cache(total_rules_, 1);
  std::size_t flat = 0;
  for (const PreppedChain& pc : chains_) {
    for (const PreppedRule& pr : pc.rules) {
      for (const MatchPrim* prim : pr.known) {
        if (!eval_known_prim(*prim, p)) {
          known_cache[flat] = 0;
          break;
        }
      }
      ++flat;
    }
  }

  out.clear();
  out.reserve(interps.size());
  for (const UnknownInterp& f : interps) {
    out.push_back(walk(p, f, known_cache));
  }
}

Verdict simulate(const RulesetTable& table, const std::string& entry,
                 const SimPacket& p, const UnknownInterp& f) {
  return TableEvaluator(table, entry).simulate_one(p, f);
}

FlatEvaluator::FlatEvaluator(const std::vector<Rule>& rules) {
  rules_.reserve(rules.size());
  for (const Rule& rule : rules) {
    if (rule.action.kind != ActionKind::Accept &&
        rule.action.kind != ActionKind::Drop) {
      throw std::invalid_argument(
          "flat evaluation requires a preprocessed rule list");
    }
    PreppedRule pr{&rule, rule.action.kind == ActionKind::Accept, {}, {}};
    for (const MatchPrim& prim : rule.match.conjuncts) {
      if (prim.kind == MatchPrim::Kind::Unknown) {
        pr.unknown.push_back(&prim);
      } else {
        pr.known.push_back(&prim);
      }
    }
    rules_.push_back(std::move(pr));
  }
}

void FlatEvaluator::first_match_multi(const SimPacket& p,
                                      const std::vector<UnknownInterp>& interps,
                                      std::vector<FirstMatch>& out) const {
  out.assign(interps.size(), FirstMatch{});
  std::size_t undecided = interps.size();
  for (std::size_t k = 0; k < rules_.size() && undecided > 0; ++k) {
    const PreppedRule& pr = rules_[k];
    bool known_ok = true;
    for (const MatchPrim* prim : pr.known) {
      if (!eval_known_prim(*prim, p)) {
        known_ok = false;
        break;
      }
    }
    if (!known_ok) continue;

    if (pr.unknown.empty()) {
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (out[j].index == FirstMatch::npos) out[j] = {k, pr.accept};
      }
      return;
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (out[j].index != FirstMatch::npos) continue;
      bool matched = true;
      for (const MatchPrim* prim : pr.unknown) {
        if (interps[j](prim->text, p) == prim->negated) {
          matched = false;
          break;
        }
      }
      if (matched) {
        out[j] = {k, pr.accept};
        --undecided;
      }
    }
  }
}

namespace {

void scan_prims(const std::vector<Rule>& rules, int width,
                std::set<std::uint64_t>& dsts, bool& any_dst,
                bool& any_state, std::set<std::uint16_t>& ports) {
  const std::uint64_t max = universe_max(width);
  for (const Rule& rule : rules) {
    for (const MatchPrim& p : rule.match.conjuncts) {
      switch (p.kind) {
        case MatchPrim::Kind::DstIp:
          any_dst = true;
          for (const Interval& iv : p.addrs.intervals()) {
            dsts.insert(iv.lo);
            dsts.insert(iv.hi);
            if (iv.hi < max) dsts.insert(iv.hi + 1);
          }
          break;
        case MatchPrim::Kind::DstPort:
          ports.insert(p.port_lo);
          ports.insert(p.port_hi);
          if (p.port_hi < 65535) {
            ports.insert(static_cast<std::uint16_t>(p.port_hi + 1));
          }
          break;
        case MatchPrim::Kind::CtState:
          any_state = true;
          break;
        default:
          break;
      }
    }
  }
}

PacketSpace build_space(std::set<std::uint64_t>& dsts, bool any_dst,
                        bool any_state, std::set<std::uint16_t>& ports,
                        int width) {
  PacketSpace space;
  if (any_dst) {
    dsts.insert(0);
    dsts.insert(universe_max(width));
    space.dsts.assign(dsts.begin(), dsts.end());
  } else {
    space.dsts = {0};
  }
  space.protocols = {"tcp", "udp", "icmp"};
  for (std::uint16_t sentinel : {0, 1, 21, 22, 53, 80, 443, 65535}) {
    ports.insert(sentinel);
  }
  space.ports.assign(ports.begin(), ports.end());
  if (any_state) {
    space.states = {CtState::New, CtState::Established, CtState::Related,
                    CtState::Invalid, CtState::Untracked};
  } else {
    space.states = {CtState::New};
  }
  return space;
}

}  // namespace

PacketSpace PacketSpace::from_rules(const std::vector<Rule>& rules,
                                    int width) {
  std::set<std::uint64_t> dsts;
  std::set<std::uint16_t> ports;
  bool any_dst = false;
  bool any_state = false;
  scan_prims(rules, width, dsts, any_dst, any_state, ports);
  return build_space(dsts, any_dst, any_state, ports, width);
}

PacketSpace PacketSpace::from_table(const RulesetTable& table, int width) {
  std::set<std::uint64_t> dsts;
  std::set<std::uint16_t> ports;
  bool any_dst = false;
  bool any_state = false;
  for (const Chain& chain : table.chains) {
    scan_prims(chain.rules, width, dsts, any_dst, any_state, ports);
  }
  return build_space(dsts, any_dst, any_state, ports, width);
}

std::vector<SrcStats> flat_src_stats(const std::vector<Rule>& rules,
                                     std::string_view iface,
                                     const PacketSpace& space,
                                     const std::vector<UnknownInterp>& interps,
                                     int width) {
  if (width > 16) {
    throw std::invalid_argument("enumeration refused beyond width 16");
  }
  const std::uint64_t n_src = universe_max(width) + 1;
  std::vector<SrcStats> stats(n_src);
  FlatEvaluator eval(rules);
  std::vector<FlatEvaluator::FirstMatch> fm;

  SimPacket p;
  p.in_iface = std::string(iface);
  for (std::uint64_t src = 0; src < n_src; ++src) {
    p.src_ip = src;
    SrcStats& st = stats[src];
    for (std::uint64_t dst : space.dsts) {
      p.dst_ip = dst;
      for (const std::string& proto : space.protocols) {
        p.protocol = proto;
        for (std::uint16_t port : space.ports) {
          p.dst_port = port;
          for (CtState state : space.states) {
            p.state = state;
            eval.first_match_multi(p, interps, fm);
            for (const auto& m : fm) {
              st.any_sample = true;
              if (m.index == FlatEvaluator::FirstMatch::npos) {
                st.all_matched = false;
                continue;
              }
              st.max_match_k = std::max(st.max_match_k, m.index);
              if (m.accept) {
                st.min_accept_k = std::min(st.min_accept_k, m.index);
                st.all_matched_drop = false;
              }
            }
          }
        }
      }
    }
  }
  return stats;
}

ExactSets exact_sets(const std::vector<Rule>& prefix, std::string_view iface,
                     const std::vector<UnknownInterp>& interps, int width) {
  PacketSpace space = PacketSpace::from_rules(prefix, width);
  std::vector<SrcStats> stats =
      flat_src_stats(prefix, iface, space, interps, width);

  ExactSets out{IntervalSet::empty_set(width),
                std::vector<bool>(stats.size(), false)};
  std::vector<Interval> accepted_runs;
  for (std::uint64_t src = 0; src < stats.size(); ++src) {
    const SrcStats& st = stats[src];
    out.denied_all[src] =
        st.any_sample && st.all_matched && st.all_matched_drop;
    if (st.min_accept_k == SrcStats::npos) continue;
    if (!accepted_runs.empty() && accepted_runs.back().hi + 1 == src) {
      accepted_runs.back().hi = src;
    } else {
      accepted_runs.push_back(Interval{src, src});
    }
  }
  out.a_lower = IntervalSet::from_intervals(width, accepted_runs);
  return out;
}

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool chance(double p) {
    return below(1000000) < static_cast<std::uint64_t>(p * 1000000);
  }

 private:
  std::mt19937_64 engine_;
};

IntervalSet random_cidr_set(Rng& rng, int width) {
  auto one_block = [&rng, width] {
    int plen =
        1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(width)));
    std::uint64_t base = rng.next() & universe_max(width);
    base &= ~((std::uint64_t{1} << (width - plen)) - 1);
    return IntervalSet::from_cidr(Cidr(base, plen, width));
  };
  IntervalSet set = one_block();
  if (rng.chance(0.2)) set = set | one_block();
  return set;
}

const char* const kUnknownRaws[] = {
    "--foo", "--bar baz", "--mark 7", "--u32 4=0x1", "--opt alpha 2",
};

MatchPrim random_prim(Rng& rng, const RandomTableParams& params,
                      const std::vector<IntervalSet>& src_pool,
                      const std::vector<IntervalSet>& dst_pool) {
  if (rng.chance(params.unknown_rate)) {
    std::string raw = kUnknownRaws[rng.below(std::size(kUnknownRaws))];
    return MatchPrim::unknown(std::move(raw), rng.chance(0.2));
  }

  static const std::uint16_t kPortPool[] = {0, 1, 21, 22, 53, 80, 443, 65535};
  const bool neg = rng.chance(0.25);
  // Source matches dominate: this is the fragment certification reads.
  std::uint64_t roll = rng.below(params.with_state ? 100 : 90);
  if (roll < 28) {
    std::string name =
        params.iface_pool[rng.below(params.iface_pool.size())];
    std::uint64_t variant = rng.below(20);
    if (variant < 3 && !name.empty()) {
      name.back() = '+';
    } else if (variant == 3) {
      name = "wan0";
    }
    return MatchPrim::in_iface(std::move(name), rng.chance(0.15));
  }
  if (roll < 62) {
    return MatchPrim::src_ip(src_pool[rng.below(src_pool.size())], neg);
  }
  if (roll < 70) {
    return MatchPrim::dst_ip(dst_pool[rng.below(dst_pool.size())], neg);
  }
  if (roll < 82) {
    static const char* const kProtos[] = {"tcp", "udp", "icmp"};
    return MatchPrim::protocol(kProtos[rng.below(3)], neg);
  }
  if (roll < 90) {
    std::uint16_t a = kPortPool[rng.below(std::size(kPortPool))];
    if (rng.chance(0.7)) return MatchPrim::dst_port(a, a, neg);
    std::uint16_t b = kPortPool[rng.below(std::size(kPortPool))];
    return MatchPrim::dst_port(std::min(a, b), std::max(a, b), neg);
  }
  CtStateSet states;
  std::uint64_t kind = rng.below(4);
  if (kind == 0) {
    states.insert(CtState::New);
  } else if (kind < 3) {
    states.insert(CtState::Established);
    if (rng.chance(0.5)) states.insert(CtState::Related);
  } else {
    states.bits = static_cast<std::uint8_t>(1 + rng.below(31));
  }
  return MatchPrim::ct_state(states, neg);
}

}  // namespace

Ipassmt random_ipassmt(std::uint64_t seed,
                       const std::vector<std::string>& ifaces, int width) {
  Rng rng(splitmix64(seed ^ 0x69706173736d74ULL));
  Ipassmt out;
  const int max_plen = std::min(6, width);
  for (const std::string& iface : ifaces) {
    IntervalSet set = IntervalSet::empty_set(width);
    const int blocks = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < blocks; ++k) {
      int plen = 1 + static_cast<int>(rng.below(max_plen));
      std::uint64_t base = rng.next() & universe_max(width);
      base &= ~((std::uint64_t{1} << (width - plen)) - 1);
      IntervalSet next =
          set | IntervalSet::from_cidr(Cidr(base, plen, width));
      if (next == IntervalSet::universe(width) && !is_empty(set)) break;
      set = std::move(next);
    }
    out.entries.emplace_back(iface, std::move(set));
  }
  return out;
}

RulesetTable random_table(std::uint64_t seed, const RandomTableParams& params,
                          const Ipassmt* ipassmt) {
  Rng rng(splitmix64(seed));
  const int width = params.addr_width;

  RulesetTable table;
  table.name = "filter";
  const int n_chains =
      1 + static_cast<int>(rng.below(std::max(1, params.max_chains)));
  {
    Chain entry;
    entry.name = "FORWARD";
    entry.policy = rng.chance(0.5) ? ActionKind::Accept : ActionKind::Drop;
    entry.decl_line = 1;
    table.chains.push_back(std::move(entry));
  }
  for (int c = 1; c < n_chains; ++c) {
    Chain chain;
    chain.name = "c" + std::to_string(c);
    chain.decl_line = 1 + c;
    table.chains.push_back(std::move(chain));
  }

  std::vector<IntervalSet> src_pool;
  std::vector<IntervalSet> dst_pool;
  for (int k = 0; k < 4; ++k) src_pool.push_back(random_cidr_set(rng, width));
  for (int k = 0; k < 3; ++k) dst_pool.push_back(random_cidr_set(rng, width));
  if (ipassmt) {
    for (const auto& [iface, set] : ipassmt->entries) {
      if (!is_empty(set)) src_pool.push_back(set);
    }
  }

  int line = 10;
  int used = 0;
  if (ipassmt) {
    for (const auto& [iface, set] : ipassmt->entries) {
      if (!rng.chance(params.guard_rate)) continue;
      MatchExpr m;
      m.conjuncts.push_back(MatchPrim::in_iface(iface, false));
      m.conjuncts.push_back(MatchPrim::src_ip(set, true));
      if (rng.chance(0.15)) {
        m.conjuncts.push_back(MatchPrim::unknown("--foo", false));
      }
      table.chains[0].rules.push_back(
          Rule{std::move(m), Action::drop(), RuleOrigin{"FORWARD", line++}});
      ++used;
    }
  }

  const int floor = std::min(4, params.max_rules);
  int target = floor + static_cast<int>(rng.below(
                           static_cast<std::uint64_t>(
                               params.max_rules - floor + 1)));
  for (; used < target; ++used) {
    const std::size_t chain_idx =
        (n_chains == 1 || rng.chance(0.4))
            ? 0
            : 1 + rng.below(static_cast<std::uint64_t>(n_chains - 1));
    Chain& chain = table.chains[chain_idx];

    Action action = Action::accept();
    const std::uint64_t roll = rng.below(100);
    const bool can_call = chain_idx + 1 < table.chains.size();
    if (roll < 30) {
      action = Action::accept();
    } else if (roll < 60) {
      action = Action::drop();
    } else if (roll < 72 && can_call) {
      const std::size_t target_idx =
          chain_idx + 1 +
          rng.below(static_cast<std::uint64_t>(table.chains.size() -
                                               chain_idx - 1));
      action = Action::call(table.chains[target_idx].name);
    } else if (roll < 80) {
      action = Action::ret();
    } else if (roll < 86) {
      action = Action::reject();
    } else if (roll < 93) {
      action = Action::log();
    } else {
      action = Action::empty();
    }

    std::uint64_t size_roll = rng.below(100);
    int n_prims = size_roll < 15 ? 0 : size_roll < 50 ? 1 : size_roll < 85 ? 2 : 3;
    if (action.kind == ActionKind::Return && params.simple_returns) {
      n_prims = std::min(n_prims, 1);
    }
    MatchExpr m;
    for (int k = 0; k < n_prims; ++k) {
      m.conjuncts.push_back(random_prim(rng, params, src_pool, dst_pool));
    }
    chain.rules.push_back(
        Rule{std::move(m), std::move(action), RuleOrigin{chain.name, line++}});
  }

  return table;
}

}  // namespace nospoof
