// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>
#include <vector>

#include "doctest.h"
#include "nospoof/oracle.hpp"
#include "nospoof/parser.hpp"
#include "nospoof/preprocess.hpp"

using namespace nospoof;

namespace {

RulesetTable load(const std::string& text, int width = 32) {
  SaveParseResult r = parse_save(text, width);
  REQUIRE(r.ok);
  REQUIRE(r.tables.size() == 1);
  return r.tables[0];
}

std::vector<std::string> rendered(const std::vector<Rule>& rules) {
  std::vector<std::string> out;
  out.reserve(rules.size());
  for (const Rule& rule : rules) out.push_back(render_rule_spec(rule));
  return out;
}

std::vector<RuleOrigin> origins(const std::vector<Rule>& rules) {
  std::vector<RuleOrigin> out;
  out.reserve(rules.size());
  for (const Rule& rule : rules) out.push_back(rule.origin);
  return out;
}

}  // namespace

TEST_CASE("unfold appends the policy as an unconditional tail") {
  RulesetTable t = load(
      "*filter\n"
      ":FORWARD ACCEPT\n"
      "-A FORWARD -s 10.0.0.0/8 -j DROP\n"
      "COMMIT\n");
  std::vector<Rule> flat = unfold(t, "FORWARD");
  CHECK(rendered(flat) == std::vector<std::string>{
                              "-s 10.0.0.0/8 -j DROP",
                              "-j ACCEPT",
                          });
  CHECK(origins(flat) == std::vector<RuleOrigin>{
                             {"FORWARD", 3},
                             {"FORWARD", 2},
                         });
}

TEST_CASE("unfold conjoins the call-site match onto inlined rules") {
  RulesetTable t = load(
      "*filter\n"
      ":FORWARD DROP\n"
      ":app -\n"
      "-A FORWARD -i eth0 -j app\n"
      "-A FORWARD -j ACCEPT\n"
      "-A app -s 10.0.0.0/8 -j ACCEPT\n"
      "-A app -j DROP\n"
      "COMMIT\n");
  std::vector<Rule> flat = unfold(t, "FORWARD");
  CHECK(rendered(flat) == std::vector<std::string>{
                              "-i eth0 -s 10.0.0.0/8 -j ACCEPT",
                              "-i eth0 -j DROP",
                              "-j ACCEPT",
                              "-j DROP",
                          });
  // Inlined rules keep the origin of the rule inside the called chain.
  CHECK(origins(flat) == std::vector<RuleOrigin>{
                             {"app", 6},
                             {"app", 7},
                             {"FORWARD", 5},
                             {"FORWARD", 2},
                         });
}

TEST_CASE("unfold handles nested calls and repeated call sites") {
  RulesetTable t = load(
      "*filter\n"
      ":FORWARD ACCEPT\n"
      ":outer -\n"
      ":inner -\n"
      "-A FORWARD -i eth0 -j outer\n"
      "-A FORWARD -i eth1 -j outer\n"
      "-A outer -p tcp -j inner\n"
      "-A inner -s 10.0.0.0/8 -j DROP\n"
      "COMMIT\n");
  std::vector<Rule> flat = unfold(t, "FORWARD");
  CHECK(rendered(flat) == std::vector<std::string>{
                              "-i eth0 -p tcp -s 10.0.0.0/8 -j DROP",
                              "-i eth1 -p tcp -s 10.0.0.0/8 -j DROP",
                              "-j ACCEPT",
                          });
}

TEST_CASE("unfold turns Return into reachability constraints") {
  SUBCASE("single primitive flips") {
    RulesetTable t = load(
        "*filter\n"
        ":FORWARD ACCEPT\n"
        ":app -\n"
        "-A FORWARD -j app\n"
        "-A app -s 10.0.0.0/8 -j RETURN\n"
        "-A app -j DROP\n"
        "COMMIT\n");
    CHECK(rendered(unfold(t, "FORWARD")) == std::vector<std::string>{
                                                "! -s 10.0.0.0/8 -j DROP",
                                                "-j ACCEPT",
                                            });
  }
  SUBCASE("negated single primitive flips back") {
    RulesetTable t = load(
        "*filter\n"
        ":FORWARD ACCEPT\n"
        ":app -\n"
        "-A FORWARD -j app\n"
        "-A app ! -s 10.0.0.0/8 -j RETURN\n"
        "-A app -j DROP\n"
        "COMMIT\n");
    CHECK(rendered(unfold(t, "FORWARD")) == std::vector<std::string>{
                                                "-s 10.0.0.0/8 -j DROP",
                                                "-j ACCEPT",
                                            });
  }
  SUBCASE("unconditional Return cuts the chain") {
    RulesetTable t = load(
        "*filter\n"
        ":FORWARD ACCEPT\n"
        ":app -\n"
        "-A FORWARD -j app\n"
        "-A app -j RETURN\n"
        "-A app -j DROP\n"
        "COMMIT\n");
    CHECK(rendered(unfold(t, "FORWARD")) == std::vector<std::string>{
                                                "-j ACCEPT",
                                            });
  }
  SUBCASE("top-level Return jumps to the policy") {
    RulesetTable t = load(
        "*filter\n"
        ":FORWARD DROP\n"
        "-A FORWARD -s 10.0.0.0/8 -j RETURN\n"
        "-A FORWARD -j ACCEPT\n"
        "COMMIT\n");
    CHECK(rendered(unfold(t, "FORWARD")) == std::vector<std::string>{
                                                "! -s 10.0.0.0/8 -j ACCEPT",
                                                "-j DROP",
                                            });
  }
  SUBCASE("compound match becomes one opaque negation") {
    RulesetTable t = load(
        "*filter\n"
        ":FORWARD ACCEPT\n"
        ":app -\n"
        "-A FORWARD -j app\n"
        "-A app -i eth0 -s 10.0.0.0/8 -j RETURN\n"
        "-A app -j DROP\n"
        "COMMIT\n");
    std::vector<Rule> flat = unfold(t, "FORWARD");
    REQUIRE(flat.size() == 2);
    REQUIRE(flat[0].match.conjuncts.size() == 1);
    const MatchPrim& p = flat[0].match.conjuncts[0];
    CHECK(p.kind == MatchPrim::Kind::Unknown);
    CHECK(!p.negated);
    CHECK(p.text == "!(-i eth0 -s 10.0.0.0/8)");
  }
}

TEST_CASE("unfold error conditions") {
  RulesetTable t = load(
      "*filter\n"
      ":FORWARD ACCEPT\n"
      ":orphan -\n"
      "COMMIT\n");
  CHECK_THROWS_AS(unfold(t, "nosuch"), PreprocessError);
  CHECK_THROWS_AS(unfold(t, "orphan"), PreprocessError);  // no policy

  RulesetTable cyclic = load(
      "*filter\n"
      ":FORWARD ACCEPT\n"
      ":a -\n"
      ":b -\n"
      "-A FORWARD -j a\n"
      "-A a -j b\n"
      "-A b -j a\n"
      "COMMIT\n");
  CHECK_THROWS_AS(unfold(cyclic, "FORWARD"), PreprocessError);

  RulesetTable ghost{"filter", {}};
  Chain fwd;
  fwd.name = "FORWARD";
  fwd.policy = ActionKind::Accept;
  fwd.decl_line = 1;
  fwd.rules.push_back(Rule{MatchExpr{}, Action::call("ghost"),
                           RuleOrigin{"FORWARD", 2}});
  ghost.chains.push_back(fwd);
  CHECK_THROWS_AS(unfold(ghost, "FORWARD"), PreprocessError);
}

TEST_CASE("simplify rewrites Reject and deletes Log and Empty") {
  std::vector<Rule> rules = {
      Rule{MatchExpr{}, Action::log(), {"c", 1}},
      Rule{MatchExpr{{MatchPrim::in_iface("eth0")}}, Action::reject(),
           {"c", 2}},
      Rule{MatchExpr{}, Action::empty(), {"c", 3}},
      Rule{MatchExpr{}, Action::accept(), {"c", 4}},
  };
  std::vector<Rule> out = simplify(rules);
  REQUIRE(out.size() == 2);
  CHECK(out[0].action == Action::drop());
  CHECK(out[0].match == MatchExpr{{MatchPrim::in_iface("eth0")}});
  CHECK(out[0].origin == RuleOrigin{"c", 2});
  CHECK(out[1].action == Action::accept());

  CHECK_THROWS_AS(
      simplify({Rule{MatchExpr{}, Action::call("x"), {"c", 1}}}),
      PreprocessError);
  CHECK_THROWS_AS(simplify({Rule{MatchExpr{}, Action::ret(), {"c", 1}}}),
                  PreprocessError);
}

TEST_CASE("state assumption specializes the list") {
  CtStateSet just_new;
  just_new.insert(CtState::New);
  CtStateSet est;
  est.insert(CtState::Established);

  std::vector<Rule> rules = {
      // satisfied: primitive disappears, the rest of the rule stays
      Rule{MatchExpr{{MatchPrim::ct_state(just_new),
                      MatchPrim::in_iface("eth0")}},
           Action::accept(),
           {"c", 1}},
      // contradicted: whole rule disappears
      Rule{MatchExpr{{MatchPrim::ct_state(est)}}, Action::accept(), {"c", 2}},
      // negated and contradicted
      Rule{MatchExpr{{MatchPrim::ct_state(just_new, true)}}, Action::drop(),
           {"c", 3}},
      // negated and satisfied
      Rule{MatchExpr{{MatchPrim::ct_state(est, true)}}, Action::drop(),
           {"c", 4}},
      // no state primitive: untouched
      Rule{MatchExpr{{MatchPrim::in_iface("eth1")}}, Action::drop(), {"c", 5}},
  };
  std::vector<Rule> out = apply_state_assumption(rules, CtState::New);
  REQUIRE(out.size() == 3);
  CHECK(out[0].match == MatchExpr{{MatchPrim::in_iface("eth0")}});
  CHECK(out[0].origin == RuleOrigin{"c", 1});
  CHECK(out[1].match == MatchExpr{});
  CHECK(out[1].origin == RuleOrigin{"c", 4});
  CHECK(out[2].origin == RuleOrigin{"c", 5});

  std::vector<Rule> est_out =
      apply_state_assumption(rules, CtState::Established);
  REQUIRE(est_out.size() == 3);
  CHECK(est_out[0].origin == RuleOrigin{"c", 2});
  CHECK(est_out[1].origin == RuleOrigin{"c", 3});
  CHECK(est_out[2].origin == RuleOrigin{"c", 5});
}

TEST_CASE("preprocess composes unfold, simplify, and the NEW assumption") {
  RulesetTable t = load(
      "*filter\n"
      ":FORWARD DROP\n"
      ":guard -\n"
      ":service -\n"
      "-A FORWARD -i eth0 -j guard\n"
      "-A FORWARD -p tcp -j service\n"
      "-A guard ! -s 10.0.0.0/8 -j DROP\n"
      "-A guard -m state --state NEW -j LOG\n"
      "-A guard -s 10.9.9.0/24 -j RETURN\n"
      "-A guard -j ACCEPT\n"
      "-A service -p tcp --dport 443 -j ACCEPT\n"
      "COMMIT\n");

  std::vector<Rule> flat = preprocess(t, "FORWARD");
  CHECK(rendered(flat) == std::vector<std::string>{
                              "-i eth0 ! -s 10.0.0.0/8 -j DROP",
                              "-i eth0 ! -s 10.9.9.0/24 -j ACCEPT",
                              "-p tcp -p tcp --dport 443 -j ACCEPT",
                              "-j DROP",
                          });

  CHECK(preprocess(t, "FORWARD", false) == simplify(unfold(t, "FORWARD")));
  CHECK(preprocess(t, "FORWARD", true) ==
        apply_state_assumption(simplify(unfold(t, "FORWARD"))));
}

TEST_CASE("flattening preserves packet verdicts on random tables") {
  // Ground truth: walking the original chain structure and first-match over
  // the flattened list must agree packet for packet, for any interpretation
  // of the opaque primitives.  Compound Return matches are excluded (their
  // negation is a fresh opaque primitive, deliberately uncorrelated), so the
  // generator is pinned to single-primitive Returns.
  RandomTableParams params;
  params.addr_width = 8;
  params.simple_returns = true;
  params.unknown_rate = 0.25;
  params.guard_rate = 0.3;

  std::vector<UnknownInterp> interps;
  for (std::uint64_t s = 0; s < 3; ++s) interps.emplace_back(0x9000 + s);

  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CAPTURE(seed);
    Ipassmt ipassmt = random_ipassmt(seed, params.iface_pool, 8);
    RulesetTable t = random_table(seed, params, &ipassmt);

    std::vector<Rule> flat = simplify(unfold(t, "FORWARD"));
    std::vector<Rule> flat_new = apply_state_assumption(flat);
    TableEvaluator te(t, "FORWARD");
    FlatEvaluator fe(flat);
    FlatEvaluator fe_new(flat_new);
    PacketSpace space = PacketSpace::from_table(t, 8);

    int mismatches = 0;
    std::string first_bad;
    std::vector<Verdict> want;
    std::vector<FlatEvaluator::FirstMatch> got, got_new;
    for (const std::string& iface : params.iface_pool) {
      for (std::uint64_t src = 0; src < 256; src += 13) {
        for (std::uint64_t dst : space.dsts) {
          for (const std::string& proto : space.protocols) {
            for (std::uint16_t port : space.ports) {
              for (CtState state : space.states) {
                SimPacket p{iface, src, dst, proto, port, state};
                te.simulate_multi(p, interps, want);
                fe.first_match_multi(p, interps, got);
                fe_new.first_match_multi(p, interps, got_new);
                for (std::size_t j = 0; j < interps.size(); ++j) {
                  bool w = want[j] == Verdict::Accept;
                  bool ok = got[j].index != FlatEvaluator::FirstMatch::npos &&
                            got[j].accept == w;
                  if (state == CtState::New) {
                    ok = ok && got_new[j].accept == w;
                  }
                  if (!ok) {
                    if (++mismatches == 1) {
                      first_bad = iface + " src=" + std::to_string(src) +
                                  " dst=" + std::to_string(dst) + " " + proto +
                                  ":" + std::to_string(port) + " interp " +
                                  std::to_string(j);
                    }
                  }
                  ++checked;
                }
              }
            }
          }
        }
      }
    }
    CAPTURE(first_bad);
    CHECK(mismatches == 0);
  }
  // Guards against a degenerate packet space silently passing the test.
  CHECK(checked > 100000);
}
