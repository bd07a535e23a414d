// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include "nospoof/preprocess.hpp"

#include <map>
#include <set>
#include <utility>

#include "nospoof/parser.hpp"

namespace nospoof {

namespace {

MatchExpr conjoin(const std::vector<MatchPrim>& context,
                  const MatchExpr& own) {
  MatchExpr out;
  out.conjuncts = context;
  out.conjuncts.insert(out.conjuncts.end(), own.conjuncts.begin(),
                       own.conjuncts.end());
  return out;
}

MatchPrim negate(const MatchExpr& match) {
  if (match.conjuncts.size() == 1) {
    MatchPrim flipped = match.conjuncts.front();
    flipped.negated = !flipped.negated;
    return flipped;
  }
  return MatchPrim::unknown("!(" + render_match_expr(match) + ")", false);
}

// Resolves each chain into a Call/Return-free body, memoized by name.
// Bodies exclude caller context, so one unfolding serves every call site.
class Unfolder {
 public:
  explicit Unfolder(const RulesetTable& table) : table_(table) {}

  const std::vector<Rule>& body(const std::string& name) {
    if (auto it = memo_.find(name); it != memo_.end()) return it->second;
    if (!visiting_.insert(name).second) {
      throw PreprocessError("call cycle through chain '" + name + "'");
    }
    const Chain* chain = table_.find_chain(name);
    if (!chain) {
      throw PreprocessError("call to undeclared chain '" + name + "'");
    }

    std::vector<Rule> out;
    std::vector<MatchPrim> context;
    for (const Rule& rule : chain->rules) {
      if (rule.action.kind == ActionKind::Return) {
        if (rule.match.is_true()) break;  // nothing below is reachable
        context.push_back(negate(rule.match));
        continue;
      }
      if (rule.action.kind == ActionKind::Call) {
        std::vector<MatchPrim> prefix = context;
        prefix.insert(prefix.end(), rule.match.conjuncts.begin(),
                      rule.match.conjuncts.end());
        for (const Rule& inner : body(rule.action.chain)) {
          out.push_back(Rule{conjoin(prefix, inner.match), inner.action,
                             inner.origin});
        }
        continue;
      }
      out.push_back(Rule{conjoin(context, rule.match), rule.action,
                         rule.origin});
    }

    visiting_.erase(name);
    return memo_.emplace(name, std::move(out)).first->second;
  }

 private:
  const RulesetTable& table_;
  std::map<std::string, std::vector<Rule>> memo_;
  std::set<std::string> visiting_;
};

}  // namespace

std::vector<Rule> unfold(const RulesetTable& table, const std::string& entry) {
  const Chain* chain = table.find_chain(entry);
  if (!chain) {
    throw PreprocessError("entry chain '" + entry + "' not found");
  }
  if (!chain->policy) {
    throw PreprocessError("entry chain '" + entry + "' has no policy");
  }

  Unfolder unfolder(table);
  std::vector<Rule> rules = unfolder.body(entry);
  rules.push_back(Rule{MatchExpr{}, Action{*chain->policy, ""},
                       RuleOrigin{entry, chain->decl_line}});
  return rules;
}

std::vector<Rule> simplify(std::vector<Rule> rules) {
  std::vector<Rule> out;
  out.reserve(rules.size());
  for (Rule& rule : rules) {
    switch (rule.action.kind) {
      case ActionKind::Accept:
        out.push_back(std::move(rule));
        break;
      case ActionKind::Reject:
        rule.action = Action::drop();
        out.push_back(std::move(rule));
        break;
      case ActionKind::Drop:
        out.push_back(std::move(rule));
        break;
      case ActionKind::Log:
      case ActionKind::Empty:
        break;
      case ActionKind::Call:
      case ActionKind::Return:
        throw PreprocessError("simplify requires an unfolded rule list");
    }
  }
  return out;
}

std::vector<Rule> apply_state_assumption(std::vector<Rule> rules,
                                         CtState assumed) {
  std::vector<Rule> out;
  out.reserve(rules.size());
  for (Rule& rule : rules) {
    std::vector<MatchPrim> kept;
    kept.reserve(rule.match.conjuncts.size());
    bool contradicted = false;
    for (MatchPrim& p : rule.match.conjuncts) {
      if (p.kind != MatchPrim::Kind::CtState) {
        kept.push_back(std::move(p));
        continue;
      }
      if (p.states.contains(assumed) == p.negated) {
        contradicted = true;
        break;
      }
    }
    if (contradicted) continue;
    rule.match.conjuncts = std::move(kept);
    out.push_back(std::move(rule));
  }
  return out;
}

std::vector<Rule> preprocess(const RulesetTable& table,
                             const std::string& entry, bool assume_new) {
  std::vector<Rule> rules = simplify(unfold(table, entry));
  if (assume_new) rules = apply_state_assumption(rules, CtState::New);
  return rules;
}

}  // namespace nospoof
