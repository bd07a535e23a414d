// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nospoof/model.hpp"

namespace nospoof {

class PreprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flattens 'entry' into a single rule list with no Call or Return actions.
//
// Calls are inlined with the caller's match conjoined onto every inlined
// rule.  A Return with match m makes the rest of its chain reachable only
// under !m: a true match cuts the chain, a single primitive is conjoined
// with its negation flipped, and a compound match is conjoined as one
// opaque primitive rendering !(m).  The entry chain's policy is appended
// as an unconditional final rule, which also gives top-level Returns their
// jump-to-policy meaning.
//
// Throws PreprocessError if 'entry' is missing or has no policy, if a call
// target is missing, or if the call graph is cyclic.
std::vector<Rule> unfold(const RulesetTable& table, const std::string& entry);

// Rewrites Reject to Drop and deletes Log and Empty rules.  Requires a
// Call/Return-free list (throws PreprocessError otherwise); the result
// contains only Accept and Drop actions.
std::vector<Rule> simplify(std::vector<Rule> rules);

// Specializes the list to packets in connection state 'assumed': a state
// primitive satisfied by it is deleted from its rule, one contradicted by
// it deletes the whole rule.  The result is free of state primitives.
std::vector<Rule> apply_state_assumption(std::vector<Rule> rules,
                                         CtState assumed = CtState::New);

// unfold + simplify, then the NEW-state assumption unless disabled.
std::vector<Rule> preprocess(const RulesetTable& table,
                             const std::string& entry,
                             bool assume_new = true);

}  // namespace nospoof
