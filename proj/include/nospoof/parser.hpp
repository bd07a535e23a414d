// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors
/** @file
    Parser for the iptables-save subset grammar and for the ipassmt
    (interface -> address range) file, plus the inverse rendering used by
    dump output and round-trip tests.

    Recognized rule-spec options: -i, -s/--source/--src, -d/--destination/
    --dst, -p/--protocol, --dport, -m state --state L, -m conntrack
    --ctstate L, prefix ! negation, -j targets. Every unrecognized option
    swallows itself plus its arguments (up to the next token starting with
    '-' or '!') into one Unknown primitive, with a warning.

    Errors abort a parse with no partial output; addresses parse at a
    configurable bit width so the 8-bit simulator fixtures share this
    grammar (plain-integer addresses, e.g. "-s 192/6").
*/

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nospoof/model.hpp"

namespace nospoof {

struct ParseDiagnostic {
  enum class Severity { Warn, Error };

  Severity severity = Severity::Error;
  int line = 0;
  std::string message;

  /// "<severity>:<line>: <message>"
  std::string to_string() const;
};

bool has_error(const std::vector<ParseDiagnostic>& diagnostics);

struct SaveParseResult {
  std::vector<RulesetTable> tables;  // empty unless ok
  std::vector<ParseDiagnostic> diagnostics;
  bool ok = false;
};

/// Parses an iptables-save dump (subset grammar): `*<table>`,
/// `:<CHAIN> <POLICY|-> [counters]`, `-A <CHAIN> <rule-spec>`, `COMMIT`,
/// and `#` comment lines.
SaveParseResult parse_save(std::string_view text, int addr_width = 32);

struct RuleSpecResult {
  // set on success
  std::optional<MatchExpr> match;
  Action action;
  std::vector<std::string> warnings;
  // set on failure
  std::optional<std::string> error;
};

/// Parses one whitespace-tokenized rule specification (the part of an
/// `-A` line after the chain name).
RuleSpecResult parse_rule_spec(const std::vector<std::string>& tokens,
                               int addr_width = 32);

struct IpassmtParseResult {
  std::optional<Ipassmt> ipassmt;
  std::vector<ParseDiagnostic> diagnostics;
  bool ok = false;
};

/// Parses an ipassmt file: one `<iface> = <cidr>[,<cidr>]*` per line,
/// `#` comments. The set of an interface is the union of its CIDRs.
IpassmtParseResult parse_ipassmt(std::string_view text, int addr_width = 32);

/// Renders a match expression in rule-spec syntax. Unknown primitives
/// reproduce their raw text byte-exactly.
std::string render_match_expr(const MatchExpr& expr);

/// Renders "<match-spec> -j TARGET"; the Empty action renders no -j and
/// the unconditionally-true match renders no match tokens.
std::string render_rule_spec(const Rule& rule);

std::vector<std::string> tokenize_ws(std::string_view text);

}  // namespace nospoof
