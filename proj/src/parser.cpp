// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include "nospoof/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace nospoof {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool parse_port(std::string_view text, std::uint16_t& out) {
  if (text.empty()) return false;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v > 65535) {
    return false;
  }
  out = static_cast<std::uint16_t>(v);
  return true;
}

bool parse_port_range(std::string_view text, std::uint16_t& lo,
                      std::uint16_t& hi) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    if (!parse_port(text, lo)) return false;
    hi = lo;
    return true;
  }
  return parse_port(text.substr(0, colon), lo) &&
         parse_port(text.substr(colon + 1), hi) && lo <= hi;
}

bool parse_state_list(std::string_view text, CtStateSet& out) {
  if (text.empty()) return false;
  while (true) {
    auto comma = text.find(',');
    std::string_view name =
        comma == std::string_view::npos ? text : text.substr(0, comma);
    auto state = ct_state_from_name(name);
    if (!state) return false;
    out.insert(*state);
    if (comma == std::string_view::npos) return true;
    text.remove_prefix(comma + 1);
  }
}

// Splits input into lines, tolerating trailing CR.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line =
        nl == std::string_view::npos ? text : text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

}  // namespace

std::vector<std::string> tokenize_ws(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string ParseDiagnostic::to_string() const {
  std::ostringstream out;
  out << (severity == Severity::Warn ? "warn" : "error") << ':' << line
      << ": " << message;
  return out.str();
}

bool has_error(const std::vector<ParseDiagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const ParseDiagnostic& d) {
                       return d.severity == ParseDiagnostic::Severity::Error;
                     });
}

RuleSpecResult parse_rule_spec(const std::vector<std::string>& tokens,
                               int addr_width) {
  RuleSpecResult result;
  MatchExpr expr;
  Action action = Action::empty();
  bool action_seen = false;
  bool pending_neg = false;
  int src_count = 0;
  int iface_count = 0;

  auto fail = [&result](std::string message) {
    result.error = std::move(message);
    return result;
  };
  auto take_neg = [&pending_neg] {
    bool n = pending_neg;
    pending_neg = false;
    return n;
  };

  std::size_t i = 0;
  const std::size_t n = tokens.size();
  while (i < n) {
    const std::string& tok = tokens[i];

    if (tok == "!") {
      if (pending_neg) return fail("double negation");
      pending_neg = true;
      ++i;
      if (i >= n) return fail("dangling '!' at end of rule");
      continue;
    }

    if (tok == "-g") return fail("goto (-g) is unsupported");

    if (tok == "-j") {
      if (pending_neg) return fail("'!' cannot negate -j");
      if (action_seen) return fail("duplicate -j");
      if (i + 1 >= n) return fail("missing -j target");
      const std::string& target = tokens[i + 1];
      i += 2;
      if (target == "ACCEPT") {
        action = Action::accept();
      } else if (target == "DROP") {
        action = Action::drop();
      } else if (target == "REJECT") {
        action = Action::reject();
        // Reject collapses to Drop later; the ICMP type is irrelevant.
        if (i < n && tokens[i] == "--reject-with") {
          if (i + 1 >= n) return fail("missing argument to --reject-with");
          i += 2;
        }
      } else if (target == "LOG") {
        action = Action::log();
      } else if (target == "RETURN") {
        action = Action::ret();
      } else {
        action = Action::call(target);
      }
      action_seen = true;
      continue;
    }

    if (tok == "-i") {
      if (++iface_count > 1) return fail("duplicate -i");
      if (i + 1 >= n) return fail("missing argument to -i");
      expr.conjuncts.push_back(MatchPrim::in_iface(tokens[i + 1], take_neg()));
      i += 2;
      continue;
    }

    if (tok == "-s" || tok == "--source" || tok == "--src" || tok == "-d" ||
        tok == "--destination" || tok == "--dst") {
      bool is_src = tok == "-s" || tok == "--source" || tok == "--src";
      if (is_src && ++src_count > 1) return fail("duplicate -s");
      if (i + 1 >= n) return fail("missing argument to " + tok);
      const std::string& arg = tokens[i + 1];
      if (arg == "!") {
        return fail("legacy '" + tok +
                    " ! addr' negation is unsupported; use '! " + tok +
                    " addr'");
      }
      auto cidr = Cidr::parse(arg, addr_width);
      if (!cidr) return fail("bad CIDR '" + arg + "'");
      IntervalSet set = IntervalSet::from_cidr(*cidr);
      expr.conjuncts.push_back(is_src
                                   ? MatchPrim::src_ip(std::move(set), take_neg())
                                   : MatchPrim::dst_ip(std::move(set), take_neg()));
      i += 2;
      continue;
    }

    if (tok == "-p" || tok == "--protocol") {
      if (i + 1 >= n) return fail("missing argument to " + tok);
      expr.conjuncts.push_back(
          MatchPrim::protocol(to_lower(tokens[i + 1]), take_neg()));
      i += 2;
      continue;
    }

    if (tok == "--dport") {
      if (i + 1 >= n) return fail("missing argument to --dport");
      bool has_l4_proto = std::any_of(
          expr.conjuncts.begin(), expr.conjuncts.end(),
          [](const MatchPrim& p) {
            return p.kind == MatchPrim::Kind::Protocol && !p.negated &&
                   (p.text == "tcp" || p.text == "udp");
          });
      if (!has_l4_proto) {
        // iptables would reject --dport without -p tcp/udp; degrade to an
        // opaque match instead of guessing.
        expr.conjuncts.push_back(MatchPrim::unknown(
            "--dport " + tokens[i + 1], take_neg()));
        result.warnings.push_back(
            "--dport without preceding -p tcp|udp treated as opaque match");
        i += 2;
        continue;
      }
      std::uint16_t lo = 0, hi = 0;
      if (!parse_port_range(tokens[i + 1], lo, hi)) {
        return fail("bad port spec '" + tokens[i + 1] + "'");
      }
      expr.conjuncts.push_back(MatchPrim::dst_port(lo, hi, take_neg()));
      i += 2;
      continue;
    }

    if (tok == "-m" && i + 1 < n &&
        (tokens[i + 1] == "state" || tokens[i + 1] == "conntrack")) {
      const bool conntrack = tokens[i + 1] == "conntrack";
      const std::string_view list_opt = conntrack ? "--ctstate" : "--state";
      std::size_t j = i + 2;
      bool inner_neg = false;
      if (j < n && tokens[j] == "!") {
        inner_neg = true;
        ++j;
      }
      if (j + 1 < n && tokens[j] == list_opt) {
        CtStateSet states;
        if (!parse_state_list(tokens[j + 1], states)) {
          return fail("bad state list '" + tokens[j + 1] + "'");
        }
        expr.conjuncts.push_back(
            MatchPrim::ct_state(states, take_neg() != inner_neg));
        i = j + 2;
        continue;
      }
      // fall through to the opaque capture below
    }

    // Unrecognized option: swallow it and its arguments up to the next
    // token beginning with '-' or '!'.
    std::string raw = tok;
    ++i;
    while (i < n && tokens[i][0] != '-' && tokens[i] != "!") {
      raw += " " + tokens[i];
      ++i;
    }
    result.warnings.push_back("unknown match '" + raw +
                              "' treated as opaque");
    expr.conjuncts.push_back(MatchPrim::unknown(std::move(raw), take_neg()));
  }

  if (pending_neg) return fail("dangling '!' at end of rule");

  result.match = std::move(expr);
  result.action = std::move(action);
  return result;
}

SaveParseResult parse_save(std::string_view text, int addr_width) {
  SaveParseResult result;
  std::vector<RulesetTable> tables;
  RulesetTable* current = nullptr;
  int table_start_line = 0;

  auto error = [&result](int line, std::string message) {
    result.diagnostics.push_back({ParseDiagnostic::Severity::Error, line,
                                  std::move(message)});
    result.tables.clear();
    result.ok = false;
    return result;
  };

  const auto lines = split_lines(text);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const int lineno = static_cast<int>(idx) + 1;
    std::string_view line = trim(lines[idx]);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '*') {
      if (current) {
        return error(lineno, "new table before COMMIT of '" + current->name +
                                 "'");
      }
      auto tokens = tokenize_ws(line);
      if (tokens.size() != 1 || tokens[0].size() < 2) {
        return error(lineno, "malformed table declaration");
      }
      tables.push_back(RulesetTable{tokens[0].substr(1), {}});
      current = &tables.back();
      table_start_line = lineno;
      continue;
    }

    if (line.front() == ':') {
      if (!current) return error(lineno, "chain declared outside a table");
      auto tokens = tokenize_ws(line);
      if (tokens.empty() || tokens[0].size() < 2 || tokens.size() > 3) {
        return error(lineno, "malformed chain declaration");
      }
      Chain chain;
      chain.name = tokens[0].substr(1);
      chain.decl_line = lineno;
      if (tokens.size() >= 2) {
        if (tokens[1] == "ACCEPT") {
          chain.policy = ActionKind::Accept;
        } else if (tokens[1] == "DROP") {
          chain.policy = ActionKind::Drop;
        } else if (tokens[1] != "-") {
          return error(lineno, "invalid policy '" + tokens[1] + "'");
        }
      } else {
        return error(lineno, "missing policy in chain declaration");
      }
      if (current->find_chain(chain.name)) {
        return error(lineno, "duplicate chain '" + chain.name + "'");
      }
      current->chains.push_back(std::move(chain));
      continue;
    }

    auto tokens = tokenize_ws(line);
    if (tokens[0] == "COMMIT") {
      if (!current) return error(lineno, "COMMIT outside a table");
      if (tokens.size() != 1) return error(lineno, "malformed COMMIT");
      // Jump targets must name user-defined chains of this table.
      for (const Chain& chain : current->chains) {
        for (const Rule& rule : chain.rules) {
          if (rule.action.kind != ActionKind::Call) continue;
          const Chain* target = current->find_chain(rule.action.chain);
          if (!target) {
            return error(rule.origin.line, "jump to undeclared chain '" +
                                               rule.action.chain + "'");
          }
          if (target->policy) {
            return error(rule.origin.line, "cannot jump to built-in chain '" +
                                               rule.action.chain + "'");
          }
        }
      }
      current = nullptr;
      continue;
    }

    if (tokens[0] == "-A") {
      if (!current) return error(lineno, "rule outside a table");
      if (tokens.size() < 2) return error(lineno, "malformed -A line");
      Chain* chain = current->find_chain(tokens[1]);
      if (!chain) {
        return error(lineno, "rule for undeclared chain '" + tokens[1] + "'");
      }
      std::vector<std::string> spec(tokens.begin() + 2, tokens.end());
      RuleSpecResult parsed = parse_rule_spec(spec, addr_width);
      if (parsed.error) return error(lineno, *parsed.error);
      for (std::string& w : parsed.warnings) {
        result.diagnostics.push_back(
            {ParseDiagnostic::Severity::Warn, lineno, std::move(w)});
      }
      chain->rules.push_back(Rule{std::move(*parsed.match),
                                  std::move(parsed.action),
                                  RuleOrigin{tokens[1], lineno}});
      continue;
    }

    return error(lineno, "unrecognized line '" + std::string(line) + "'");
  }

  if (current) {
    return error(table_start_line,
                 "table '" + current->name + "' is missing COMMIT");
  }

  result.tables = std::move(tables);
  result.ok = true;
  return result;
}

IpassmtParseResult parse_ipassmt(std::string_view text, int addr_width) {
  IpassmtParseResult result;
  Ipassmt ipassmt;

  auto error = [&result](int line, std::string message) {
    result.diagnostics.push_back({ParseDiagnostic::Severity::Error, line,
                                  std::move(message)});
    result.ok = false;
    return result;
  };

  const auto lines = split_lines(text);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const int lineno = static_cast<int>(idx) + 1;
    std::string_view line = trim(lines[idx]);
    if (line.empty() || line.front() == '#') continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      return error(lineno, "expected '<iface> = <cidr>[,<cidr>]*'");
    }
    std::string iface(trim(line.substr(0, eq)));
    if (iface.empty() || iface.find_first_of(" \t") != std::string::npos) {
      return error(lineno, "malformed interface name");
    }
    if (ipassmt.find(iface)) {
      return error(lineno, "duplicate interface '" + iface + "'");
    }

    std::string_view rest = line.substr(eq + 1);
    IntervalSet set(addr_width);
    bool any = false;
    while (true) {
      auto comma = rest.find(',');
      std::string_view part = trim(
          comma == std::string_view::npos ? rest : rest.substr(0, comma));
      if (part.empty()) return error(lineno, "empty CIDR in address list");
      auto cidr = Cidr::parse(part, addr_width);
      if (!cidr) {
        return error(lineno, "bad CIDR '" + std::string(part) + "'");
      }
      set = set | IntervalSet::from_cidr(*cidr);
      any = true;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!any) return error(lineno, "empty address list");
    ipassmt.entries.emplace_back(std::move(iface), std::move(set));
  }

  result.ipassmt = std::move(ipassmt);
  result.ok = true;
  return result;
}

namespace {

std::string render_prim(const MatchPrim& p) {
  std::string out = p.negated ? "! " : "";
  switch (p.kind) {
    case MatchPrim::Kind::InIface:
      return out + "-i " + p.text;
    case MatchPrim::Kind::SrcIp:
      return out + "-s " + p.addrs.to_string();
    case MatchPrim::Kind::DstIp:
      return out + "-d " + p.addrs.to_string();
    case MatchPrim::Kind::Protocol:
      return out + "-p " + p.text;
    case MatchPrim::Kind::DstPort: {
      out += "--dport " + std::to_string(p.port_lo);
      if (p.port_hi != p.port_lo) out += ":" + std::to_string(p.port_hi);
      return out;
    }
    case MatchPrim::Kind::CtState:
      return out + "-m state --state " + p.states.to_string();
    case MatchPrim::Kind::Unknown:
      return out + p.text;
  }
  return out;
}

}  // namespace

std::string render_match_expr(const MatchExpr& expr) {
  std::string out;
  for (const MatchPrim& p : expr.conjuncts) {
    if (!out.empty()) out += " ";
    out += render_prim(p);
  }
  return out;
}

std::string render_rule_spec(const Rule& rule) {
  std::string out = render_match_expr(rule.match);
  std::string action;
  switch (rule.action.kind) {
    case ActionKind::Empty:
      break;
    case ActionKind::Call:
      action = "-j " + rule.action.chain;
      break;
    default:
      action = "-j " + std::string(action_kind_name(rule.action.kind));
      break;
  }
  if (!action.empty()) {
    if (!out.empty()) out += " ";
    out += action;
  }
  return out;
}

}  // namespace nospoof
