// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nospoof/certifier.hpp"
#include "nospoof/model.hpp"
#include "nospoof/parser.hpp"
#include "nospoof/preprocess.hpp"

namespace {

constexpr int kExitCertified = 0;
constexpr int kExitNotCertified = 1;
constexpr int kExitInputError = 2;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_diagnostics(const std::vector<nospoof::ParseDiagnostic>& diags) {
  for (const auto& d : diags) std::cerr << d.to_string() << "\n";
}

// Loads, parses, and preprocesses, reporting problems on stderr.  Returns
// nullopt when the caller should exit with kExitInputError.
std::optional<std::vector<nospoof::Rule>> load_flat(
    const std::string& ruleset_path, const std::string& table_name,
    const std::string& chain_name, bool assume_new) {
  auto text = read_file(ruleset_path);
  if (!text) {
    std::cerr << "error: cannot read '" << ruleset_path << "'\n";
    return std::nullopt;
  }
  nospoof::SaveParseResult parsed = nospoof::parse_save(*text);
  print_diagnostics(parsed.diagnostics);
  if (!parsed.ok) return std::nullopt;

  const nospoof::RulesetTable* table = nullptr;
  for (const auto& t : parsed.tables) {
    if (t.name == table_name) table = &t;
  }
  if (!table) {
    std::cerr << "error: no table '" << table_name << "' in '"
              << ruleset_path << "'\n";
    return std::nullopt;
  }
  try {
    return nospoof::preprocess(*table, chain_name, assume_new);
  } catch (const nospoof::PreprocessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

std::string format_offending(const nospoof::IntervalSet& set) {
  const auto cidrs = set.to_cidr_list();
  constexpr std::size_t kMaxShown = 8;
  std::string out;
  for (std::size_t i = 0; i < cidrs.size() && i < kMaxShown; ++i) {
    if (i > 0) out += ", ";
    out += cidrs[i].to_string();
  }
  if (cidrs.size() > kMaxShown) {
    out += " (+" + std::to_string(cidrs.size() - kMaxShown) + " more)";
  }
  return out;
}

int cmd_certify(const std::string& ruleset_path,
                const std::string& ipassmt_path,
                const std::string& table_name, const std::string& chain_name,
                bool no_new_assumption, bool dump_flat, bool verbose) {
  auto flat = load_flat(ruleset_path, table_name, chain_name,
                        !no_new_assumption);
  if (!flat) return kExitInputError;

  auto assignment_text = read_file(ipassmt_path);
  if (!assignment_text) {
    std::cerr << "error: cannot read '" << ipassmt_path << "'\n";
    return kExitInputError;
  }
  nospoof::IpassmtParseResult assignment =
      nospoof::parse_ipassmt(*assignment_text);
  print_diagnostics(assignment.diagnostics);
  if (!assignment.ok) return kExitInputError;
  if (assignment.ipassmt->entries.empty()) {
    std::cerr << "error: '" << ipassmt_path
              << "' assigns no interfaces\n";
    return kExitInputError;
  }

  if (dump_flat) {
    for (const nospoof::Rule& rule : *flat) {
      std::cout << nospoof::render_rule_spec(rule) << "\n";
    }
    std::cout << "\n";
  }

  const auto results = nospoof::certify_all(*flat, *assignment.ipassmt);
  for (const auto& [iface, result] : results) {
    if (result.certified) {
      std::cout << iface << ": CERTIFIED\n";
    } else {
      const auto& v = *result.first_violation;
      const nospoof::RuleOrigin& origin = (*flat)[v.rule_index].origin;
      std::cout << iface << ": FAIL at " << origin.chain << ":"
                << origin.line
                << " - offending sources: " << format_offending(v.offending)
                << "\n";
    }
    if (verbose) {
      std::cout << "  allowed sources: "
                << (nospoof::is_empty(result.final_allowed)
                        ? "(none)"
                        : result.final_allowed.to_string())
                << "\n";
    }
  }
  return nospoof::all_certified(results) ? kExitCertified : kExitNotCertified;
}

int cmd_certify_access(const std::string& ruleset_path,
                       const std::string& table_name,
                       const std::string& chain_name,
                       const std::string& in_iface, const std::string& src,
                       const std::string& dst, const std::string& proto,
                       int dport, const std::string& state) {
  nospoof::PacketPattern packet;
  packet.in_iface = in_iface;

  auto parse_addr =
      [](const std::string& text) -> std::optional<nospoof::Word> {
    auto cidr = nospoof::Cidr::parse(text, nospoof::kMaxWidth);
    if (!cidr || cidr->prefix_len != nospoof::kMaxWidth) return std::nullopt;
    return nospoof::Word{cidr->base, nospoof::kMaxWidth};
  };

  auto src_addr = parse_addr(src);
  if (!src_addr) {
    std::cerr << "error: bad source address '" << src << "'\n";
    return kExitInputError;
  }
  packet.src_ip = *src_addr;
  if (!dst.empty()) {
    auto dst_addr = parse_addr(dst);
    if (!dst_addr) {
      std::cerr << "error: bad destination address '" << dst << "'\n";
      return kExitInputError;
    }
    packet.dst_ip = *dst_addr;
  }
  if (!proto.empty()) packet.protocol = proto;
  if (dport >= 0) {
    if (dport > 65535) {
      std::cerr << "error: bad port " << dport << "\n";
      return kExitInputError;
    }
    packet.dst_port = static_cast<std::uint16_t>(dport);
  }
  auto parsed_state = nospoof::ct_state_from_name(state);
  if (!parsed_state) {
    std::cerr << "error: bad connection state '" << state << "'\n";
    return kExitInputError;
  }
  packet.state = *parsed_state;

  // The packet carries its own state, so the flat list keeps its state
  // primitives and eval_ternary decides them exactly.
  auto flat = load_flat(ruleset_path, table_name, chain_name,
                        /*assume_new=*/false);
  if (!flat) return kExitInputError;

  if (nospoof::certify_access(*flat, packet)) {
    std::cout << "DEFINITELY ACCEPTED\n";
    return kExitCertified;
  }
  std::cout << "NOT CERTIFIABLE\n";
  return kExitNotCertified;
}

int cmd_dump_flat(const std::string& ruleset_path,
                  const std::string& table_name,
                  const std::string& chain_name, bool no_new_assumption) {
  auto flat = load_flat(ruleset_path, table_name, chain_name,
                        !no_new_assumption);
  if (!flat) return kExitInputError;
  for (const nospoof::Rule& rule : *flat) {
    std::cout << nospoof::render_rule_spec(rule) << "\n";
  }
  return kExitCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certifies spoofing protection of iptables-style rulesets"};
  app.require_subcommand(1);

  std::string ruleset_path;
  std::string ipassmt_path;
  std::string table_name = "filter";
  std::string chain_name = "FORWARD";
  bool no_new_assumption = false;
  bool dump_flat = false;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--ruleset", ruleset_path, "ruleset in save format")
        ->required();
    cmd->add_option("--table", table_name, "table to analyze");
    cmd->add_option("--chain", chain_name, "entry chain");
  };

  CLI::App* certify = app.add_subcommand(
      "certify", "prove per-interface spoofing protection");
  add_common(certify);
  certify->add_option("--ipassmt", ipassmt_path,
                      "interface address assignment")
      ->required();
  certify->add_flag("--no-new-assumption", no_new_assumption,
                    "analyze all connection states, not just NEW");
  certify->add_flag("--dump-flat", dump_flat,
                    "print the preprocessed ruleset first");
  certify->add_flag("--verbose", verbose, "print final allowed sets");

  std::string in_iface;
  std::string src;
  std::string dst;
  std::string proto;
  int dport = -1;
  std::string state = "NEW";

  CLI::App* access = app.add_subcommand(
      "certify-access", "prove a packet is accepted despite unknowns");
  add_common(access);
  access->add_option("--in-iface", in_iface, "input interface")->required();
  access->add_option("--src", src, "source address")->required();
  access->add_option("--dst", dst, "destination address");
  access->add_option("--proto", proto, "protocol name");
  access->add_option("--dport", dport, "destination port");
  access->add_option("--state", state, "connection state");

  CLI::App* dump = app.add_subcommand(
      "dump-flat", "print the preprocessed flat ruleset");
  add_common(dump);
  dump->add_flag("--no-new-assumption", no_new_assumption,
                 "keep rules for all connection states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (app.got_subcommand(certify)) {
      return cmd_certify(ruleset_path, ipassmt_path, table_name, chain_name,
                         no_new_assumption, dump_flat, verbose);
    }
    if (app.got_subcommand(access)) {
      return cmd_certify_access(ruleset_path, table_name, chain_name,
                                in_iface, src, dst, proto, dport, state);
    }
    return cmd_dump_flat(ruleset_path, table_name, chain_name,
                         no_new_assumption);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}
