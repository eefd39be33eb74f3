//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_FRAG_RULES_HPP
#define CLIFFMASK_FRAG_RULES_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cliffmask/chem/elements.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"
#include "cliffmask/core/strings.hpp"

namespace cliffmask::frag {

// One side of a cleavage rule: predicates over the bond-endpoint atom.
// Descriptor syntax, ';'-joined:   elem=C,N  arom=0|1  ring=0|1
// deg=N | deg>=N | deg<=N        (empty descriptor matches any atom)
struct AtomDescriptor {
  std::vector<int> elements;   // empty = any
  int aromatic = -1;           // -1 = any
  int in_ring = -1;
  int deg_min = 0;
  int deg_max = 1 << 20;

  bool matches(const chem::MoleculeGraph& g, int atom) const {
    const chem::Atom& a = g.atom(atom);
    if (!elements.empty()) {
      bool found = false;
      for (int z : elements) found |= (z == a.z);
      if (!found) return false;
    }
    if (aromatic >= 0 && (a.aromatic ? 1 : 0) != aromatic) return false;
    if (in_ring >= 0) {
      int r = g.ring_info().atom_in_ring[static_cast<std::size_t>(atom)];
      if (r != in_ring) return false;
    }
    int d = g.degree(atom);
    return d >= deg_min && d <= deg_max;
  }
};

struct CleavageRule {
  AtomDescriptor a;
  AtomDescriptor b;
  std::string text;  // source line, kept for reporting
};

namespace detail {

inline AtomDescriptor parse_descriptor(std::string_view text, int lineno) {
  AtomDescriptor d;
  auto fail = [&](const std::string& why) {
    raise(Errc::kRuleSyntax,
          "rule line " + std::to_string(lineno) + ": " + why);
  };
  std::string_view t = trim(text);
  if (t == "*" || t.empty()) return d;
  for (const std::string& raw : split(t, ';')) {
    std::string_view p = trim(raw);
    if (p.empty()) fail("empty predicate");
    if (starts_with(p, "elem=")) {
      for (const std::string& sym : split(p.substr(5), ',')) {
        int z = chem::element_z(std::string(trim(sym)));
        if (z == 0) fail("unknown element '" + sym + "'");
        d.elements.push_back(z);
      }
      if (d.elements.empty()) fail("elem= needs at least one symbol");
    } else if (starts_with(p, "arom=")) {
      if (p == "arom=0") d.aromatic = 0;
      else if (p == "arom=1") d.aromatic = 1;
      else fail("arom= must be 0 or 1");
    } else if (starts_with(p, "ring=")) {
      if (p == "ring=0") d.in_ring = 0;
      else if (p == "ring=1") d.in_ring = 1;
      else fail("ring= must be 0 or 1");
    } else if (starts_with(p, "deg>=")) {
      d.deg_min = std::atoi(std::string(p.substr(5)).c_str());
    } else if (starts_with(p, "deg<=")) {
      d.deg_max = std::atoi(std::string(p.substr(5)).c_str());
    } else if (starts_with(p, "deg=")) {
      int v = std::atoi(std::string(p.substr(4)).c_str());
      d.deg_min = d.deg_max = v;
    } else {
      fail("unknown predicate '" + std::string(p) + "'");
    }
  }
  return d;
}

}  // namespace detail

// Rules describe atom environments only; the engine itself restricts
// cleavage to acyclic single bonds, so no rule can target a ring bond.
class CleavageRuleTable {
 public:
  static CleavageRuleTable from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::kIoError, "cannot open rule table: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
  }

  // The default table shipped with the library; identical to
  // configs/brics16.rules so tools work without an external file.
  static CleavageRuleTable builtin_default() {
    static const char* kText =
        "ring=1 -- elem=C;ring=0;deg>=2\n"
        "ring=1 -- elem=N;ring=0\n"
        "ring=1 -- elem=O;ring=0;deg>=2\n"
        "ring=1 -- elem=S;ring=0\n"
        "ring=1 -- ring=1\n"
        "elem=C;ring=0 -- elem=N;ring=0;deg>=2\n"
        "elem=C;ring=0 -- elem=O;ring=0;deg>=2\n"
        "elem=C;ring=0 -- elem=S;ring=0;deg>=2\n"
        "elem=N;ring=0 -- elem=N;ring=0\n"
        "elem=N;ring=0 -- elem=S;ring=0\n"
        "elem=N;ring=0 -- elem=P;ring=0\n"
        "elem=O;ring=0 -- elem=P;ring=0\n"
        "elem=C;ring=0;deg>=3 -- elem=C;ring=0;deg>=3\n"
        "elem=C;arom=1 -- elem=C;ring=0;deg>=2\n"
        "elem=C;ring=0;deg>=2 -- elem=P;ring=0\n"
        "elem=C;ring=0;deg>=2 -- elem=B;ring=0\n";
    return from_text(kText);
  }

  static CleavageRuleTable from_text(const std::string& text) {
    CleavageRuleTable table;
    int lineno = 0;
    for (const std::string& raw : split(text, '\n')) {
      ++lineno;
      std::string_view line = trim(raw);
      if (line.empty() || line[0] == '#') continue;
      auto sep = line.find("--");
      if (sep == std::string_view::npos ||
          line.find("--", sep + 2) != std::string_view::npos) {
        raise(Errc::kRuleSyntax, "rule line " + std::to_string(lineno) +
                                     ": expected exactly one '--'");
      }
      CleavageRule rule;
      rule.a = detail::parse_descriptor(line.substr(0, sep), lineno);
      rule.b = detail::parse_descriptor(line.substr(sep + 2), lineno);
      rule.text = std::string(line);
      table.rules_.push_back(std::move(rule));
    }
    return table;
  }

  bool matches_bond(const chem::MoleculeGraph& g, int bond_idx) const {
    const chem::Bond& b = g.bond(bond_idx);
    for (const CleavageRule& r : rules_) {
      if ((r.a.matches(g, b.a) && r.b.matches(g, b.b)) ||
          (r.a.matches(g, b.b) && r.b.matches(g, b.a))) {
        return true;
      }
    }
    return false;
  }

  std::size_t size() const { return rules_.size(); }
  const std::vector<CleavageRule>& rules() const { return rules_; }

 private:
  std::vector<CleavageRule> rules_;
};

}  // namespace cliffmask::frag

#endif  // CLIFFMASK_FRAG_RULES_HPP
