//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_SMILES_HPP
#define CLIFFMASK_CHEM_SMILES_HPP

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cliffmask/chem/elements.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"

namespace cliffmask::chem {

namespace detail {

struct PendingRing {
  int atom = -1;
  int order = 0;   // 0 = unspecified
  std::size_t offset = 0;
};

inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace detail

// SMILES subset: organic-subset bare atoms, bracket atoms for any element
// (isotope digits, explicit H, charges), aromatic lowercase, branches,
// ring closures (with %nn), bond symbols - = # : and the stereo slashes
// read as single bonds. '@' chirality markers are read and dropped.
// Multi-component input ('.') is rejected rather than split.
inline MoleculeGraph parse_smiles(std::string_view s) {
  using namespace detail;
  if (s.empty()) raise(Errc::kSmilesSyntax, "empty SMILES", 0);

  MoleculeGraph g;
  std::vector<std::pair<int, std::size_t>> branch_stack;  // (atom, '(' offset)
  std::map<int, PendingRing> open_rings;
  int prev_atom = -1;
  int pending_order = 0;  // 0 = none, else order_code-style 1/2/3/4
  std::size_t pending_off = 0;
  std::size_t i = 0;
  const std::size_t n = s.size();

  auto attach = [&](int idx) {
    if (prev_atom >= 0) {
      BondOrder order;
      if (pending_order != 0) {
        order = static_cast<BondOrder>(pending_order);
      } else if (g.atom(prev_atom).aromatic && g.atom(idx).aromatic) {
        order = BondOrder::kAromatic;
      } else {
        order = BondOrder::kSingle;
      }
      g.add_bond(prev_atom, idx, order);
    } else if (pending_order != 0) {
      raise(Errc::kSmilesSyntax, "bond symbol before any atom", pending_off);
    }
    pending_order = 0;
    prev_atom = idx;
  };

  auto ring_closure = [&](int num, std::size_t off) {
    if (prev_atom < 0) {
      raise(Errc::kSmilesSyntax, "ring closure before any atom", off);
    }
    auto it = open_rings.find(num);
    if (it == open_rings.end()) {
      open_rings[num] = {prev_atom, pending_order, off};
    } else {
      PendingRing pr = it->second;
      open_rings.erase(it);
      int order = pending_order;
      if (order == 0) order = pr.order;
      else if (pr.order != 0 && pr.order != order) {
        raise(Errc::kSmilesSyntax, "conflicting ring-closure bond orders",
              off);
      }
      if (pr.atom == prev_atom) {
        raise(Errc::kSmilesSyntax, "ring closure to the same atom", off);
      }
      BondOrder bo;
      if (order != 0) {
        bo = static_cast<BondOrder>(order);
      } else if (g.atom(pr.atom).aromatic && g.atom(prev_atom).aromatic) {
        bo = BondOrder::kAromatic;
      } else {
        bo = BondOrder::kSingle;
      }
      g.add_bond(pr.atom, prev_atom, bo);
    }
    pending_order = 0;
  };

  while (i < n) {
    char c = s[i];
    if (c == '.') {
      raise(Errc::kMultiComponentInput, "multi-component SMILES rejected", i);
    }
    if (c == '-' || c == '/' || c == '\\') {
      pending_order = 1;
      pending_off = i++;
      continue;
    }
    if (c == '=') { pending_order = 2; pending_off = i++; continue; }
    if (c == '#') { pending_order = 3; pending_off = i++; continue; }
    if (c == ':') { pending_order = 4; pending_off = i++; continue; }
    if (c == '(') {
      if (prev_atom < 0) {
        raise(Errc::kUnbalancedBranch, "branch before any atom", i);
      }
      if (pending_order != 0) {
        raise(Errc::kSmilesSyntax, "bond symbol before branch open",
              pending_off);
      }
      branch_stack.push_back({prev_atom, i});
      ++i;
      continue;
    }
    if (c == ')') {
      if (branch_stack.empty()) {
        raise(Errc::kUnbalancedBranch, "unmatched closing branch", i);
      }
      if (pending_order != 0) {
        raise(Errc::kSmilesSyntax, "dangling bond symbol", pending_off);
      }
      prev_atom = branch_stack.back().first;
      branch_stack.pop_back();
      ++i;
      continue;
    }
    if (is_digit(c)) {
      ring_closure(c - '0', i);
      ++i;
      continue;
    }
    if (c == '%') {
      if (i + 3 > n || !is_digit(s[i + 1]) || !is_digit(s[i + 2])) {
        raise(Errc::kSmilesSyntax, "%% ring closure needs two digits", i);
      }
      ring_closure((s[i + 1] - '0') * 10 + (s[i + 2] - '0'), i);
      i += 3;
      continue;
    }
    if (c == '[') {
      std::size_t start = i++;
      // isotope digits, accepted and dropped
      while (i < n && is_digit(s[i])) ++i;
      if (i >= n) raise(Errc::kSmilesSyntax, "unterminated bracket", start);
      std::size_t sym_off = i;
      bool aromatic = false;
      std::string sym;
      if (is_lower(s[i])) {
        aromatic = true;
        sym += static_cast<char>(std::toupper(s[i]));
        ++i;
        // two-letter aromatic atoms (se, as)
        if (i < n && is_lower(s[i])) {
          std::string two = sym;
          two += s[i];
          if (two == "Se" || two == "As") {
            sym = two;
            ++i;
          }
        }
      } else if (is_upper(s[i])) {
        sym += s[i++];
        if (i < n && is_lower(s[i])) {
          std::string two = sym;
          two += s[i];
          if (element_z(two) != 0) {
            sym = two;
            ++i;
          }
        }
      } else {
        raise(Errc::kSmilesSyntax, "expected element symbol in bracket", i);
      }
      int z = element_z(sym);
      if (z == 0) {
        raise(Errc::kUnknownElement, "unknown element: " + sym, sym_off);
      }
      if (aromatic && !aromatic_capable(z)) {
        raise(Errc::kUnknownElement, "element cannot be aromatic: " + sym,
              sym_off);
      }
      Atom a;
      a.z = z;
      a.aromatic = aromatic;
      a.bracket = true;
      // chirality markers, accepted and dropped
      while (i < n && s[i] == '@') ++i;
      if (i < n && s[i] == 'H') {
        ++i;
        a.hcount = 1;
        if (i < n && is_digit(s[i])) {
          a.hcount = s[i] - '0';
          ++i;
        }
      }
      if (i < n && (s[i] == '+' || s[i] == '-')) {
        char sign = s[i];
        int mag = 1;
        ++i;
        if (i < n && is_digit(s[i])) {
          mag = s[i] - '0';
          ++i;
        } else {
          while (i < n && s[i] == sign) {
            ++mag;
            ++i;
          }
        }
        a.formal_charge = sign == '+' ? mag : -mag;
      }
      if (i >= n || s[i] != ']') {
        raise(Errc::kSmilesSyntax, "unterminated bracket", start);
      }
      ++i;
      attach(g.add_atom(a));
      continue;
    }
    if (is_upper(c) || is_lower(c)) {
      std::size_t sym_off = i;
      bool aromatic = is_lower(c);
      std::string sym;
      if (aromatic) {
        sym += static_cast<char>(std::toupper(c));
        ++i;
      } else {
        sym += c;
        ++i;
        // two-letter organic-subset atoms: Cl, Br
        if (i < n && is_lower(s[i])) {
          std::string two = sym;
          two += s[i];
          int z2 = element_z(two);
          if (z2 != 0 && in_organic_subset(z2)) {
            sym = two;
            ++i;
          }
        }
      }
      int z = element_z(sym);
      if (z == 0 || !in_organic_subset(z)) {
        raise(Errc::kUnknownElement,
              "not an organic-subset element: " + sym, sym_off);
      }
      if (aromatic && !aromatic_capable(z)) {
        raise(Errc::kUnknownElement, "element cannot be aromatic: " + sym,
              sym_off);
      }
      Atom a;
      a.z = z;
      a.aromatic = aromatic;
      attach(g.add_atom(a));
      continue;
    }
    raise(Errc::kSmilesSyntax, std::string("unexpected character '") + c + "'",
          i);
  }

  if (pending_order != 0) {
    raise(Errc::kSmilesSyntax, "dangling bond symbol", pending_off);
  }
  if (!branch_stack.empty()) {
    raise(Errc::kUnbalancedBranch, "unclosed branch",
          branch_stack.back().second);
  }
  if (!open_rings.empty()) {
    raise(Errc::kUnbalancedRingClosure, "unclosed ring bond",
          open_rings.begin()->second.offset);
  }
  if (g.num_atoms() == 0) {
    raise(Errc::kSmilesSyntax, "no atoms in SMILES", 0);
  }

  for (int ai = 0; ai < g.num_atoms(); ++ai) {
    if (g.atom(ai).bracket) continue;
    int h = g.inferred_hcount(ai);
    g.atom(ai).hcount = h < 0 ? 0 : h;
  }
  g.validate();
  return g;
}

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_SMILES_HPP
