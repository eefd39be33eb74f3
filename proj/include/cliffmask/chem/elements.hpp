//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_ELEMENTS_HPP
#define CLIFFMASK_CHEM_ELEMENTS_HPP

#include <array>
#include <string>
#include <string_view>

namespace cliffmask::chem {

// Symbols indexed by atomic number (index 0 unused).
inline constexpr std::array<std::string_view, 119> kElementSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

inline int element_z(std::string_view symbol) {
  for (std::size_t z = 1; z < kElementSymbols.size(); ++z) {
    if (kElementSymbols[z] == symbol) return static_cast<int>(z);
  }
  return 0;
}

inline std::string_view element_symbol(int z) {
  if (z <= 0 || z >= static_cast<int>(kElementSymbols.size())) return "?";
  return kElementSymbols[static_cast<std::size_t>(z)];
}

// Bare (bracket-free) atoms of the organic subset get hydrogens filled to
// the smallest standard valence that covers their bond-order sum.
struct ValenceSet {
  int count = 0;
  std::array<int, 3> v{};
};

inline ValenceSet default_valences(int z) {
  switch (z) {
    case 1:  return {1, {1}};           // H
    case 5:  return {1, {3}};           // B
    case 6:  return {1, {4}};           // C
    case 7:  return {2, {3, 5}};        // N
    case 8:  return {1, {2}};           // O
    case 15: return {2, {3, 5}};        // P
    case 16: return {3, {2, 4, 6}};     // S
    case 9:  case 17: case 35: case 53:
      return {1, {1}};                  // halogens
    default: return {0, {}};
  }
}

inline bool in_organic_subset(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 9:
    case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

// Elements that may carry the aromatic (lowercase) flag.
inline bool aromatic_capable(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34:
      return true;
    default:
      return false;
  }
}

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_ELEMENTS_HPP
