#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nhchain {

// Occupation-number basis state for a chain of spinless fermions.
// Bit j-1 of the mask is the occupation of site j (sites are 1-indexed).
using FockState = std::uint32_t;

inline constexpr int kMaxSites = 20;

enum class Parity { Even, Odd };

inline Parity parity_of(FockState state) {
  return (std::popcount(state) % 2 == 0) ? Parity::Even : Parity::Odd;
}

struct AppliedOperator {
  FockState state;
  int sign;  // +1 or -1
};

namespace detail {
inline void check_site(int site, int length) {
  if (site < 1 || site > length)
    throw std::out_of_range("fock: site index out of range");
}
inline void check_length(int length) {
  if (length < 1 || length > kMaxSites)
    throw std::out_of_range("fock: chain length out of supported range");
}
// Number of occupied sites strictly below `site`; fixes the operator
// ordering (ascending site order) and with it every fermionic sign.
inline int string_sign(FockState state, int site) {
  FockState below = state & ((FockState{1} << (site - 1)) - 1);
  return (std::popcount(below) % 2 == 0) ? +1 : -1;
}
}  // namespace detail

// c^dagger_site |state>; empty result on double occupation.
inline std::optional<AppliedOperator> apply_creation(FockState state, int site,
                                                     int length) {
  detail::check_length(length);
  detail::check_site(site, length);
  FockState bit = FockState{1} << (site - 1);
  if (state & bit) return std::nullopt;
  return AppliedOperator{state | bit, detail::string_sign(state, site)};
}

// c_site |state>; empty result on an unoccupied site.
inline std::optional<AppliedOperator> apply_annihilation(FockState state,
                                                         int site,
                                                         int length) {
  detail::check_length(length);
  detail::check_site(site, length);
  FockState bit = FockState{1} << (site - 1);
  if (!(state & bit)) return std::nullopt;
  return AppliedOperator{state & ~bit, detail::string_sign(state, site)};
}

// Fixed-parity block of the full Fock space, in canonical (ascending
// bitmask) order so that state indices are reproducible across runs.
struct SectorBasis {
  int length = 0;
  Parity parity = Parity::Even;
  std::vector<FockState> states;
  std::vector<std::int32_t> index;  // mask -> position, -1 outside sector

  int dim() const { return static_cast<int>(states.size()); }

  int index_of(FockState state) const {
    std::int32_t i = index[state];
    if (i < 0) throw std::invalid_argument("fock: state not in sector");
    return i;
  }

  bool contains(FockState state) const { return index[state] >= 0; }
};

inline SectorBasis build_sector(int length, Parity parity) {
  detail::check_length(length);
  SectorBasis basis;
  basis.length = length;
  basis.parity = parity;
  FockState total = FockState{1} << length;
  basis.index.assign(total, -1);
  basis.states.reserve(total / 2);
  for (FockState mask = 0; mask < total; ++mask) {
    if (parity_of(mask) == parity) {
      basis.index[mask] = static_cast<std::int32_t>(basis.states.size());
      basis.states.push_back(mask);
    }
  }
  return basis;
}

}  // namespace nhchain
