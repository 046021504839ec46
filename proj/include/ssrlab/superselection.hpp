#pragma once

// The charge superselection rule: the total occupation of restricted modes
// is conserved, so allowed unitaries are block diagonal across charge
// sectors. This header computes charges, splits states into sectors, decides
// operator legality (with a concrete violation witness) and assembles
// sector-conditioned operators.

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssrlab/modes.hpp"
#include "ssrlab/operators.hpp"
#include "ssrlab/state.hpp"

namespace ssrlab {

using ChargeValue = int;

inline ChargeValue charge_of(const BasisConfig& config, const Register& reg) {
  reg.check_config(config);
  ChargeValue q = 0;
  for (std::size_t i = 0; i < reg.size(); ++i)
    if (reg.mode(i).restricted) q += config[i];
  return q;
}

namespace detail {

// Charge of a subset config given which targets are restricted.
inline ChargeValue sub_charge(const BasisConfig& sub,
                              const std::vector<bool>& restricted) {
  ChargeValue q = 0;
  for (std::size_t i = 0; i < restricted.size(); ++i)
    if (restricted[i]) q += sub[i];
  return q;
}

inline std::vector<bool> restricted_mask(
    const Register& reg, const std::vector<std::size_t>& positions) {
  std::vector<bool> mask(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    mask[i] = reg.mode(positions[i]).restricted;
  return mask;
}

// Charge of a full config over an explicit set of positions.
inline ChargeValue charge_over(const BasisConfig& c,
                               const std::vector<std::size_t>& positions) {
  ChargeValue q = 0;
  for (std::size_t p : positions) q += c[p];
  return q;
}

inline std::vector<std::size_t> restricted_positions(const Register& reg) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < reg.size(); ++i)
    if (reg.mode(i).restricted) out.push_back(i);
  return out;
}

}  // namespace detail

// Sector weights only; cheap enough for large sparse states.
inline std::map<ChargeValue, double> charge_weights(
    const SparseState& state, const std::vector<std::size_t>& positions) {
  std::map<ChargeValue, double> w;
  for (const auto& [c, a] : state.amplitudes())
    w[detail::charge_over(c, positions)] += std::norm(a);
  return w;
}

inline std::map<ChargeValue, double> charge_weights(const SparseState& state) {
  return charge_weights(state,
                        detail::restricted_positions(*state.reg()));
}

struct SectorEntry {
  ChargeValue charge = 0;
  double weight = 0.0;       // |coefficient|^2
  Cplx coefficient;          // sqrt(weight) * e^{i phase}
  SparseState component;     // unit norm, phase-fixed
};

struct SectorDecomposition {
  std::vector<SectorEntry> entries;  // ascending charge

  const SectorEntry* find(ChargeValue k) const {
    for (const auto& e : entries)
      if (e.charge == k) return &e;
    return nullptr;
  }
};

// Splits a state into charge sectors over the given positions. The component
// phase convention: the amplitude of the lexicographically smallest config in
// each sector is real nonnegative; the extracted phase lives in the
// coefficient, so sum_k coefficient_k * component_k reproduces the input.
inline SectorDecomposition sector_decompose(
    const SparseState& state, const std::vector<std::size_t>& positions) {
  struct Acc {
    double weight = 0.0;
    AmpMap amps;
  };
  std::map<ChargeValue, Acc> acc;
  for (const auto& [c, a] : state.amplitudes()) {
    Acc& s = acc[detail::charge_over(c, positions)];
    s.weight += std::norm(a);
    s.amps.emplace(c, a);
  }
  SectorDecomposition out;
  out.entries.reserve(acc.size());
  for (auto& [k, s] : acc) {
    const BasisConfig* smallest = nullptr;
    for (const auto& [c, a] : s.amps)
      if (smallest == nullptr || c < *smallest) smallest = &c;
    const Cplx anchor = s.amps.at(*smallest);
    const Cplx phase = anchor / std::abs(anchor);
    const double root = std::sqrt(s.weight);
    SectorEntry e;
    e.charge = k;
    e.weight = s.weight;
    e.coefficient = phase * root;
    AmpMap comp = std::move(s.amps);
    const Cplx inv = 1.0 / e.coefficient;
    for (auto& [c, a] : comp) a *= inv;
    e.component = SparseState::from_map(state.reg(), std::move(comp));
    out.entries.push_back(std::move(e));
  }
  return out;
}

inline SectorDecomposition sector_decompose(const SparseState& state) {
  return sector_decompose(state,
                          detail::restricted_positions(*state.reg()));
}

// ---------------------------------------------------------------------------
// Legality

struct LegalityCheck {
  bool allowed = true;
  LegalityWitness witness;  // meaningful only when !allowed
};

// Block-diagonality over charge sectors of the restricted targets. Entries
// whose magnitude exceeds 1e-12 and connect different charges are violations.
inline LegalityCheck is_allowed(const LocalOperator& op,
                                const std::vector<std::string>& target_ids,
                                const Register& reg) {
  const auto positions = reg.positions(target_ids);
  const auto dims = detail::subset_dims(reg, positions);
  if (dims != op.dims())
    throw ValidationError("operator dimension does not match targets");
  const std::vector<bool> mask = detail::restricted_mask(reg, positions);

  LegalityCheck out;
  bool any_restricted = false;
  for (bool b : mask) any_restricted |= b;
  if (!any_restricted) return out;

  auto make_witness = [&](const BasisConfig& src, const BasisConfig& dst,
                          Cplx entry) {
    LegalityWitness w;
    w.source = src.as_ints();
    w.target = dst.as_ints();
    w.entry = entry;
    w.source_charge = detail::sub_charge(src, mask);
    w.target_charge = detail::sub_charge(dst, mask);
    return w;
  };

  if (op.kind() == LocalOperator::Kind::Permutation) {
    // Deterministic witness: the violating pair with the smallest source.
    const BasisConfig* best_from = nullptr;
    const BasisConfig* best_to = nullptr;
    for (const auto& [from, to] : op.mapping()) {
      if (detail::sub_charge(from, mask) != detail::sub_charge(to, mask)) {
        if (best_from == nullptr || from < *best_from) {
          best_from = &from;
          best_to = &to;
        }
      }
    }
    if (best_from != nullptr) {
      out.allowed = false;
      out.witness = make_witness(*best_from, *best_to, Cplx(1.0, 0.0));
    }
    return out;
  }

  const Matrix& m = op.matrix();
  SubsetBasis basis(op.dims());
  std::vector<ChargeValue> charge(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i)
    charge[i] = detail::sub_charge(basis.config_of(i), mask);
  for (std::size_t col = 0; col < basis.dim(); ++col) {
    for (std::size_t row = 0; row < basis.dim(); ++row) {
      if (charge[row] == charge[col]) continue;
      if (std::abs(m(row, col)) > 1e-12) {
        out.allowed = false;
        out.witness =
            make_witness(basis.config_of(col), basis.config_of(row),
                         m(row, col));
        return out;
      }
    }
  }
  return out;
}

// Assembles a block-diagonal operator from per-charge blocks over the
// sector slices of the target subset; unlisted sectors act as identity.
inline LocalOperator sector_conditioned(
    const std::map<ChargeValue, Matrix>& blocks,
    const std::vector<std::string>& target_ids, const Register& reg) {
  const auto positions = reg.positions(target_ids);
  const auto dims = detail::subset_dims(reg, positions);
  SubsetBasis basis(dims);
  const std::vector<bool> mask = detail::restricted_mask(reg, positions);

  std::map<ChargeValue, std::vector<std::size_t>> slices;
  for (std::size_t i = 0; i < basis.dim(); ++i)
    slices[detail::sub_charge(basis.config_of(i), mask)].push_back(i);

  Matrix m = Matrix::Identity(basis.dim(), basis.dim());
  for (const auto& [k, block] : blocks) {
    auto it = slices.find(k);
    if (it == slices.end())
      throw ValidationError("no charge sector " + std::to_string(k) +
                            " for these targets");
    const auto& slice = it->second;
    if (static_cast<std::size_t>(block.rows()) != slice.size() ||
        static_cast<std::size_t>(block.cols()) != slice.size())
      throw ValidationError("sector " + std::to_string(k) + " block is " +
                            std::to_string(block.rows()) + "x" +
                            std::to_string(block.cols()) + ", slice has dim " +
                            std::to_string(slice.size()));
    if (!is_unitary(block))
      throw ValidationError("sector " + std::to_string(k) +
                            " block is not unitary");
    for (std::size_t r = 0; r < slice.size(); ++r)
      for (std::size_t c = 0; c < slice.size(); ++c)
        m(slice[r], slice[c]) = block(r, c);
  }

  LocalOperator op = LocalOperator::dense(dims, std::move(m));
  op.set_sector_blocks(blocks);
  return op;
}

// apply_local gated by legality, with a conservation audit: sector weights
// of the full restricted charge must be unchanged.
inline SparseState apply_allowed(const SparseState& state,
                                 const LocalOperator& op,
                                 const std::vector<std::string>& target_ids) {
  const LegalityCheck check = is_allowed(op, target_ids, *state.reg());
  if (!check.allowed)
    throw LegalityError("operator violates the superselection rule",
                        check.witness);
  const auto restricted = detail::restricted_positions(*state.reg());
  const auto before = charge_weights(state, restricted);
  SparseState out = apply_local(state, op, target_ids);
  const auto after = charge_weights(out, restricted);
  auto keys = before;
  for (const auto& [k, v] : after) keys.emplace(k, 0.0);
  for (const auto& [k, unused] : keys) {
    const auto b = before.count(k) ? before.at(k) : 0.0;
    const auto a = after.count(k) ? after.at(k) : 0.0;
    if (std::abs(a - b) > 1e-12)
      throw InternalError("sector weight drifted for charge " +
                          std::to_string(k));
  }
  return out;
}

}  // namespace ssrlab
