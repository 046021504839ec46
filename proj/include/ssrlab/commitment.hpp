#pragma once

// Fixed-charge bit commitment and its attack. A commitment instance holds
// the two post-commit states Psi(0), Psi(1), both supported on a single
// total-charge sector. If the instance is concealing (sector weights and
// Bob's reduced states agree for both bits), Alice owns a sector-blocked
// unitary mapping Psi(0) to Psi(1) exactly, built per sector from a common
// Bob-side eigenbasis and phase-aligned across sectors.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssrlab/linalg.hpp"
#include "ssrlab/modes.hpp"
#include "ssrlab/operators.hpp"
#include "ssrlab/state.hpp"
#include "ssrlab/superselection.hpp"

namespace ssrlab {

struct CommitmentInstance {
  RegisterPtr reg;
  ChargeValue total_charge = 0;
  SparseState psi0;
  SparseState psi1;

  void validate() const {
    if (!same_register(reg, psi0.reg()) || !same_register(reg, psi1.reg()))
      throw ValidationError("instance states live on different registers");
    for (const SparseState* s : {&psi0, &psi1}) {
      for (const auto& [c, a] : s->amplitudes()) {
        const ChargeValue q = charge_of(c, *reg);
        if (q != total_charge) {
          std::string cfg = "(";
          for (std::size_t i = 0; i < c.size(); ++i)
            cfg += (i ? "," : "") + std::to_string(c[i]);
          cfg += ")";
          throw ValidationError("config " + cfg + " carries charge " +
                                std::to_string(q) + ", instance requires " +
                                std::to_string(total_charge));
        }
      }
    }
  }

  std::vector<std::string> party_ids(Party p) const {
    std::vector<std::string> ids;
    for (const auto& m : reg->modes())
      if (m.owner == p) ids.push_back(m.id);
    return ids;
  }

  std::vector<std::size_t> alice_charge_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < reg->size(); ++i)
      if (reg->mode(i).restricted && reg->mode(i).owner == Party::Alice)
        out.push_back(i);
    return out;
  }
};

struct ConcealingSectorRecord {
  ChargeValue k = 0;
  double p0 = 0.0;
  double p1 = 0.0;
  double tdist = 0.0;  // 1.0 for sectors present on one side only
};

struct ConcealingReport {
  std::vector<ConcealingSectorRecord> sectors;  // ascending k
  bool weight_match = false;
  bool state_match = false;
  bool concealing() const { return weight_match && state_match; }
};

inline ConcealingReport concealing_report(const CommitmentInstance& inst) {
  inst.validate();
  const auto alice_pos = inst.alice_charge_positions();
  const auto bob_ids = inst.party_ids(Party::Bob);
  const SectorDecomposition d0 = sector_decompose(inst.psi0, alice_pos);
  const SectorDecomposition d1 = sector_decompose(inst.psi1, alice_pos);

  std::map<ChargeValue, ConcealingSectorRecord> recs;
  for (const auto& e : d0.entries) recs[e.charge].p0 = e.weight;
  for (const auto& e : d1.entries) recs[e.charge].p1 = e.weight;

  ConcealingReport out;
  double max_weight_gap = 0.0;
  double max_tdist = 0.0;
  for (auto& [k, r] : recs) {
    r.k = k;
    max_weight_gap = std::max(max_weight_gap, std::abs(r.p0 - r.p1));
    if (r.p0 > 0.0 && r.p1 > 0.0) {
      if (bob_ids.empty()) {
        r.tdist = 0.0;
      } else {
        const DensityMatrix rho0 =
            partial_trace(d0.find(k)->component, bob_ids);
        const DensityMatrix rho1 =
            partial_trace(d1.find(k)->component, bob_ids);
        r.tdist = trace_distance(rho0, rho1);
      }
      max_tdist = std::max(max_tdist, r.tdist);
    } else {
      r.tdist = 1.0;
    }
    out.sectors.push_back(r);
  }
  out.weight_match = max_weight_gap <= 1e-10;
  out.state_match = max_tdist <= 1e-10;
  return out;
}

// ---------------------------------------------------------------------------
// Per-sector attack unitary

struct SectorUnitary {
  Matrix u;                          // over the Alice sector slice
  std::vector<BasisConfig> slice;    // slice configs, ascending
  bool exact = false;                // Bob reductions matched
  double overlap = 0.0;              // |<psi1|(U x I)|psi0>|
};

namespace detail {

struct BipartiteView {
  std::vector<BasisConfig> a_basis;  // Alice-subset configs present, sorted
  std::vector<BasisConfig> b_basis;  // rest-subset configs present, sorted
  Matrix m;                          // amplitudes, rows = Alice, cols = rest
};

inline BipartiteView bipartite_view(const SparseState& s,
                                    const std::vector<std::size_t>& a_pos,
                                    const std::vector<std::size_t>& b_pos,
                                    const std::vector<BasisConfig>& a_basis,
                                    const std::vector<BasisConfig>& b_basis) {
  std::unordered_map<BasisConfig, int, BasisConfigHash> ai, bi;
  for (std::size_t i = 0; i < a_basis.size(); ++i)
    ai.emplace(a_basis[i], static_cast<int>(i));
  for (std::size_t i = 0; i < b_basis.size(); ++i)
    bi.emplace(b_basis[i], static_cast<int>(i));
  BipartiteView v;
  v.a_basis = a_basis;
  v.b_basis = b_basis;
  v.m = Matrix::Zero(a_basis.size(), b_basis.size());
  for (const auto& [c, amp] : s.amplitudes())
    v.m(ai.at(restrict_config(c, a_pos)), bi.at(restrict_config(c, b_pos))) =
        amp;
  return v;
}

inline std::vector<BasisConfig> present_configs(
    const SparseState& s0, const SparseState& s1,
    const std::vector<std::size_t>& pos) {
  std::vector<BasisConfig> out;
  for (const SparseState* s : {&s0, &s1})
    for (const auto& [c, a] : s->amplitudes())
      out.push_back(restrict_config(c, pos));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Builds the unitary on Alice's charge-k slice that maps psi0_k to psi1_k.
// Both states are expanded against the eigenbasis of Bob's reduced state of
// psi0_k; matching Alice vectors are paired and the map is completed over
// the orthogonal complement. When the Bob reductions differ beyond 1e-10 no
// exact unitary exists; the fidelity-optimal one (from the SVD of the
// cross transfer matrix) is returned with exact = false.
inline SectorUnitary sector_attack_unitary(
    const SparseState& psi0_k, const SparseState& psi1_k,
    const std::vector<std::string>& alice_ids) {
  require_same_register(psi0_k, psi1_k);
  const Register& reg = *psi0_k.reg();
  const auto a_pos = reg.positions(alice_ids);
  std::vector<std::size_t> b_pos;
  {
    std::vector<bool> is_a(reg.size(), false);
    for (std::size_t p : a_pos) is_a[p] = true;
    for (std::size_t p = 0; p < reg.size(); ++p)
      if (!is_a[p]) b_pos.push_back(p);
  }

  // Alice charge of the sector, read off the support.
  std::vector<std::size_t> a_restricted;
  for (std::size_t i = 0; i < a_pos.size(); ++i)
    if (reg.mode(a_pos[i]).restricted) a_restricted.push_back(i);
  auto slice_charge = [&](const BasisConfig& sub) {
    ChargeValue q = 0;
    for (std::size_t i : a_restricted) q += sub[i];
    return q;
  };
  const BasisConfig first_sub = detail::restrict_config(
      psi0_k.amplitudes().begin()->first, a_pos);
  const ChargeValue k = slice_charge(first_sub);

  // Full sector slice of the Alice subset.
  SubsetBasis a_basis_enum(detail::subset_dims(reg, a_pos));
  std::vector<BasisConfig> slice;
  for (std::size_t i = 0; i < a_basis_enum.dim(); ++i) {
    BasisConfig c = a_basis_enum.config_of(i);
    if (slice_charge(c) == k) slice.push_back(std::move(c));
  }
  std::unordered_map<BasisConfig, int, BasisConfigHash> slice_index;
  for (std::size_t i = 0; i < slice.size(); ++i)
    slice_index.emplace(slice[i], static_cast<int>(i));
  const int sdim = static_cast<int>(slice.size());

  const auto a_present = detail::present_configs(psi0_k, psi1_k, a_pos);
  const auto b_present = detail::present_configs(psi0_k, psi1_k, b_pos);
  for (const auto& c : a_present)
    if (!slice_index.count(c))
      throw ValidationError("sector component mixes Alice charges");

  const detail::BipartiteView v0 =
      detail::bipartite_view(psi0_k, a_pos, b_pos, a_present, b_present);
  const detail::BipartiteView v1 =
      detail::bipartite_view(psi1_k, a_pos, b_pos, a_present, b_present);

  // rho_B[b, b'] = sum_a psi(a, b) conj(psi(a, b')).
  const Matrix rho0 = v0.m.transpose() * v0.m.conjugate();
  const Matrix rho1 = v1.m.transpose() * v1.m.conjugate();
  const double gap = trace_distance(rho0, rho1);

  auto embed_alice = [&](const Vector& in_present) {
    Vector out = Vector::Zero(sdim);
    for (std::size_t i = 0; i < a_present.size(); ++i)
      out(slice_index.at(a_present[i])) = in_present(i);
    return out;
  };

  SectorUnitary out;
  out.slice = slice;

  if (gap <= 1e-10) {
    // Exact route: shared Bob eigenbasis of rho0.
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho0);
    std::vector<int> order(b_present.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return es.eigenvalues()(x) > es.eigenvalues()(y);
    });

    std::vector<Vector> from, to;
    for (int oi : order) {
      const double lambda = es.eigenvalues()(oi);
      if (lambda < 1e-12) continue;
      const Vector b = es.eigenvectors().col(oi);
      // (I (x) <b|) psi = sum_a (sum_b psi(a,b) conj(b[b])) |a>.
      Vector a0 = v0.m * b.conjugate();
      Vector a1 = v1.m * b.conjugate();
      a0 /= a0.norm();
      a1 /= a1.norm();
      from.push_back(embed_alice(a0));
      to.push_back(embed_alice(a1));
    }
    const auto from_full = complete_orthonormal_basis(from, sdim);
    const auto to_full = complete_orthonormal_basis(to, sdim);
    Matrix u = Matrix::Zero(sdim, sdim);
    for (int i = 0; i < sdim; ++i)
      u += to_full[i] * from_full[i].adjoint();
    out.u = std::move(u);
    out.exact = true;
  } else {
    // Transfer matrix N[a, a'] = sum_b psi0(a, b) conj(psi1(a', b)); the
    // unitary maximizing |tr(U N)| maximizes the overlap.
    Matrix n_present = v0.m * v1.m.adjoint();
    Matrix n_slice = Matrix::Zero(sdim, sdim);
    for (std::size_t r = 0; r < a_present.size(); ++r)
      for (std::size_t c = 0; c < a_present.size(); ++c)
        n_slice(slice_index.at(a_present[r]), slice_index.at(a_present[c])) =
            n_present(r, c);
    out.u = maximizing_unitary(n_slice);
    out.exact = false;
  }

  if (!is_unitary(out.u))
    throw InternalError("sector attack unitary failed unitarity");

  // Achieved overlap, evaluated honestly on the inputs.
  {
    Matrix u_present(a_present.size(), a_present.size());
    for (std::size_t r = 0; r < a_present.size(); ++r)
      for (std::size_t c = 0; c < a_present.size(); ++c)
        u_present(r, c) = out.u(slice_index.at(a_present[r]),
                                slice_index.at(a_present[c]));
    const Matrix moved = u_present * v0.m;
    Cplx ov(0.0, 0.0);
    for (Eigen::Index r = 0; r < moved.rows(); ++r)
      for (Eigen::Index c = 0; c < moved.cols(); ++c)
        ov += std::conj(v1.m(r, c)) * moved(r, c);
    out.overlap = std::abs(ov);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-state attack

struct AttackReport {
  LocalOperator attack_operator;
  std::vector<std::string> alice_targets;
  double overall_fidelity = 0.0;
  std::map<ChargeValue, double> per_sector_fidelity;
  ConcealingReport concealing;
  SparseState attacked_state;
};

inline AttackReport assemble_attack(const CommitmentInstance& inst) {
  inst.validate();
  const auto alice_pos = inst.alice_charge_positions();
  const auto alice_ids = inst.party_ids(Party::Alice);

  AttackReport out;
  out.concealing = concealing_report(inst);
  out.alice_targets = alice_ids;

  const SectorDecomposition d0 = sector_decompose(inst.psi0, alice_pos);
  const SectorDecomposition d1 = sector_decompose(inst.psi1, alice_pos);

  std::map<ChargeValue, Matrix> blocks;
  for (const auto& rec : out.concealing.sectors) {
    if (rec.p0 <= 0.0 || rec.p1 <= 0.0) {
      out.per_sector_fidelity[rec.k] = 0.0;
      continue;  // identity block; no constraint in this sector
    }
    const SectorEntry* e0 = d0.find(rec.k);
    const SectorEntry* e1 = d1.find(rec.k);
    SectorUnitary su =
        sector_attack_unitary(e0->component, e1->component, alice_ids);
    // Align the sector coefficient of the attacked state with Psi(1)'s.
    const Cplx phase = (e1->coefficient / std::abs(e1->coefficient)) *
                       std::conj(e0->coefficient / std::abs(e0->coefficient));
    blocks[rec.k] = phase * su.u;
    out.per_sector_fidelity[rec.k] = su.overlap * su.overlap;
  }

  out.attack_operator = sector_conditioned(blocks, alice_ids, *inst.reg);
  out.attacked_state =
      apply_allowed(inst.psi0, out.attack_operator, alice_ids);
  out.overall_fidelity =
      std::norm(inner_product(inst.psi1, out.attacked_state));
  return out;
}

// ---------------------------------------------------------------------------
// Fixed-charge purification

struct PurifyResult {
  RegisterPtr reg;                     // original register + Alice ancillas
  SparseState state;                   // coherent purified state
  ChargeValue fixed_alice_charge = 0;  // k_max
  std::vector<std::string> ancilla_ids;
};

// Replaces a mixture over Alice-charge values k by a coherent superposition
// in which every branch carries charge k_max, by occupying k_max - k of the
// appended Alice ancillas in branch k.
inline PurifyResult purify_to_fixed_charge(
    const RegisterPtr& reg,
    const std::map<ChargeValue, std::pair<double, SparseState>>& mixture,
    const std::string& ancilla_prefix = "purify_anc") {
  if (mixture.empty()) throw ValidationError("empty mixture");
  double total = 0.0;
  const auto alice_pos = [&] {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < reg->size(); ++i)
      if (reg->mode(i).restricted && reg->mode(i).owner == Party::Alice)
        out.push_back(i);
    return out;
  }();
  ChargeValue k_max = mixture.rbegin()->first;
  for (const auto& [k, entry] : mixture) {
    const auto& [p, comp] = entry;
    if (k < 0 || k > k_max)
      throw ValidationError("component charge " + std::to_string(k) +
                            " above maximum " + std::to_string(k_max));
    if (p <= 0.0) throw ValidationError("component probability must be > 0");
    total += p;
    if (!same_register(reg, comp.reg()))
      throw ValidationError("mixture component on a different register");
    for (const auto& [c, a] : comp.amplitudes())
      if (detail::charge_over(c, alice_pos) != k)
        throw ValidationError("component labeled k=" + std::to_string(k) +
                              " has support at Alice charge " +
                              std::to_string(detail::charge_over(c, alice_pos)));
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("mixture probabilities sum to " +
                          std::to_string(total));

  std::vector<ModeSpec> specs = reg->modes();
  std::vector<std::string> anc_ids;
  for (ChargeValue i = 0; i < k_max; ++i) {
    ModeSpec m;
    m.id = ancilla_prefix + "_" + std::to_string(i);
    m.statistics = Statistics::Fermion;
    m.q_max = 1;
    m.owner = Party::Alice;
    m.restricted = true;
    m.free = false;
    anc_ids.push_back(m.id);
    specs.push_back(std::move(m));
  }
  RegisterPtr extended = new_register(std::move(specs));

  AmpMap amps;
  for (const auto& [k, entry] : mixture) {
    const auto& [p, comp] = entry;
    const double root = std::sqrt(p);
    const ChargeValue fill = k_max - k;
    for (const auto& [c, a] : comp.amplitudes()) {
      BasisConfig ext = c;
      ext.occ.resize(extended->size(), 0);
      for (ChargeValue i = 0; i < fill; ++i)
        ext.occ[reg->size() + i] = 1;
      amps[ext] += root * a;
    }
  }

  PurifyResult out;
  out.reg = extended;
  out.state = SparseState::from_map(extended, std::move(amps));
  out.fixed_alice_charge = k_max;
  out.ancilla_ids = std::move(anc_ids);
  return out;
}

}  // namespace ssrlab
