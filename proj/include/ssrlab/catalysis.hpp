#pragma once

// The catalytic swap: using n-1 restricted ancilla modes prepared in a
// uniform superposition of staircase configurations, a restricted qubit can
// be swapped onto a free mode with fidelity (n-1)/n, without ever applying
// an operator that violates the charge superselection rule. Arbitrary
// unitaries on the restricted qubit follow by swap / act / swap-back.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssrlab/modes.hpp"
#include "ssrlab/operators.hpp"
#include "ssrlab/rng.hpp"
#include "ssrlab/state.hpp"
#include "ssrlab/superselection.hpp"

namespace ssrlab {

struct CatalysisPlan {
  int n = 2;                        // catalyst parameter, >= 2
  std::string x_id;                 // restricted data mode
  std::vector<std::string> y_ids;   // n-1 restricted ancilla modes
  std::string z_id;                 // free target mode

  std::vector<std::string> targets() const {
    std::vector<std::string> t;
    t.reserve(y_ids.size() + 2);
    t.push_back(x_id);
    t.insert(t.end(), y_ids.begin(), y_ids.end());
    t.push_back(z_id);
    return t;
  }

  void validate(const Register& reg) const {
    if (n < 2) throw ValidationError("catalysis needs n >= 2");
    if (y_ids.size() != static_cast<std::size_t>(n - 1))
      throw ValidationError("plan needs n-1 ancilla modes, got " +
                            std::to_string(y_ids.size()));
    reg.positions(targets());  // existence + distinctness
    auto qubit = [&](const std::string& id) {
      if (reg.mode(reg.position(id)).q_max != 1)
        throw ValidationError("plan mode '" + id + "' must be a qubit");
    };
    auto must_restrict = [&](const std::string& id) {
      if (!reg.mode(reg.position(id)).restricted)
        throw ValidationError("plan mode '" + id + "' must be restricted");
    };
    qubit(x_id);
    must_restrict(x_id);
    for (const auto& y : y_ids) {
      qubit(y);
      must_restrict(y);
    }
    qubit(z_id);
    if (!reg.mode(reg.position(z_id)).free)
      throw ValidationError("plan mode '" + z_id + "' must be free");
  }
};

// |j> on `count` ancillas: the first j occupied, the rest empty.
inline BasisConfig staircase_config(int j, int count) {
  if (j < 0 || j > count)
    throw ValidationError("staircase index " + std::to_string(j) +
                          " out of range [0, " + std::to_string(count) + "]");
  std::vector<std::uint8_t> occ(count, 0);
  for (int i = 0; i < j; ++i) occ[i] = 1;
  return BasisConfig(std::move(occ));
}

// (1/sqrt(n)) sum_j |j> on the ancillas, all other modes empty.
inline SparseState catalyst_state(int n, const std::vector<std::string>& y_ids,
                                  RegisterPtr reg) {
  if (n < 2) throw ValidationError("catalyst needs n >= 2");
  if (y_ids.size() != static_cast<std::size_t>(n - 1))
    throw ValidationError("catalyst over " + std::to_string(n - 1) +
                          " ancillas, got " + std::to_string(y_ids.size()));
  const auto pos = reg->positions(y_ids);
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  AmpMap m;
  m.reserve(n);
  BasisConfig c(std::vector<std::uint8_t>(reg->size(), 0));
  m.emplace(c, Cplx(amp, 0.0));  // j = 0
  for (int j = 1; j < n; ++j) {
    c.occ[pos[j - 1]] = 1;
    m.emplace(c, Cplx(amp, 0.0));
  }
  return SparseState::from_map(std::move(reg), std::move(m));
}

// Swap |0, j> <-> |1, j-1> on (x, y) for j = 1..n-1, identity elsewhere.
// Every swapped pair has equal charge j, so the operator is allowed.
inline LocalOperator conditional_swap_S(int n) {
  if (n < 2) throw ValidationError("conditional swap needs n >= 2");
  std::vector<std::pair<BasisConfig, BasisConfig>> pairs;
  pairs.reserve(n - 1);
  for (int j = 1; j < n; ++j) {
    BasisConfig from, to;
    from.occ.reserve(n);
    to.occ.reserve(n);
    from.occ.push_back(0);
    to.occ.push_back(1);
    const BasisConfig sj = staircase_config(j, n - 1);
    const BasisConfig sj1 = staircase_config(j - 1, n - 1);
    from.occ.insert(from.occ.end(), sj.occ.begin(), sj.occ.end());
    to.occ.insert(to.occ.end(), sj1.occ.begin(), sj1.occ.end());
    pairs.emplace_back(std::move(from), std::move(to));
  }
  return LocalOperator::transpositions(std::vector<int>(n, 2), pairs);
}

namespace detail {

inline BasisConfig xyz_config(int x, const BasisConfig& stair, int z) {
  BasisConfig c;
  c.occ.reserve(stair.size() + 2);
  c.occ.push_back(static_cast<std::uint8_t>(x));
  c.occ.insert(c.occ.end(), stair.occ.begin(), stair.occ.end());
  c.occ.push_back(static_cast<std::uint8_t>(z));
  return c;
}

// CNOT x -> z on charge sectors 1..n-1 of (x, y), identity on sectors 0 and
// n. Realized on the staircase-supported configurations the procedure can
// reach; flipping the free mode never changes the charge.
inline LocalOperator conditioned_cnot_op(int n) {
  std::vector<std::pair<BasisConfig, BasisConfig>> pairs;
  pairs.reserve(n - 1);
  for (int j = 0; j <= n - 2; ++j) {
    const BasisConfig s = staircase_config(j, n - 1);
    pairs.emplace_back(xyz_config(1, s, 0), xyz_config(1, s, 1));
  }
  return LocalOperator::transpositions(std::vector<int>(n + 1, 2), pairs);
}

// The swap S applied only where z = 1.
inline LocalOperator conditioned_swap_op(int n) {
  std::vector<std::pair<BasisConfig, BasisConfig>> pairs;
  pairs.reserve(n - 1);
  for (int j = 1; j < n; ++j) {
    pairs.emplace_back(xyz_config(0, staircase_config(j, n - 1), 1),
                       xyz_config(1, staircase_config(j - 1, n - 1), 1));
  }
  return LocalOperator::transpositions(std::vector<int>(n + 1, 2), pairs);
}

}  // namespace detail

struct CatalysisStats {
  std::size_t peak_amplitudes = 0;

  void observe(const SparseState& s) {
    peak_amplitudes = std::max(peak_amplitudes, s.support_size());
  }
};

// The two-gate procedure: sector-conditioned CNOT(x -> z), then the swap S
// conditioned on z. Requires z empty on the input support; the ancillas are
// expected to hold the catalyst.
inline SparseState catalytic_swap(const SparseState& state,
                                  const CatalysisPlan& plan,
                                  CatalysisStats* stats = nullptr) {
  const Register& reg = *state.reg();
  plan.validate(reg);
  const std::size_t zpos = reg.position(plan.z_id);
  for (const auto& [c, a] : state.amplitudes())
    if (c[zpos] != 0)
      throw ValidationError("free mode '" + plan.z_id +
                            "' must start empty");

  const auto targets = plan.targets();
  if (stats) stats->observe(state);
  SparseState s1 =
      apply_allowed(state, detail::conditioned_cnot_op(plan.n), targets);
  if (stats) stats->observe(s1);
  SparseState s2 =
      apply_allowed(s1, detail::conditioned_swap_op(plan.n), targets);
  if (stats) stats->observe(s2);
  return s2;
}

// Undoes catalytic_swap (both gates are involutions, applied in reverse).
inline SparseState catalytic_swap_inverse(const SparseState& state,
                                          const CatalysisPlan& plan,
                                          CatalysisStats* stats = nullptr) {
  const Register& reg = *state.reg();
  plan.validate(reg);
  const auto targets = plan.targets();
  if (stats) stats->observe(state);
  SparseState s1 =
      apply_allowed(state, detail::conditioned_swap_op(plan.n), targets);
  if (stats) stats->observe(s1);
  SparseState s2 =
      apply_allowed(s1, detail::conditioned_cnot_op(plan.n), targets);
  if (stats) stats->observe(s2);
  return s2;
}

inline double tv_distance(const std::map<ChargeValue, double>& a,
                          const std::map<ChargeValue, double>& b) {
  double d = 0.0;
  auto merged = a;
  for (const auto& [k, v] : b) merged.emplace(k, 0.0);
  for (const auto& [k, unused] : merged) {
    const double pa = a.count(k) ? a.at(k) : 0.0;
    const double pb = b.count(k) ? b.at(k) : 0.0;
    d += std::abs(pa - pb);
  }
  return 0.5 * d;
}

struct SwapAnalysis {
  int n = 0;
  double fidelity_to_ideal = 0.0;
  std::map<ChargeValue, double> qr_distribution;     // actual output
  std::map<ChargeValue, double> ideal_distribution;  // swapped target state
  std::size_t peak_amplitudes = 0;
};

namespace detail {

inline RegisterPtr swap_register(int n) {
  std::vector<ModeSpec> specs;
  specs.reserve(n + 1);
  specs.push_back({"x", Statistics::Fermion, 1, Party::Alice, true, false});
  for (int i = 1; i < n; ++i)
    specs.push_back({"y" + std::to_string(i), Statistics::Fermion, 1,
                     Party::Alice, true, false});
  specs.push_back({"z", Statistics::Boson, 1, Party::Alice, false, true});
  return new_register(std::move(specs));
}

inline CatalysisPlan swap_plan(int n) {
  CatalysisPlan plan;
  plan.n = n;
  plan.x_id = "x";
  for (int i = 1; i < n; ++i) plan.y_ids.push_back("y" + std::to_string(i));
  plan.z_id = "z";
  return plan;
}

// Maps |0> to alpha|0> + beta|1>.
inline LocalOperator qubit_prep(Cplx alpha, Cplx beta) {
  Matrix m(2, 2);
  m(0, 0) = alpha;
  m(1, 0) = beta;
  m(0, 1) = -std::conj(beta);
  m(1, 1) = std::conj(alpha);
  return LocalOperator::dense({2}, std::move(m));
}

}  // namespace detail

// Runs the full procedure for an input qubit alpha|0> + beta|1> on a fresh
// register and quantifies how close the output is to a perfect swap.
inline SwapAnalysis analyze_swap(int n, Cplx alpha, Cplx beta) {
  if (n < 2) throw ValidationError("analyze_swap needs n >= 2");
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-12)
    throw ValidationError("input qubit is not normalized");

  RegisterPtr reg = detail::swap_register(n);
  const CatalysisPlan plan = detail::swap_plan(n);

  SparseState input = catalyst_state(n, plan.y_ids, reg);
  input = apply_local(input, detail::qubit_prep(alpha, beta), {plan.x_id});

  CatalysisStats stats;
  stats.observe(input);
  SparseState actual = catalytic_swap(input, plan, &stats);

  // Ideal swapped state: (1/sqrt(n-1)) |0> (x) sum_{j>=1} |j> (x)
  // (alpha|0> + beta|1>).
  AmpMap ideal_map;
  const double root = 1.0 / std::sqrt(static_cast<double>(n - 1));
  const auto ypos = reg->positions(plan.y_ids);
  const std::size_t zpos = reg->position(plan.z_id);
  for (int j = 1; j < n; ++j) {
    BasisConfig c(std::vector<std::uint8_t>(reg->size(), 0));
    for (int i = 0; i < j; ++i) c.occ[ypos[i]] = 1;
    if (std::abs(alpha) > 0.0) ideal_map[c] += alpha * root;
    BasisConfig c1 = c;
    c1.occ[zpos] = 1;
    if (std::abs(beta) > 0.0) ideal_map[c1] += beta * root;
  }
  SparseState ideal = SparseState::from_map(reg, std::move(ideal_map));

  SwapAnalysis out;
  out.n = n;
  out.fidelity_to_ideal = std::norm(inner_product(ideal, actual));
  out.qr_distribution = charge_weights(actual);
  out.ideal_distribution = charge_weights(ideal);
  out.peak_amplitudes = stats.peak_amplitudes;
  return out;
}

// swap x onto z, apply U on (z, extra), swap back. The result approximates
// a direct application of U on (x, extra) with infidelity at most 2/n.
inline SparseState lift_general_unitary(const SparseState& state,
                                        const LocalOperator& u,
                                        const CatalysisPlan& plan,
                                        const std::vector<std::string>& e_ids) {
  const Register& reg = *state.reg();
  plan.validate(reg);
  {
    auto all = plan.targets();
    all.insert(all.end(), e_ids.begin(), e_ids.end());
    reg.positions(all);  // throws on overlap
  }
  std::vector<std::string> u_targets;
  u_targets.push_back(plan.z_id);
  u_targets.insert(u_targets.end(), e_ids.begin(), e_ids.end());

  SparseState s = catalytic_swap(state, plan);
  s = apply_allowed(s, u, u_targets);
  return catalytic_swap_inverse(s, plan);
}

// ---------------------------------------------------------------------------
// Catalyst preparation by post-selection

struct PostselectResult {
  bool success = false;
  double success_probability = 0.0;
  SparseState state;  // post-measurement state for the sampled branch
};

// Builds the uniform product state over the ancillas and then describes the
// binary projective test {P_staircase, 1 - P_staircase}.
struct PostselectEnsemble {
  double success_probability = 0.0;
  SparseState success_state;
  SparseState failure_state;  // undefined when success_probability is 1
  bool certain = false;       // no failure branch exists
};

inline PostselectEnsemble prepare_catalyst_ensemble(
    int n, const std::vector<std::string>& y_ids, RegisterPtr reg) {
  if (n < 2) throw ValidationError("catalyst needs n >= 2");
  if (y_ids.size() != static_cast<std::size_t>(n - 1))
    throw ValidationError("catalyst over " + std::to_string(n - 1) +
                          " ancillas, got " + std::to_string(y_ids.size()));
  if (n > 24)
    throw ValidationError("post-selection above n = 24 would enumerate 2^" +
                          std::to_string(n - 1) + " configurations");
  const auto pos = reg->positions(y_ids);

  const std::size_t count = std::size_t{1} << (n - 1);
  const double amp = 1.0 / std::sqrt(static_cast<double>(count));
  AmpMap product;
  product.reserve(count);
  for (std::size_t bits = 0; bits < count; ++bits) {
    BasisConfig c(std::vector<std::uint8_t>(reg->size(), 0));
    for (int i = 0; i < n - 1; ++i)
      if (bits & (std::size_t{1} << i)) c.occ[pos[i]] = 1;
    product.emplace(std::move(c), Cplx(amp, 0.0));
  }

  // Split by the staircase projector.
  AmpMap hit, miss;
  double p = 0.0;
  std::vector<BasisConfig> staircases;
  staircases.reserve(n);
  for (int j = 0; j < n; ++j) {
    BasisConfig c(std::vector<std::uint8_t>(reg->size(), 0));
    for (int i = 0; i < j; ++i) c.occ[pos[i]] = 1;
    staircases.push_back(std::move(c));
  }
  for (auto& [c, a] : product) {
    const bool is_stair =
        std::find(staircases.begin(), staircases.end(), c) != staircases.end();
    if (is_stair) {
      p += std::norm(a);
      hit.emplace(c, a);
    } else {
      miss.emplace(c, a);
    }
  }

  PostselectEnsemble out;
  out.success_probability = p;
  const double hs = 1.0 / std::sqrt(p);
  for (auto& [c, a] : hit) a *= hs;
  out.success_state = SparseState::from_map(reg, std::move(hit));
  if (1.0 - p > 1e-12) {
    const double ms = 1.0 / std::sqrt(1.0 - p);
    for (auto& [c, a] : miss) a *= ms;
    out.failure_state = SparseState::from_map(reg, std::move(miss));
  } else {
    out.certain = true;
  }
  return out;
}

inline PostselectResult prepare_catalyst_postselect(
    int n, const std::vector<std::string>& y_ids, RegisterPtr reg,
    std::uint64_t seed) {
  PostselectEnsemble e = prepare_catalyst_ensemble(n, y_ids, std::move(reg));
  Rng rng(seed);
  PostselectResult out;
  out.success_probability = e.success_probability;
  out.success = e.certain || rng.uniform01() < e.success_probability;
  out.state = out.success ? std::move(e.success_state)
                          : std::move(e.failure_state);
  return out;
}

}  // namespace ssrlab
