#pragma once

// Sparse state vectors over the occupation-number basis, plus the reduced
// density matrices obtained from them. Amplitudes are stored in a hash map
// keyed by configuration; zero amplitudes are never stored.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ssrlab/linalg.hpp"
#include "ssrlab/modes.hpp"
#include "ssrlab/rng.hpp"

namespace ssrlab {

// Stored amplitudes below this magnitude are dropped after every operation.
inline constexpr double kAmplitudeFloor = 1e-15;
// Renormalize only when the norm drifts further than this from 1.
inline constexpr double kNormDriftTolerance = 1e-12;

using AmpMap = std::unordered_map<BasisConfig, Cplx, BasisConfigHash>;

class SparseState {
 public:
  SparseState() = default;

  static SparseState from_map(RegisterPtr reg, AmpMap amps) {
    SparseState s;
    s.register_ = std::move(reg);
    s.amps_ = std::move(amps);
    s.canonicalize();
    const double n = s.raw_norm();
    if (std::abs(n - 1.0) > 1e-9)
      throw ValidationError("state norm " + std::to_string(n) +
                            " too far from 1");
    if (std::abs(n - 1.0) > kNormDriftTolerance) s.scale(1.0 / n);
    return s;
  }

  const RegisterPtr& reg() const { return register_; }
  const AmpMap& amplitudes() const { return amps_; }
  std::size_t support_size() const { return amps_.size(); }

  Cplx amplitude(const BasisConfig& c) const {
    auto it = amps_.find(c);
    return it == amps_.end() ? Cplx(0.0, 0.0) : it->second;
  }

  double raw_norm() const {
    double s = 0.0;
    for (const auto& [c, a] : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  // Amplitudes sorted by configuration; the canonical external order.
  std::vector<std::pair<BasisConfig, Cplx>> sorted_amplitudes() const {
    std::vector<std::pair<BasisConfig, Cplx>> v(amps_.begin(), amps_.end());
    std::sort(v.begin(), v.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return v;
  }

 private:
  void canonicalize() {
    for (auto it = amps_.begin(); it != amps_.end();) {
      if (std::abs(it->second) < kAmplitudeFloor)
        it = amps_.erase(it);
      else
        ++it;
    }
  }

  void scale(double f) {
    for (auto& [c, a] : amps_) a *= f;
  }

  RegisterPtr register_;
  AmpMap amps_;
};

inline void require_same_register(const SparseState& a, const SparseState& b) {
  if (!same_register(a.reg(), b.reg()))
    throw ValidationError("states live on different registers");
}

inline SparseState basis_state(RegisterPtr reg, const BasisConfig& config) {
  reg->check_config(config);
  AmpMap m;
  m.emplace(config, Cplx(1.0, 0.0));
  return SparseState::from_map(std::move(reg), std::move(m));
}

inline SparseState basis_state(RegisterPtr reg, const std::vector<int>& occ) {
  return basis_state(std::move(reg), BasisConfig(occ));
}

struct SuperposeResult {
  SparseState state;
  double factor = 1.0;  // multiplier applied to reach unit norm
};

inline SuperposeResult superpose(
    const std::vector<std::pair<Cplx, SparseState>>& terms) {
  if (terms.empty()) throw ValidationError("superpose needs at least one term");
  const RegisterPtr& reg = terms.front().second.reg();
  AmpMap acc;
  for (const auto& [coeff, st] : terms) {
    if (!same_register(reg, st.reg()))
      throw ValidationError("superpose terms live on different registers");
    for (const auto& [c, a] : st.amplitudes()) acc[c] += coeff * a;
  }
  double n2 = 0.0;
  for (const auto& [c, a] : acc) n2 += std::norm(a);
  const double n = std::sqrt(n2);
  if (n <= kNormDriftTolerance)
    throw ValidationError("superposition has zero norm");
  const double factor = 1.0 / n;
  for (auto& [c, a] : acc) a *= factor;
  SuperposeResult out;
  out.state = SparseState::from_map(reg, std::move(acc));
  out.factor = factor;
  return out;
}

inline Cplx inner_product(const SparseState& a, const SparseState& b) {
  require_same_register(a, b);
  const SparseState& small = a.support_size() <= b.support_size() ? a : b;
  const SparseState& large = a.support_size() <= b.support_size() ? b : a;
  Cplx s(0.0, 0.0);
  const bool small_is_a = &small == &a;
  for (const auto& [c, amp] : small.amplitudes()) {
    const Cplx other = large.amplitude(c);
    if (small_is_a)
      s += std::conj(amp) * other;
    else
      s += std::conj(other) * amp;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reduced density matrices

class DensityMatrix {
 public:
  DensityMatrix(std::vector<BasisConfig> basis, Matrix matrix)
      : basis_(std::move(basis)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() ||
        static_cast<std::size_t>(matrix_.rows()) != basis_.size())
      throw ValidationError("density matrix shape does not match basis");
    if (max_abs(Matrix(matrix_ - matrix_.adjoint())) > 1e-10)
      throw ValidationError("density matrix is not Hermitian");
    if (std::abs(matrix_.trace().real() - 1.0) > 1e-12 ||
        std::abs(matrix_.trace().imag()) > 1e-12)
      throw ValidationError("density matrix trace is not 1");
    const Eigen::VectorXd ev = hermitian_eigenvalues(matrix_);
    if (ev.minCoeff() < -1e-10)
      throw ValidationError("density matrix is not positive semidefinite");
  }

  const std::vector<BasisConfig>& basis() const { return basis_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t dim() const { return basis_.size(); }

 private:
  std::vector<BasisConfig> basis_;  // kept-subset configs, ascending
  Matrix matrix_;
};

namespace detail {

inline BasisConfig restrict_config(const BasisConfig& c,
                                   const std::vector<std::size_t>& positions) {
  std::vector<std::uint8_t> sub(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    sub[i] = static_cast<std::uint8_t>(c[positions[i]]);
  return BasisConfig(std::move(sub));
}

}  // namespace detail

inline DensityMatrix partial_trace(const SparseState& state,
                                   const std::vector<std::string>& keep_ids) {
  if (keep_ids.empty())
    throw ValidationError("partial_trace needs a nonempty keep set");
  const auto keep = state.reg()->positions(keep_ids);
  std::vector<std::size_t> rest;
  {
    std::vector<bool> kept(state.reg()->size(), false);
    for (std::size_t p : keep) kept[p] = true;
    for (std::size_t p = 0; p < state.reg()->size(); ++p)
      if (!kept[p]) rest.push_back(p);
  }

  // Basis of the kept factor: sorted unique kept-restrictions of the support.
  std::vector<BasisConfig> basis;
  basis.reserve(state.support_size());
  for (const auto& [c, a] : state.amplitudes())
    basis.push_back(detail::restrict_config(c, keep));
  std::sort(basis.begin(), basis.end());
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
  std::unordered_map<BasisConfig, int, BasisConfigHash> basis_index;
  for (std::size_t i = 0; i < basis.size(); ++i)
    basis_index.emplace(basis[i], static_cast<int>(i));

  // Group amplitudes by the traced-out part and add one outer product per
  // group; cost scales with the support, not the subset dimension.
  std::unordered_map<BasisConfig, std::vector<std::pair<int, Cplx>>,
                     BasisConfigHash>
      groups;
  for (const auto& [c, a] : state.amplitudes())
    groups[detail::restrict_config(c, rest)].push_back(
        {basis_index.at(detail::restrict_config(c, keep)), a});

  Matrix rho = Matrix::Zero(basis.size(), basis.size());
  for (const auto& [rc, entries] : groups)
    for (const auto& [i, ai] : entries)
      for (const auto& [j, aj] : entries) rho(i, j) += ai * std::conj(aj);

  return DensityMatrix(std::move(basis), std::move(rho));
}

// Trace distance between two reduced states, merging their bases.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<BasisConfig> merged = a.basis();
  merged.insert(merged.end(), b.basis().begin(), b.basis().end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::unordered_map<BasisConfig, int, BasisConfigHash> idx;
  for (std::size_t i = 0; i < merged.size(); ++i)
    idx.emplace(merged[i], static_cast<int>(i));

  auto embed = [&](const DensityMatrix& d) {
    Matrix m = Matrix::Zero(merged.size(), merged.size());
    for (std::size_t r = 0; r < d.basis().size(); ++r)
      for (std::size_t c = 0; c < d.basis().size(); ++c)
        m(idx.at(d.basis()[r]), idx.at(d.basis()[c])) = d.matrix()(r, c);
    return m;
  };
  return trace_distance(embed(a), embed(b));
}

inline double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<BasisConfig> merged = a.basis();
  merged.insert(merged.end(), b.basis().begin(), b.basis().end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::unordered_map<BasisConfig, int, BasisConfigHash> idx;
  for (std::size_t i = 0; i < merged.size(); ++i)
    idx.emplace(merged[i], static_cast<int>(i));
  auto embed = [&](const DensityMatrix& d) {
    Matrix m = Matrix::Zero(merged.size(), merged.size());
    for (std::size_t r = 0; r < d.basis().size(); ++r)
      for (std::size_t c = 0; c < d.basis().size(); ++c)
        m(idx.at(d.basis()[r]), idx.at(d.basis()[c])) = d.matrix()(r, c);
    return m;
  };
  return state_fidelity(embed(a), embed(b));
}

// ---------------------------------------------------------------------------
// Occupation-basis measurement

struct MeasurementResult {
  BasisConfig outcome;      // restriction of the config to the targets
  double probability = 0.0;
  SparseState post_state;
};

// Marginal distribution of the state over the target subset, sorted by
// outcome configuration.
inline std::vector<std::pair<BasisConfig, double>> occupation_marginal(
    const SparseState& state, const std::vector<std::string>& target_ids) {
  if (target_ids.empty())
    throw ValidationError("measurement needs a nonempty target list");
  const auto pos = state.reg()->positions(target_ids);
  std::map<BasisConfig, double> dist;
  for (const auto& [c, a] : state.amplitudes())
    dist[detail::restrict_config(c, pos)] += std::norm(a);
  return {dist.begin(), dist.end()};
}

inline MeasurementResult measure_occupation(
    const SparseState& state, const std::vector<std::string>& target_ids,
    std::uint64_t seed) {
  const auto pos = state.reg()->positions(target_ids);
  const auto dist = occupation_marginal(state, target_ids);

  Rng rng(seed);
  const double u = rng.uniform01();
  double cum = 0.0;
  BasisConfig chosen = dist.back().first;
  double p = dist.back().second;
  for (const auto& [cfg, prob] : dist) {
    cum += prob;
    if (u < cum) {
      chosen = cfg;
      p = prob;
      break;
    }
  }

  AmpMap post;
  const double scale = 1.0 / std::sqrt(p);
  for (const auto& [c, a] : state.amplitudes())
    if (detail::restrict_config(c, pos) == chosen) post.emplace(c, a * scale);

  MeasurementResult out;
  out.outcome = chosen;
  out.probability = p;
  out.post_state = SparseState::from_map(state.reg(), std::move(post));
  return out;
}

}  // namespace ssrlab
