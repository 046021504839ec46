#pragma once

// Unitaries on an ordered mode subset. Two storage forms:
//   - Dense: explicit matrix over the subset occupation basis (small dims).
//   - Permutation: an explicit bijection on listed configurations, identity
//     elsewhere. This is what makes large catalyst registers tractable: the
//     conditioned gates of the catalysis procedure touch O(n) configurations
//     of an exponentially large subset space.
//
// Subset basis convention: occupation vectors follow the target order as
// given, enumerated lexicographically (first target most significant).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ssrlab/linalg.hpp"
#include "ssrlab/modes.hpp"
#include "ssrlab/state.hpp"

namespace ssrlab {

// Lexicographic enumeration of occupation vectors for per-target dims.
class SubsetBasis {
 public:
  explicit SubsetBasis(std::vector<int> dims) : dims_(std::move(dims)) {
    dim_ = 1;
    for (int d : dims_) {
      if (d < 1) throw ValidationError("subset dimension must be >= 1");
      dim_ *= static_cast<std::size_t>(d);
    }
  }

  std::size_t dim() const { return dim_; }
  const std::vector<int>& dims() const { return dims_; }

  std::size_t index_of(const BasisConfig& c) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (c[i] >= dims_[i])
        throw ValidationError("subset config exceeds mode dimension");
      idx = idx * static_cast<std::size_t>(dims_[i]) +
            static_cast<std::size_t>(c[i]);
    }
    return idx;
  }

  BasisConfig config_of(std::size_t idx) const {
    std::vector<std::uint8_t> occ(dims_.size());
    for (std::size_t i = dims_.size(); i-- > 0;) {
      occ[i] = static_cast<std::uint8_t>(idx % dims_[i]);
      idx /= dims_[i];
    }
    return BasisConfig(std::move(occ));
  }

 private:
  std::vector<int> dims_;
  std::size_t dim_ = 1;
};

using ConfigMap = std::unordered_map<BasisConfig, BasisConfig, BasisConfigHash>;

class LocalOperator {
 public:
  enum class Kind { Dense, Permutation };

  static LocalOperator dense(std::vector<int> dims, Matrix m) {
    SubsetBasis basis(dims);
    if (static_cast<std::size_t>(m.rows()) != basis.dim() ||
        static_cast<std::size_t>(m.cols()) != basis.dim())
      throw ValidationError("operator matrix does not match subset dimension");
    if (!is_unitary(m))
      throw ValidationError("operator matrix is not unitary");
    LocalOperator op;
    op.kind_ = Kind::Dense;
    op.dims_ = std::move(dims);
    op.matrix_ = std::move(m);
    return op;
  }

  static LocalOperator identity(std::vector<int> dims) {
    LocalOperator op;
    op.kind_ = Kind::Permutation;
    op.dims_ = std::move(dims);
    return op;
  }

  // Bijection on listed configs, identity on all others. The mapping must be
  // closed: every image is itself a listed source.
  static LocalOperator permutation(std::vector<int> dims, ConfigMap mapping) {
    LocalOperator op;
    op.kind_ = Kind::Permutation;
    op.dims_ = std::move(dims);
    for (auto it = mapping.begin(); it != mapping.end();) {
      if (it->first == it->second)
        it = mapping.erase(it);
      else
        ++it;
    }
    for (const auto& [from, to] : mapping) {
      check_config_dims(op.dims_, from);
      check_config_dims(op.dims_, to);
      if (mapping.find(to) == mapping.end())
        throw ValidationError("permutation mapping is not closed");
    }
    std::unordered_map<BasisConfig, int, BasisConfigHash> seen;
    for (const auto& [from, to] : mapping)
      if (++seen[to] > 1)
        throw ValidationError("permutation mapping is not injective");
    op.mapping_ = std::move(mapping);
    return op;
  }

  // Convenience: disjoint transpositions a <-> b.
  static LocalOperator transpositions(
      std::vector<int> dims,
      const std::vector<std::pair<BasisConfig, BasisConfig>>& pairs) {
    ConfigMap m;
    for (const auto& [a, b] : pairs) {
      if (a == b) continue;
      if (!m.emplace(a, b).second || !m.emplace(b, a).second)
        throw ValidationError("transposition pairs are not disjoint");
    }
    return permutation(std::move(dims), std::move(m));
  }

  Kind kind() const { return kind_; }
  const std::vector<int>& dims() const { return dims_; }

  std::size_t dim() const {
    std::size_t d = 1;
    for (int x : dims_) d *= static_cast<std::size_t>(x);
    return d;
  }

  const Matrix& matrix() const {
    if (kind_ != Kind::Dense) throw InternalError("operator is not dense");
    return matrix_;
  }

  const ConfigMap& mapping() const {
    if (kind_ != Kind::Permutation)
      throw InternalError("operator is not a permutation");
    return mapping_;
  }

  bool is_identity() const {
    if (kind_ == Kind::Permutation) return mapping_.empty();
    return max_abs(Matrix(matrix_ - Matrix::Identity(matrix_.rows(),
                                                      matrix_.cols()))) <=
           1e-12;
  }

  LocalOperator adjoint() const {
    if (kind_ == Kind::Dense) return dense(dims_, matrix_.adjoint());
    ConfigMap inv;
    for (const auto& [from, to] : mapping_) inv.emplace(to, from);
    return permutation(dims_, std::move(inv));
  }

  Matrix to_dense(std::size_t max_dim = 4096) const {
    const std::size_t d = dim();
    if (d > max_dim)
      throw ValidationError("operator too large to densify (dim " +
                            std::to_string(d) + ")");
    if (kind_ == Kind::Dense) return matrix_;
    SubsetBasis basis(dims_);
    Matrix m = Matrix::Identity(d, d);
    for (const auto& [from, to] : mapping_) {
      const std::size_t f = basis.index_of(from);
      const std::size_t t = basis.index_of(to);
      m(f, f) = 0.0;
      m(t, f) = 1.0;
    }
    return m;
  }

  // Sector blocks this operator was assembled from, when applicable.
  const std::optional<std::map<int, Matrix>>& sector_blocks() const {
    return sector_blocks_;
  }
  void set_sector_blocks(std::map<int, Matrix> blocks) {
    sector_blocks_ = std::move(blocks);
  }

  friend LocalOperator compose(const LocalOperator& after,
                               const LocalOperator& before);

 private:
  static void check_config_dims(const std::vector<int>& dims,
                                const BasisConfig& c) {
    if (c.size() != dims.size())
      throw ValidationError("config arity does not match operator");
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (c[i] >= dims[i])
        throw ValidationError("config exceeds operator mode dimension");
  }

  Kind kind_ = Kind::Permutation;
  std::vector<int> dims_;
  Matrix matrix_;     // Dense
  ConfigMap mapping_; // Permutation
  std::optional<std::map<int, Matrix>> sector_blocks_;
};

// Applies `before` first, then `after`.
inline LocalOperator compose(const LocalOperator& after,
                             const LocalOperator& before) {
  if (after.dims() != before.dims())
    throw ValidationError("composed operators have different shapes");
  using Kind = LocalOperator::Kind;
  if (after.kind_ == Kind::Permutation && before.kind_ == Kind::Permutation) {
    auto map_or_id = [](const ConfigMap& m, const BasisConfig& c) {
      auto it = m.find(c);
      return it == m.end() ? c : it->second;
    };
    ConfigMap out;
    auto consider = [&](const BasisConfig& c) {
      out[c] = map_or_id(after.mapping_, map_or_id(before.mapping_, c));
    };
    for (const auto& [c, d] : before.mapping_) consider(c);
    for (const auto& [c, d] : after.mapping_) consider(c);
    return LocalOperator::permutation(after.dims(), std::move(out));
  }
  return LocalOperator::dense(after.dims(),
                              after.to_dense() * before.to_dense());
}

namespace detail {

inline std::vector<int> subset_dims(const Register& reg,
                                    const std::vector<std::size_t>& positions) {
  std::vector<int> dims;
  dims.reserve(positions.size());
  for (std::size_t p : positions) dims.push_back(reg.dim(p));
  return dims;
}

inline bool is_identity_embedding(const std::vector<std::size_t>& positions,
                                  std::size_t register_size) {
  if (positions.size() != register_size) return false;
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (positions[i] != i) return false;
  return true;
}

inline BasisConfig replace_at(const BasisConfig& c,
                              const std::vector<std::size_t>& positions,
                              const BasisConfig& sub) {
  BasisConfig out = c;
  for (std::size_t i = 0; i < positions.size(); ++i)
    out.occ[positions[i]] = static_cast<std::uint8_t>(sub[i]);
  return out;
}

}  // namespace detail

// op (x) identity embedding into the full register.
inline SparseState apply_local(const SparseState& state,
                               const LocalOperator& op,
                               const std::vector<std::string>& target_ids) {
  const Register& reg = *state.reg();
  const auto positions = reg.positions(target_ids);
  const auto dims = detail::subset_dims(reg, positions);
  if (dims != op.dims()) {
    std::size_t want = 1;
    for (int d : dims) want *= static_cast<std::size_t>(d);
    throw ValidationError("operator dimension " + std::to_string(op.dim()) +
                          " does not match target dimension " +
                          std::to_string(want));
  }

  AmpMap out;
  out.reserve(state.support_size() * 2);

  if (op.kind() == LocalOperator::Kind::Permutation) {
    const ConfigMap& mapping = op.mapping();
    const bool whole = detail::is_identity_embedding(positions, reg.size());
    for (const auto& [c, a] : state.amplitudes()) {
      if (whole) {
        auto it = mapping.find(c);
        out.emplace(it == mapping.end() ? c : it->second, a);
      } else {
        const BasisConfig sub = detail::restrict_config(c, positions);
        auto it = mapping.find(sub);
        if (it == mapping.end())
          out.emplace(c, a);
        else
          out.emplace(detail::replace_at(c, positions, it->second), a);
      }
    }
  } else {
    const Matrix& m = op.matrix();
    SubsetBasis basis(op.dims());
    for (const auto& [c, a] : state.amplitudes()) {
      const BasisConfig sub = detail::restrict_config(c, positions);
      const std::size_t col = basis.index_of(sub);
      for (std::size_t row = 0; row < basis.dim(); ++row) {
        const Cplx entry = m(row, col);
        if (std::abs(entry) == 0.0) continue;
        out[detail::replace_at(c, positions, basis.config_of(row))] +=
            entry * a;
      }
    }
  }

  return SparseState::from_map(state.reg(), std::move(out));
}

}  // namespace ssrlab
