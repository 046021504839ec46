#pragma once

// Mode universe: a register is an ordered list of modes, each a fermion or
// boson degree of freedom with an occupancy cap. The computational basis of
// the full space is the set of occupation-number assignments. Restricted
// modes contribute to the conserved charge; free modes are the only ones a
// party may measure.

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssrlab/errors.hpp"

namespace ssrlab {

enum class Statistics { Fermion, Boson };
enum class Party { Alice, Bob };

inline const char* to_string(Statistics s) {
  return s == Statistics::Fermion ? "fermion" : "boson";
}
inline const char* to_string(Party p) {
  return p == Party::Alice ? "alice" : "bob";
}

struct ModeSpec {
  std::string id;
  Statistics statistics = Statistics::Fermion;
  int q_max = 1;
  Party owner = Party::Alice;
  bool restricted = false;
  bool free = false;

  void validate() const {
    if (id.empty()) throw ValidationError("mode id must be nonempty");
    if (statistics == Statistics::Fermion && q_max != 1)
      throw ValidationError("fermion mode '" + id + "' must have q_max = 1");
    if (statistics == Statistics::Boson && q_max < 1)
      throw ValidationError("boson mode '" + id + "' must have q_max >= 1");
    if (q_max > 255)
      throw ValidationError("mode '" + id + "': q_max above 255 unsupported");
    if (restricted && free)
      throw ValidationError("mode '" + id +
                            "' cannot be both restricted and free");
  }
};

// Occupation-number assignment, one entry per register position.
// Stored as bytes; ModeSpec::validate caps q_max at 255.
struct BasisConfig {
  std::vector<std::uint8_t> occ;

  BasisConfig() = default;
  explicit BasisConfig(std::vector<std::uint8_t> o) : occ(std::move(o)) {}
  explicit BasisConfig(const std::vector<int>& o) {
    occ.reserve(o.size());
    for (int v : o) occ.push_back(static_cast<std::uint8_t>(v));
  }

  std::size_t size() const { return occ.size(); }
  int operator[](std::size_t i) const { return occ[i]; }

  std::vector<int> as_ints() const {
    return std::vector<int>(occ.begin(), occ.end());
  }

  friend bool operator==(const BasisConfig& a, const BasisConfig& b) {
    return a.occ == b.occ;
  }
  friend bool operator<(const BasisConfig& a, const BasisConfig& b) {
    return a.occ < b.occ;
  }
};

struct BasisConfigHash {
  std::size_t operator()(const BasisConfig& c) const {
    // FNV-1a over the occupation bytes.
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint8_t b : c.occ) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

class Register {
 public:
  explicit Register(std::vector<ModeSpec> specs) : modes_(std::move(specs)) {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      modes_[i].validate();
      if (!index_.emplace(modes_[i].id, i).second)
        throw ValidationError("duplicate mode id '" + modes_[i].id + "'");
    }
  }

  std::size_t size() const { return modes_.size(); }
  const std::vector<ModeSpec>& modes() const { return modes_; }
  const ModeSpec& mode(std::size_t i) const { return modes_[i]; }

  bool has(const std::string& id) const { return index_.count(id) != 0; }

  std::size_t position(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw ValidationError("unknown mode id '" + id + "'");
    return it->second;
  }

  std::vector<std::size_t> positions(const std::vector<std::string>& ids) const {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    std::vector<bool> seen(modes_.size(), false);
    for (const auto& id : ids) {
      const std::size_t p = position(id);
      if (seen[p]) throw ValidationError("repeated target mode '" + id + "'");
      seen[p] = true;
      out.push_back(p);
    }
    return out;
  }

  int dim(std::size_t i) const { return modes_[i].q_max + 1; }

  void check_config(const BasisConfig& c) const {
    if (c.size() != modes_.size())
      throw ValidationError("config length does not match register size");
    for (std::size_t i = 0; i < modes_.size(); ++i)
      if (c[i] > modes_[i].q_max)
        throw ValidationError("occupancy " + std::to_string(c[i]) +
                              " exceeds q_max of mode '" + modes_[i].id + "'");
  }

  friend bool operator==(const Register& a, const Register& b) {
    if (a.modes_.size() != b.modes_.size()) return false;
    for (std::size_t i = 0; i < a.modes_.size(); ++i) {
      const ModeSpec& x = a.modes_[i];
      const ModeSpec& y = b.modes_[i];
      if (x.id != y.id || x.statistics != y.statistics || x.q_max != y.q_max ||
          x.owner != y.owner || x.restricted != y.restricted ||
          x.free != y.free)
        return false;
    }
    return true;
  }

 private:
  std::vector<ModeSpec> modes_;
  std::unordered_map<std::string, std::size_t> index_;
};

using RegisterPtr = std::shared_ptr<const Register>;

inline RegisterPtr new_register(std::vector<ModeSpec> specs) {
  return std::make_shared<const Register>(std::move(specs));
}

inline bool same_register(const RegisterPtr& a, const RegisterPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace ssrlab
