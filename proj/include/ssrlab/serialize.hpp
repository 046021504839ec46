#pragma once

// JSON formats:
//   state     {"register": [specs], "amplitudes": [{"config", "re", "im"}]}
//   operator  {"targets": [ids], "matrix": [[{re,im}..]..]}
//             {"targets": [ids], "sector_blocks": {"k": [[..]..]}}
//   instance  {"register": [...], "total_charge": q, "psi0": [...], "psi1": [...]}
//   script    {"steps": [{"type": "apply"|"transfer"|"measure", ...}]}
// Config arrays follow register order; matrices are row-major with
// entry [r][c] = <basis r|U|basis c> over the subset basis in target order.

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ssrlab/commitment.hpp"
#include "ssrlab/modes.hpp"
#include "ssrlab/operators.hpp"
#include "ssrlab/protocol.hpp"
#include "ssrlab/state.hpp"
#include "ssrlab/superselection.hpp"

namespace ssrlab {

using Json = nlohmann::json;

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

inline Json complex_to_json(const Cplx& z) {
  return Json{{"re", z.real()}, {"im", z.imag()}};
}

inline Cplx complex_from_json(const Json& j) {
  return {field(j, "re").get<double>(), field(j, "im").get<double>()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Modes and registers

inline Json mode_to_json(const ModeSpec& m) {
  return Json{{"id", m.id},
              {"statistics", to_string(m.statistics)},
              {"q_max", m.q_max},
              {"owner", to_string(m.owner)},
              {"restricted", m.restricted},
              {"free", m.free}};
}

inline ModeSpec mode_from_json(const Json& j) {
  ModeSpec m;
  m.id = detail::field(j, "id").get<std::string>();
  const std::string stats = detail::field(j, "statistics").get<std::string>();
  if (stats == "fermion")
    m.statistics = Statistics::Fermion;
  else if (stats == "boson")
    m.statistics = Statistics::Boson;
  else
    throw ValidationError("unknown statistics '" + stats + "'");
  m.q_max = detail::field(j, "q_max").get<int>();
  const std::string owner = detail::field(j, "owner").get<std::string>();
  if (owner == "alice")
    m.owner = Party::Alice;
  else if (owner == "bob")
    m.owner = Party::Bob;
  else
    throw ValidationError("unknown owner '" + owner + "'");
  m.restricted = detail::field(j, "restricted").get<bool>();
  m.free = detail::field(j, "free").get<bool>();
  return m;
}

inline Json register_to_json(const Register& reg) {
  Json arr = Json::array();
  for (const auto& m : reg.modes()) arr.push_back(mode_to_json(m));
  return Json{{"register", arr}};
}

inline RegisterPtr register_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : detail::field(j, "register");
  if (!arr.is_array()) throw ValidationError("register must be an array");
  std::vector<ModeSpec> specs;
  for (const auto& item : arr) specs.push_back(mode_from_json(item));
  return new_register(std::move(specs));
}

// ---------------------------------------------------------------------------
// States

inline Json amplitudes_to_json(const SparseState& s) {
  Json arr = Json::array();
  for (const auto& [c, a] : s.sorted_amplitudes()) {
    arr.push_back(Json{{"config", c.as_ints()},
                       {"re", a.real()},
                       {"im", a.imag()}});
  }
  return arr;
}

inline Json state_to_json(const SparseState& s) {
  return Json{{"register", register_to_json(*s.reg())["register"]},
              {"amplitudes", amplitudes_to_json(s)}};
}

inline AmpMap amplitudes_from_json(const Json& arr, const Register& reg) {
  if (!arr.is_array()) throw ValidationError("amplitudes must be an array");
  AmpMap m;
  for (const auto& item : arr) {
    const Json& cfg = detail::field(item, "config");
    if (!cfg.is_array())
      throw ValidationError("amplitude config must be an array");
    BasisConfig c(cfg.get<std::vector<int>>());
    reg.check_config(c);
    const Cplx a(detail::field(item, "re").get<double>(),
                 detail::field(item, "im").get<double>());
    if (!m.emplace(c, a).second)
      throw ValidationError("duplicate amplitude config");
  }
  return m;
}

inline SparseState state_from_json(const Json& j) {
  RegisterPtr reg = register_from_json(j);
  AmpMap m = amplitudes_from_json(detail::field(j, "amplitudes"), *reg);
  return SparseState::from_map(std::move(reg), std::move(m));
}

// ---------------------------------------------------------------------------
// Operators

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(detail::complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("matrix must be a nonempty array of rows");
  const std::size_t n = j.size();
  Matrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != n)
      throw ValidationError("matrix must be square");
    for (std::size_t c = 0; c < n; ++c)
      m(r, c) = detail::complex_from_json(row[c]);
  }
  return m;
}

struct OperatorFile {
  std::vector<std::string> targets;
  LocalOperator op;
};

inline Json operator_to_json(const std::vector<std::string>& targets,
                             const LocalOperator& op) {
  if (op.sector_blocks()) {
    Json blocks = Json::object();
    for (const auto& [k, b] : *op.sector_blocks())
      blocks[std::to_string(k)] = matrix_to_json(b);
    return Json{{"targets", targets}, {"sector_blocks", blocks}};
  }
  return Json{{"targets", targets}, {"matrix", matrix_to_json(op.to_dense())}};
}

inline OperatorFile operator_from_json(const Json& j, const Register& reg) {
  OperatorFile out;
  out.targets = detail::field(j, "targets").get<std::vector<std::string>>();
  const auto positions = reg.positions(out.targets);
  const auto dims = detail::subset_dims(reg, positions);
  std::size_t want = 1;
  for (int d : dims) want *= static_cast<std::size_t>(d);

  if (j.contains("matrix")) {
    Matrix m = matrix_from_json(j["matrix"]);
    if (static_cast<std::size_t>(m.rows()) != want)
      throw ValidationError("matrix dimension " + std::to_string(m.rows()) +
                            " does not match target dimension " +
                            std::to_string(want));
    out.op = LocalOperator::dense(dims, std::move(m));
  } else if (j.contains("sector_blocks")) {
    std::map<ChargeValue, Matrix> blocks;
    for (const auto& [key, val] : j["sector_blocks"].items())
      blocks[std::stoi(key)] = matrix_from_json(val);
    out.op = sector_conditioned(blocks, out.targets, reg);
  } else {
    throw ValidationError("operator needs 'matrix' or 'sector_blocks'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commitment instances

inline Json instance_to_json(const CommitmentInstance& inst) {
  return Json{{"register", register_to_json(*inst.reg)["register"]},
              {"total_charge", inst.total_charge},
              {"psi0", amplitudes_to_json(inst.psi0)},
              {"psi1", amplitudes_to_json(inst.psi1)}};
}

inline CommitmentInstance instance_from_json(const Json& j) {
  CommitmentInstance inst;
  inst.reg = register_from_json(j);
  inst.total_charge = detail::field(j, "total_charge").get<int>();
  inst.psi0 = SparseState::from_map(
      inst.reg, amplitudes_from_json(detail::field(j, "psi0"), *inst.reg));
  inst.psi1 = SparseState::from_map(
      inst.reg, amplitudes_from_json(detail::field(j, "psi1"), *inst.reg));
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// Protocol scripts and transcripts

inline Party party_from_json(const Json& j) {
  const std::string s = j.get<std::string>();
  if (s == "alice") return Party::Alice;
  if (s == "bob") return Party::Bob;
  throw ValidationError("unknown party '" + s + "'");
}

// `load_operator` resolves an "operator_file" reference to its parsed JSON;
// inline "operator" objects are also accepted.
inline std::vector<ProtocolStep> script_from_json(
    const Json& j, const Register& reg,
    const std::function<Json(const std::string&)>& load_operator) {
  const Json& arr = j.is_array() ? j : detail::field(j, "steps");
  if (!arr.is_array()) throw ValidationError("script steps must be an array");
  std::vector<ProtocolStep> steps;
  for (const auto& sj : arr) {
    const std::string type = detail::field(sj, "type").get<std::string>();
    if (type == "apply") {
      ApplyStep step;
      step.party = party_from_json(detail::field(sj, "party"));
      Json op_json;
      if (sj.contains("operator_file")) {
        if (!load_operator)
          throw ValidationError("script references an operator file but no "
                                "loader was provided");
        op_json = load_operator(sj["operator_file"].get<std::string>());
      } else if (sj.contains("operator")) {
        op_json = sj["operator"];
      } else {
        throw ValidationError("apply step needs 'operator' or "
                              "'operator_file'");
      }
      OperatorFile of = operator_from_json(op_json, reg);
      step.targets = of.targets;
      step.op = std::move(of.op);
      steps.push_back(std::move(step));
    } else if (type == "transfer") {
      TransferStep step;
      step.mode = detail::field(sj, "mode").get<std::string>();
      step.from = party_from_json(detail::field(sj, "from"));
      step.to = party_from_json(detail::field(sj, "to"));
      steps.push_back(std::move(step));
    } else if (type == "measure") {
      MeasureStep step;
      step.party = party_from_json(detail::field(sj, "party"));
      step.targets =
          detail::field(sj, "targets").get<std::vector<std::string>>();
      step.seed = detail::field(sj, "seed").get<std::uint64_t>();
      steps.push_back(std::move(step));
    } else {
      throw ValidationError("unknown step type '" + type + "'");
    }
  }
  return steps;
}

inline Json ownership_to_json(const OwnershipMap& owners) {
  Json j = Json::object();
  for (const auto& [id, p] : owners) j[id] = to_string(p);
  return j;
}

inline Json transcript_to_json(const Transcript& t) {
  Json records = Json::array();
  for (const auto& r : t.records) {
    Json rec{{"step", r.index},
             {"type", r.kind},
             {"ownership", ownership_to_json(r.ownership)}};
    if (r.kind == "apply") {
      rec["party"] = to_string(r.party);
      rec["targets"] = r.targets;
      rec["allowed"] = r.legality;
    } else if (r.kind == "transfer") {
      rec["mode"] = r.mode;
      rec["from"] = to_string(r.from);
      rec["to"] = to_string(r.to);
    } else {
      rec["party"] = to_string(r.party);
      rec["targets"] = r.targets;
      rec["seed"] = r.seed;
      rec["outcome"] = r.outcome;
      rec["probability"] = r.probability;
    }
    records.push_back(std::move(rec));
  }
  return Json{{"records", records},
              {"final_ownership", ownership_to_json(t.final_ownership)}};
}

// ---------------------------------------------------------------------------
// Files

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ValidationError("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
}

}  // namespace ssrlab
