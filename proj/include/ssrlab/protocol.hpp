#pragma once

// Two-party protocol execution under the model's rules: a party may apply a
// superselection-respecting unitary to modes it owns, hand a mode to the
// other party, or measure the occupation of its free modes. Restricted and
// free flags never change; ownership does.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ssrlab/modes.hpp"
#include "ssrlab/operators.hpp"
#include "ssrlab/state.hpp"
#include "ssrlab/superselection.hpp"

namespace ssrlab {

// Register-size cap honored by the runtime's ancilla allocator and by the
// CLI experiment drivers. Library registers themselves are unbounded.
inline std::size_t max_modes_limit() {
  if (const char* env = std::getenv("SSRLAB_MAX_MODES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

struct ApplyStep {
  Party party = Party::Alice;
  std::vector<std::string> targets;
  LocalOperator op;
};

struct TransferStep {
  std::string mode;
  Party from = Party::Alice;
  Party to = Party::Bob;
};

struct MeasureStep {
  Party party = Party::Alice;
  std::vector<std::string> targets;
  std::uint64_t seed = 0;
};

using ProtocolStep = std::variant<ApplyStep, TransferStep, MeasureStep>;

using OwnershipMap = std::map<std::string, Party>;

inline OwnershipMap initial_ownership(const Register& reg) {
  OwnershipMap m;
  for (const auto& spec : reg.modes()) m.emplace(spec.id, spec.owner);
  return m;
}

struct OwnershipView {
  std::vector<std::string> owned;             // register order
  std::vector<std::string> owned_free;
  std::vector<std::string> owned_restricted;
};

inline OwnershipView ownership_view(const Register& reg,
                                    const OwnershipMap& owners, Party party) {
  OwnershipView v;
  for (const auto& spec : reg.modes()) {
    if (owners.at(spec.id) != party) continue;
    v.owned.push_back(spec.id);
    if (spec.free) v.owned_free.push_back(spec.id);
    if (spec.restricted) v.owned_restricted.push_back(spec.id);
  }
  return v;
}

inline OwnershipView ownership_view(const Register& reg, Party party) {
  return ownership_view(reg, initial_ownership(reg), party);
}

struct StepRecord {
  std::size_t index = 0;
  std::string kind;                       // "apply" | "transfer" | "measure"
  Party party = Party::Alice;
  std::vector<std::string> targets;       // apply / measure
  bool legality = false;                  // apply
  std::string mode;                       // transfer
  Party from = Party::Alice;
  Party to = Party::Bob;
  std::vector<int> outcome;               // measure
  double probability = 0.0;
  std::uint64_t seed = 0;
  OwnershipMap ownership;                 // snapshot after the step
};

struct Transcript {
  std::vector<StepRecord> records;
  OwnershipMap final_ownership;
};

struct RunResult {
  SparseState final_state;
  Transcript transcript;
};

inline RunResult run_protocol(const RegisterPtr& reg,
                              const SparseState& initial_state,
                              const std::vector<ProtocolStep>& steps) {
  if (!same_register(reg, initial_state.reg()))
    throw ValidationError("initial state does not match register");
  OwnershipMap owners = initial_ownership(*reg);
  SparseState state = initial_state;
  Transcript transcript;

  for (std::size_t i = 0; i < steps.size(); ++i) {
    StepRecord rec;
    rec.index = i;

    if (const auto* apply = std::get_if<ApplyStep>(&steps[i])) {
      rec.kind = "apply";
      rec.party = apply->party;
      rec.targets = apply->targets;
      for (const auto& id : apply->targets) {
        if (!reg->has(id))
          throw ValidationError("step " + std::to_string(i) +
                                ": unknown mode '" + id + "'");
        if (owners.at(id) != apply->party)
          throw OwnershipError("step " + std::to_string(i) + ": " +
                                   std::string(to_string(apply->party)) +
                                   " does not own mode '" + id + "'",
                               i);
      }
      const LegalityCheck check = is_allowed(apply->op, apply->targets, *reg);
      if (!check.allowed)
        throw LegalityError(
            "step " + std::to_string(i) + ": operator violates the rule",
            check.witness, i);
      state = apply_allowed(state, apply->op, apply->targets);
      rec.legality = true;
    } else if (const auto* transfer = std::get_if<TransferStep>(&steps[i])) {
      rec.kind = "transfer";
      rec.mode = transfer->mode;
      rec.from = transfer->from;
      rec.to = transfer->to;
      rec.party = transfer->from;
      if (!reg->has(transfer->mode))
        throw ValidationError("step " + std::to_string(i) +
                              ": unknown mode '" + transfer->mode + "'");
      if (owners.at(transfer->mode) != transfer->from)
        throw OwnershipError("step " + std::to_string(i) + ": mode '" +
                                 transfer->mode + "' is not owned by " +
                                 to_string(transfer->from),
                             i);
      owners[transfer->mode] = transfer->to;
    } else {
      const auto& measure = std::get<MeasureStep>(steps[i]);
      rec.kind = "measure";
      rec.party = measure.party;
      rec.targets = measure.targets;
      rec.seed = measure.seed;
      for (const auto& id : measure.targets) {
        if (!reg->has(id))
          throw ValidationError("step " + std::to_string(i) +
                                ": unknown mode '" + id + "'");
        if (owners.at(id) != measure.party)
          throw OwnershipError("step " + std::to_string(i) + ": " +
                                   std::string(to_string(measure.party)) +
                                   " does not own mode '" + id + "'",
                               i);
        if (!reg->mode(reg->position(id)).free)
          throw MeasurementError("step " + std::to_string(i) + ": mode '" +
                                     id + "' is not free",
                                 i);
      }
      MeasurementResult r = measure_occupation(state, measure.targets,
                                               measure.seed);
      rec.outcome = r.outcome.as_ints();
      rec.probability = r.probability;
      state = std::move(r.post_state);
    }

    rec.ownership = owners;
    transcript.records.push_back(std::move(rec));
  }

  transcript.final_ownership = owners;
  return RunResult{std::move(state), std::move(transcript)};
}

// Appends `count` zero-occupied modes and extends the state accordingly.
// Bounded by max_modes_limit().
inline std::pair<RegisterPtr, SparseState> allocate_ancillas(
    const RegisterPtr& reg, const SparseState& state, int count,
    const ModeSpec& prototype, const std::string& id_prefix) {
  if (count < 0) throw ValidationError("ancilla count must be >= 0");
  if (reg->size() + static_cast<std::size_t>(count) > max_modes_limit())
    throw ValidationError("ancilla allocation exceeds mode cap " +
                          std::to_string(max_modes_limit()));
  std::vector<ModeSpec> specs = reg->modes();
  for (int i = 0; i < count; ++i) {
    ModeSpec m = prototype;
    m.id = id_prefix + "_" + std::to_string(i);
    specs.push_back(std::move(m));
  }
  RegisterPtr extended = new_register(std::move(specs));
  AmpMap amps;
  amps.reserve(state.support_size());
  for (const auto& [c, a] : state.amplitudes()) {
    BasisConfig ext = c;
    ext.occ.resize(extended->size(), 0);
    amps.emplace(std::move(ext), a);
  }
  return {extended, SparseState::from_map(extended, std::move(amps))};
}

}  // namespace ssrlab
