#pragma once

// Drivers behind the CLI subcommands. Everything here is deterministic for
// a fixed seed: trial sub-seeds are derived by counter, rows are emitted in
// (n, trial) order, and floats print with 17 significant digits.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ssrlab/catalysis.hpp"
#include "ssrlab/commitment.hpp"
#include "ssrlab/serialize.hpp"

namespace ssrlab {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// swap-scaling

struct SwapScalingRow {
  int n = 0;
  double fidelity = 0.0;
  double infidelity = 0.0;
  double tv_distance = 0.0;
  double p_k_min = 0.0;
  double p_k_max = 0.0;
  double wall_time_ms = 0.0;
};

struct SwapScalingConfig {
  std::vector<int> ns;  // ascending
  std::optional<double> alpha;
  std::optional<double> beta;
  int trials = 1;
  std::uint64_t seed = 0;
  bool timing = false;  // measured wall time; 0.0 keeps output reproducible
};

inline std::vector<SwapScalingRow> run_swap_scaling(
    const SwapScalingConfig& cfg) {
  std::vector<SwapScalingRow> rows;
  std::uint64_t counter = 0;
  for (int n : cfg.ns) {
    for (int t = 0; t < cfg.trials; ++t) {
      Cplx alpha, beta;
      if (cfg.alpha && cfg.beta) {
        alpha = *cfg.alpha;
        beta = *cfg.beta;
      } else {
        Rng rng(derive_subseed(cfg.seed, counter));
        std::tie(alpha, beta) = rng.random_qubit();
      }
      ++counter;

      const auto start = std::chrono::steady_clock::now();
      const SwapAnalysis a = analyze_swap(n, alpha, beta);
      const auto stop = std::chrono::steady_clock::now();

      SwapScalingRow row;
      row.n = n;
      row.fidelity = a.fidelity_to_ideal;
      row.infidelity = 1.0 - a.fidelity_to_ideal;
      row.tv_distance = tv_distance(a.qr_distribution, a.ideal_distribution);
      double pmin = 1.0, pmax = 0.0;
      for (const auto& [k, p] : a.qr_distribution) {
        if (p <= 0.0) continue;
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
      }
      row.p_k_min = pmin;
      row.p_k_max = pmax;
      if (cfg.timing) {
        row.wall_time_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string swap_scaling_csv(const std::vector<SwapScalingRow>& rows) {
  std::string out =
      "n,fidelity,infidelity,tv_distance,p_k_min,p_k_max,wall_time_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + format_double(r.fidelity) + "," +
           format_double(r.infidelity) + "," + format_double(r.tv_distance) +
           "," + format_double(r.p_k_min) + "," + format_double(r.p_k_max) +
           "," + format_double(r.wall_time_ms) + "\n";
  }
  return out;
}

inline Json swap_scaling_json(const std::vector<SwapScalingRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"n", r.n},
                       {"fidelity", r.fidelity},
                       {"infidelity", r.infidelity},
                       {"tv_distance", r.tv_distance},
                       {"p_k_min", r.p_k_min},
                       {"p_k_max", r.p_k_max},
                       {"wall_time_ms", r.wall_time_ms}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// attack-demo

struct AttackDemoResult {
  Json report;
  bool ok = false;  // concealing and fidelity >= 1 - 1e-10
};

inline AttackDemoResult run_attack_demo(const CommitmentInstance& inst) {
  const AttackReport report = assemble_attack(inst);

  Json sectors = Json::array();
  for (const auto& rec : report.concealing.sectors) {
    const double fid = report.per_sector_fidelity.count(rec.k)
                           ? report.per_sector_fidelity.at(rec.k)
                           : 0.0;
    sectors.push_back(Json{{"k", rec.k},
                           {"p0", rec.p0},
                           {"p1", rec.p1},
                           {"tdist", rec.tdist},
                           {"fidelity", fid}});
  }

  AttackDemoResult out;
  out.report = Json{{"Q_R", inst.total_charge},
                    {"sectors", sectors},
                    {"concealing", report.concealing.concealing()},
                    {"attack_fidelity", report.overall_fidelity}};
  out.ok = report.concealing.concealing() &&
           report.overall_fidelity >= 1.0 - 1e-10;
  return out;
}

// ---------------------------------------------------------------------------
// validate-op

struct ValidateOpResult {
  bool allowed = false;
  std::string text;
};

inline std::string config_text(const std::vector<int>& c) {
  std::string s = "|";
  for (std::size_t i = 0; i < c.size(); ++i)
    s += (i ? "," : "") + std::to_string(c[i]);
  return s + ">";
}

inline ValidateOpResult run_validate_op(const Json& op_json,
                                        const Json& register_json) {
  RegisterPtr reg = register_from_json(register_json);
  OperatorFile of = operator_from_json(op_json, *reg);
  const LegalityCheck check = is_allowed(of.op, of.targets, *reg);
  ValidateOpResult out;
  out.allowed = check.allowed;
  if (check.allowed) {
    out.text = "ALLOWED\n";
  } else {
    out.text = "BLOCKED " + config_text(check.witness.source) + " -> " +
               config_text(check.witness.target) + " entry magnitude " +
               format_double(std::abs(check.witness.entry)) + " (charge " +
               std::to_string(check.witness.source_charge) + " -> " +
               std::to_string(check.witness.target_charge) + ")\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// catalyst-postselect

struct CatalystRow {
  int n = 0;
  double analytic_p = 0.0;
  double empirical_p = 0.0;
  long trials = 0;
  double z_score = 0.0;
};

inline std::vector<CatalystRow> run_catalyst_postselect(
    const std::vector<int>& ns, long trials, std::uint64_t seed) {
  std::vector<CatalystRow> rows;
  std::uint64_t counter = 0;
  for (int n : ns) {
    std::vector<ModeSpec> specs;
    std::vector<std::string> y_ids;
    for (int i = 1; i < n; ++i) {
      const std::string id = "y" + std::to_string(i);
      specs.push_back({id, Statistics::Fermion, 1, Party::Alice, true, false});
      y_ids.push_back(id);
    }
    RegisterPtr reg = new_register(std::move(specs));
    const PostselectEnsemble ens = prepare_catalyst_ensemble(n, y_ids, reg);

    long successes = 0;
    for (long t = 0; t < trials; ++t) {
      Rng rng(derive_subseed(seed, counter++));
      if (ens.certain || rng.uniform01() < ens.success_probability)
        ++successes;
    }

    CatalystRow row;
    row.n = n;
    row.analytic_p =
        static_cast<double>(n) / std::pow(2.0, static_cast<double>(n - 1));
    row.empirical_p = static_cast<double>(successes) /
                      static_cast<double>(trials);
    row.trials = trials;
    const double sigma = std::sqrt(row.analytic_p * (1.0 - row.analytic_p) /
                                   static_cast<double>(trials));
    row.z_score =
        sigma > 0.0 ? (row.empirical_p - row.analytic_p) / sigma : 0.0;
    rows.push_back(row);
  }
  return rows;
}

inline std::string catalyst_csv(const std::vector<CatalystRow>& rows) {
  std::string out = "n,analytic_p,empirical_p,trials,z_score\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + format_double(r.analytic_p) + "," +
           format_double(r.empirical_p) + "," + std::to_string(r.trials) +
           "," + format_double(r.z_score) + "\n";
  }
  return out;
}

inline Json catalyst_json(const std::vector<CatalystRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"n", r.n},
                       {"analytic_p", r.analytic_p},
                       {"empirical_p", r.empirical_p},
                       {"trials", r.trials},
                       {"z_score", r.z_score}});
  }
  return arr;
}

}  // namespace ssrlab
