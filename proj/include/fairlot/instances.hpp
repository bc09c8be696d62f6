#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fairlot/model.hpp"
#include "fairlot/rng.hpp"

namespace fairlot {

// ---------------------------------------------------------------------------
// Kidney exchange, cycle formulation.

/// Blood-type/PRA compatibility sampler. The defaults approximate published
/// US population frequencies but are ordinary parameters, not ground truth;
/// experiment logs record the block in use.
struct KidneyParams {
  std::vector<double> blood_type_freq = {0.44, 0.42, 0.10, 0.04};  // O, A, B, AB
  std::vector<double> pra_levels = {0.05, 0.45, 0.90};
  std::vector<double> pra_freq = {0.70, 0.20, 0.10};
  bool require_incompatible_pair = true;
  int max_cycle_len = 3;
};

struct KidneyInstance {
  int n_pairs = 0;
  std::vector<std::pair<int, int>> arcs;  // donor of first is compatible with patient of second
  int max_cycle_len = 3;
  std::vector<std::vector<int>> cycles;
};

namespace detail {

inline bool blood_compatible(int donor, int patient) {
  // 0 = O, 1 = A, 2 = B, 3 = AB
  return donor == 0 || patient == 3 || donor == patient;
}

inline int sample_category(CounterRng& rng, const std::vector<double>& freq) {
  double u = rng.next_double();
  double acc = 0.0;
  for (size_t i = 0; i < freq.size(); ++i) {
    acc += freq[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(freq.size()) - 1;
}

}  // namespace detail

/// Enumerate simple directed cycles of length <= max_len, each reported once
/// with its smallest vertex first.
inline std::vector<std::vector<int>> enumerate_cycles(int n, const std::vector<std::pair<int, int>>& arcs,
                                                      int max_len) {
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (auto [a, b] : arcs)
    if (a != b) adj[a][b] = 1;
  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  auto dfs = [&](auto&& self, int start, int v) -> void {
    for (int w = start; w < n; ++w) {
      if (!adj[v][w]) continue;
      if (w == start) {
        if (path.size() >= 2) cycles.push_back(path);
        continue;
      }
      if (static_cast<int>(path.size()) >= max_len) continue;
      if (std::find(path.begin(), path.end(), w) != path.end()) continue;
      path.push_back(w);
      self(self, start, w);
      path.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    path.assign(1, s);
    dfs(dfs, s, s);
  }
  return cycles;
}

inline KidneyInstance gen_kidney(int n_pairs, std::uint64_t seed, const KidneyParams& params = {}) {
  if (n_pairs < 2) throw ConfigError("gen_kidney: need at least two pairs");
  CounterRng rng(seed);
  KidneyInstance inst;
  inst.n_pairs = n_pairs;
  inst.max_cycle_len = params.max_cycle_len;

  std::vector<int> patient(n_pairs), donor(n_pairs);
  std::vector<double> pra(n_pairs);
  for (int v = 0; v < n_pairs; ++v) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      patient[v] = detail::sample_category(rng, params.blood_type_freq);
      donor[v] = detail::sample_category(rng, params.blood_type_freq);
      pra[v] = params.pra_levels[detail::sample_category(rng, params.pra_freq)];
      if (!params.require_incompatible_pair) break;
      // The pair joins the exchange because its own transplant fails.
      bool internal_ok = detail::blood_compatible(donor[v], patient[v]) &&
                         rng.next_double() >= pra[v];
      if (!internal_ok) break;
    }
  }
  for (int a = 0; a < n_pairs; ++a)
    for (int b = 0; b < n_pairs; ++b) {
      if (a == b) continue;
      if (!detail::blood_compatible(donor[a], patient[b])) continue;
      if (rng.next_double() < pra[b]) continue;  // positive crossmatch
      inst.arcs.push_back({a, b});
    }
  inst.cycles = enumerate_cycles(n_pairs, inst.arcs, params.max_cycle_len);
  return inst;
}

/// Cycle formulation: maximize transplants, one binary per pair and per
/// cycle, linked by sum_{c containing v} y_c = x_v.
inline IlpInstance build_kidney_ilp(const KidneyInstance& ke) {
  IlpInstance inst;
  inst.name = "kidney";
  inst.mode = Mode::dichotomous;
  inst.n_agents = ke.n_pairs;
  inst.agent_objective.assign(ke.n_pairs, 1.0);
  inst.agent_domain.assign(ke.n_pairs, VarDomain::binary());
  int C = static_cast<int>(ke.cycles.size());
  inst.aux_objective.assign(C, 0.0);
  inst.aux_domain.assign(C, VarDomain::binary());

  std::vector<LinearRow> rows(ke.n_pairs);
  for (int v = 0; v < ke.n_pairs; ++v) {
    rows[v].rel = Rel::eq;
    rows[v].rhs = 0.0;
    rows[v].coeffs.push_back({v, -1.0});
  }
  for (int c = 0; c < C; ++c)
    for (int v : ke.cycles[c]) rows[v].coeffs.push_back({ke.n_pairs + c, 1.0});
  inst.rows = std::move(rows);
  return inst;
}

inline KidneyInstance parse_kidney(std::istream& in, int max_cycle_len = 3) {
  KidneyInstance ke;
  ke.max_cycle_len = max_cycle_len;
  if (!(in >> ke.n_pairs)) throw Error("kidney file: missing pair count");
  int a, b;
  while (in >> a >> b) {
    if (a < 0 || b < 0 || a >= ke.n_pairs || b >= ke.n_pairs)
      throw Error("kidney file: arc endpoint out of range");
    ke.arcs.push_back({a, b});
  }
  ke.cycles = enumerate_cycles(ke.n_pairs, ke.arcs, max_cycle_len);
  return ke;
}

inline void write_kidney(std::ostream& out, const KidneyInstance& ke) {
  out << ke.n_pairs << "\n";
  for (auto [a, b] : ke.arcs) out << a << " " << b << "\n";
}

// ---------------------------------------------------------------------------
// Single-machine total tardiness, time-indexed formulation.

struct TardinessInstance {
  std::vector<int> processing;  // p_j in [1, 10]
  std::vector<int> due;         // d_j in [0, beta * sum p]
  double beta = 0.0;

  int jobs() const { return static_cast<int>(processing.size()); }
  int horizon() const {
    int t = 0;
    for (int p : processing) t += p;
    return t;
  }
};

inline TardinessInstance gen_tardiness(int n, double beta, std::uint64_t seed) {
  if (n < 1) throw ConfigError("gen_tardiness: need at least one job");
  if (!(beta > 0.0)) throw ConfigError("gen_tardiness: beta must be positive");
  CounterRng rng(seed);
  TardinessInstance inst;
  inst.beta = beta;
  inst.processing.resize(n);
  for (int j = 0; j < n; ++j)
    inst.processing[j] = 1 + static_cast<int>(rng.next_below(10));
  int upper = static_cast<int>(std::floor(beta * inst.horizon()));
  inst.due.resize(n);
  for (int j = 0; j < n; ++j)
    inst.due[j] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(upper) + 1));
  return inst;
}

/// Time-indexed formulation with one continuous utility variable per job:
/// x_j = -tardiness at every optimal solution. Horizon 0..T-1 untightened so
/// the optimal-solution set is exactly the formulation's.
inline IlpInstance build_tardiness_ilp(const TardinessInstance& tt) {
  int n = tt.jobs();
  int T = tt.horizon();
  IlpInstance inst;
  inst.name = "tardiness";
  inst.mode = Mode::cardinal;
  inst.n_agents = n;
  inst.agent_objective.assign(n, 1.0);
  inst.agent_domain.assign(n, VarDomain::continuous(-static_cast<double>(T), 0.0));
  inst.aux_objective.assign(static_cast<size_t>(n) * T, 0.0);
  inst.aux_domain.assign(static_cast<size_t>(n) * T, VarDomain::binary());

  auto yvar = [&](int j, int t) { return n + j * T + t; };

  for (int j = 0; j < n; ++j) {
    LinearRow assign;
    assign.rel = Rel::eq;
    assign.rhs = 1.0;
    for (int t = 0; t < T; ++t) assign.coeffs.push_back({yvar(j, t), 1.0});
    inst.rows.push_back(std::move(assign));
  }
  for (int t = 0; t < T; ++t) {
    LinearRow cap;
    cap.rel = Rel::le;
    cap.rhs = 1.0;
    for (int j = 0; j < n; ++j)
      for (int s = std::max(0, t - tt.processing[j] + 1); s <= t; ++s)
        cap.coeffs.push_back({yvar(j, s), 1.0});
    inst.rows.push_back(std::move(cap));
  }
  for (int j = 0; j < n; ++j) {
    // start_j + p_j <= d_j - x_j
    LinearRow link;
    link.rel = Rel::le;
    link.rhs = static_cast<double>(tt.due[j] - tt.processing[j]);
    for (int t = 1; t < T; ++t) link.coeffs.push_back({yvar(j, t), static_cast<double>(t)});
    link.coeffs.push_back({j, 1.0});
    inst.rows.push_back(std::move(link));
  }
  return inst;
}

inline TardinessInstance parse_tardiness(std::istream& in) {
  TardinessInstance tt;
  int p, d;
  while (in >> p >> d) {
    if (p < 1) throw Error("tardiness file: processing time must be >= 1");
    if (d < 0) throw Error("tardiness file: negative due date");
    tt.processing.push_back(p);
    tt.due.push_back(d);
  }
  if (tt.processing.empty()) throw Error("tardiness file: no jobs");
  return tt;
}

inline void write_tardiness(std::ostream& out, const TardinessInstance& tt) {
  for (int j = 0; j < tt.jobs(); ++j) out << tt.processing[j] << " " << tt.due[j] << "\n";
}

}  // namespace fairlot
