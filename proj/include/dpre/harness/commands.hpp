#pragma once

// The five subcommands of the dpre tool. Each writes its metric files into
// config.run.out and a <command>_run.json record next to them.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dpre/dpre.hpp"
#include "dpre/harness/config.hpp"
#include "dpre/harness/io.hpp"
#include "dpre/verify.hpp"

namespace dpre::harness {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kSuiteFailure = 2 };

struct CommandResult {
  int exit_code = kSuccess;
  RunRecord record;
};

inline const std::vector<std::string> kFreeEnergyColumns{"beta", "N", "d", "L", "estimate", "stderr",
                                                         "n_disorder", "seed", "annealed_bound"};
inline const std::vector<std::string> kTailColumns{"beta", "N", "u", "empirical", "bound"};
inline const std::vector<std::string> kMultiTempColumns{"N", "L", "multi", "blockwise", "gap", "stderr"};
inline const std::vector<std::string> kOverlapColumns{
    "beta",     "N",        "d",                         "mode",     "n_disorder",     "mean_overlap",
    "overlap_stderr", "derivative", "identity", "one_minus_slope_over_beta", "residual", "residual_stderr"};
inline const std::vector<std::string> kCoverageTraceColumns{"beta", "delta", "mode", "J", "coverage"};
inline const std::vector<std::string> kCoverageColumns{"beta",      "delta",    "J",        "global",
                                                       "per_block_any", "per_block_uniform", "windowed", "window_width"};
inline const std::vector<std::string> kWindowColumns{"beta", "delta", "sample", "window_min"};
inline const std::vector<std::string> kDistinguishedColumns{"beta", "delta", "K", "level", "size", "bound", "status"};

namespace detail {

inline void apply_threads(const ExperimentConfig& cfg) { set_thread_count(cfg.run.threads); }

inline long long ll(std::size_t v) { return static_cast<long long>(v); }

}  // namespace detail

inline CommandResult cmd_free_energy(const ExperimentConfig& cfg) {
  validate_run(cfg);
  validate_free_energy(cfg);
  detail::apply_threads(cfg);
  const auto& f = cfg.free_energy;
  RunWriter out("free_energy", cfg);

  CsvTable table(kFreeEnergyColumns);
  bool annealed_ok = true;
  for (int n : f.lengths)
    for (double beta : f.betas) {
      const auto e = estimate_free_energy(beta, LatticeParams{f.dim, n}, static_cast<std::size_t>(f.n_disorder),
                                          mix_seed(cfg.run.seed, static_cast<std::uint64_t>(n)));
      annealed_ok = annealed_ok && satisfies_annealed_bound(e);
      table.add({beta, static_cast<long long>(n), static_cast<long long>(f.dim), 1LL, e.mean, e.std_error,
                 detail::ll(e.n_disorder), std::to_string(e.master_seed), annealed_free_energy(beta)});
    }
  out.emit("free_energy.csv", table.str());
  out.metrics()["rows"] = table.rows();
  out.metrics()["annealed_bound_holds"] = annealed_ok;

  if (f.tail_replicas > 0) {
    const auto prof = concentration_profile(f.tail_beta, LatticeParams{f.dim, f.tail_length},
                                            static_cast<std::size_t>(f.tail_replicas), f.tail_u,
                                            mix_seed(cfg.run.seed, 0x7461696cULL));
    CsvTable tail(kTailColumns);
    for (const auto& t : prof.tail)
      tail.add({prof.beta, static_cast<long long>(prof.length), t.u, t.empirical, t.bound});
    out.emit("free_energy_tail.csv", tail.str());
    out.metrics()["tail_within_bound"] = prof.within_bound();
  }

  if (!f.block_betas.empty()) {
    const auto rep = multi_temp_consistency(f.multi_lengths, f.dim, f.block_betas,
                                            static_cast<std::size_t>(f.n_disorder), mix_seed(cfg.run.seed, 0x6d756c74ULL));
    CsvTable mt(kMultiTempColumns);
    for (const auto& r : rep.rows)
      mt.add({static_cast<long long>(r.length), static_cast<long long>(rep.blocks), r.multi, r.blockwise, r.gap,
              r.std_error});
    out.emit("multi_temp.csv", mt.str());
    out.metrics()["multi_temp_gap_decreasing"] = rep.decreasing();
  }
  return {kSuccess, out.finish()};
}

inline CommandResult cmd_overlap(const ExperimentConfig& cfg) {
  validate_run(cfg);
  validate_overlap(cfg);
  detail::apply_threads(cfg);
  const auto& o = cfg.overlap;
  const auto mode = o.mode == "enumeration" ? IbpMode::enumeration : IbpMode::monte_carlo;
  RunWriter out("overlap", cfg);
  CsvTable table(kOverlapColumns);
  std::size_t skipped_identity = 0;
  for (int n : o.lengths)
    for (double beta : o.betas) {
      const LatticeParams params{o.dim, n};
      const auto seed = mix_seed(cfg.run.seed, static_cast<std::uint64_t>(n));
      const auto nd = static_cast<std::size_t>(o.n_disorder);
      const auto q = quenched_replica_overlap(params, beta, std::max<std::size_t>(nd, 2), seed);
      const double h = o.h > 0 ? o.h : default_ibp_step(mode, beta);
      std::vector<Cell> row{beta,          static_cast<long long>(n), static_cast<long long>(o.dim), to_string(mode),
                            detail::ll(nd), q.mean,                   q.std_error};
      if (beta == 0.0 || beta - h < 0) {
        ++skipped_identity;
        row.insert(row.end(), 5, Cell{});
      } else {
        const auto r = ibp_residual(mode, seed, beta, h, params, nd);
        row.insert(row.end(), {r.derivative, r.identity, 1.0 - r.derivative / beta, r.residual, r.std_error});
      }
      table.add(std::move(row));
    }
  out.emit("overlap.csv", table.str());
  out.metrics()["rows"] = table.rows();
  out.metrics()["identity_skipped"] = skipped_identity;
  return {kSuccess, out.finish()};
}

inline CommandResult cmd_localize(const ExperimentConfig& cfg) {
  validate_run(cfg);
  validate_localize(cfg);
  detail::apply_threads(cfg);
  const auto& c = cfg.localize;
  const int blocks = c.blocks > 0 ? c.blocks : blocks_for_window(c.epsilon);
  const auto p = make_partition(c.length, blocks);
  const LatticeParams params{c.dim, c.length};
  const GaussianEnvironment env(replica_seed(cfg.run.seed, 0), params);
  RunWriter out("localize", cfg);

  std::string jsonl;
  CsvTable trace(kCoverageTraceColumns), cover(kCoverageColumns), windows(kWindowColumns),
      distinguished(kDistinguishedColumns);
  auto summary = nlohmann::ordered_json::array();
  for (std::size_t ib = 0; ib < c.betas.size(); ++ib) {
    const double beta = c.betas[ib];
    const auto table = forward_layers(env, BetaProfile::constant(c.length, beta));
    std::mt19937_64 rng(mix_seed(cfg.run.seed, 1000 + ib));
    std::vector<Path> samples;
    samples.reserve(static_cast<std::size_t>(c.n_samples));
    for (int k = 0; k < c.n_samples; ++k) samples.push_back(sample_path(table, rng));

    for (double delta : c.deltas) {
      GreedyOptions opt;
      opt.max_paths = static_cast<std::size_t>(c.max_paths);
      std::vector<Path> favorites;
      for (auto mode : {CoverMode::global, CoverMode::per_block_any, CoverMode::per_block_uniform}) {
        ReportLine line{cfg.run.seed, beta, c.length, c.dim, blocks, samples.size(),
                        greedy_favorite_paths(samples, delta, c.epsilon, mode, p, opt)};
        jsonl += to_json(line).dump() + "\n";
        for (std::size_t j = 0; j < line.report.coverage_trace.size(); ++j)
          trace.add({beta, delta, to_string(mode), detail::ll(j + 1), line.report.coverage_trace[j]});
        summary.push_back({{"beta", beta},
                           {"delta", delta},
                           {"mode", to_string(mode)},
                           {"J", line.report.size()},
                           {"coverage", line.report.coverage},
                           {"localized", line.report.localized}});
        if (mode == CoverMode::global) favorites = line.report.paths;
      }

      const auto cs = coverage_report(favorites, samples, delta, p, c.epsilon);
      cover.add({beta, delta, detail::ll(favorites.size()), cs.global, cs.per_block_any, cs.per_block_uniform,
                 cs.windowed, static_cast<long long>(cs.window_width)});
      for (std::size_t s = 0; s < cs.window_minima.size(); ++s)
        windows.add({beta, delta, detail::ll(s), cs.window_minima[s]});

      const int pieces = c.pieces > 0 ? c.pieces : subblock_count(delta);
      if (!fine_enough(p, pieces) || favorites.empty()) {
        distinguished.add({beta, delta, static_cast<long long>(pieces), 1LL, detail::ll(favorites.size()),
                           static_cast<double>(favorites.size()), std::string("skipped")});
        continue;
      }
      auto level = initial_distinguished_set(favorites);
      const auto j0 = level.paths.size();
      distinguished.add({beta, delta, static_cast<long long>(pieces), 1LL, detail::ll(j0), static_cast<double>(j0),
                         std::string("ok")});
      while (level.level < p.blocks()) {
        const int next = level.level + 1;
        const double bound = distinguished_size_bound(pieces, j0, next);
        try {
          level = extend_distinguished_set(level, p, pieces, static_cast<std::size_t>(c.max_distinguished));
        } catch (const std::length_error&) {
          distinguished.add({beta, delta, static_cast<long long>(pieces), static_cast<long long>(next), Cell{}, bound,
                             std::string("truncated")});
          break;
        }
        distinguished.add({beta, delta, static_cast<long long>(pieces), static_cast<long long>(next),
                           detail::ll(level.paths.size()), bound, std::string("ok")});
      }
    }
  }
  out.emit("localize.jsonl", jsonl);
  out.emit("coverage_vs_J.csv", trace.str());
  out.emit("coverage.csv", cover.str());
  out.emit("window_profile.csv", windows.str());
  out.emit("distinguished.csv", distinguished.str());
  out.metrics()["L"] = blocks;
  out.metrics()["reports"] = summary;
  return {kSuccess, out.finish()};
}

inline CommandResult cmd_verify(const ExperimentConfig& cfg) {
  validate_run(cfg);
  validate_verify(cfg);
  detail::apply_threads(cfg);
  RunWriter out("verify", cfg);
  const auto rep = run_verify(cfg.verify_options());
  out.emit("verify.json", rep.to_json().dump(2) + "\n");
  auto failed = nlohmann::ordered_json::array();
  for (const auto& s : rep.suites)
    if (!s.passed) failed.push_back(s.name);
  out.metrics()["passed"] = rep.passed();
  out.metrics()["failed_suites"] = failed;
  return {rep.passed() ? kSuccess : kSuiteFailure, out.finish()};
}

// ---------------------------------------------------------------------------
// plotdata

namespace detail {

/// Groups rows of `data` by the values of `keys`, preserving first-seen order.
inline std::vector<std::pair<std::string, std::vector<std::size_t>>> group_rows(const CsvData& data,
                                                                                 const std::vector<std::string>& keys) {
  std::vector<std::size_t> cols;
  for (const auto& k : keys) cols.push_back(data.column(k));
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::map<std::string, std::size_t> where;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    std::string label;
    for (std::size_t k = 0; k < keys.size(); ++k)
      label += (k ? ";" : "") + keys[k] + "=" + data.rows[r].at(cols[k]);
    auto [it, fresh] = where.emplace(label, groups.size());
    if (fresh) groups.emplace_back(label, std::vector<std::size_t>{});
    groups[it->second].second.push_back(r);
  }
  return groups;
}

/// series column plus the listed value columns, one row per input row.
inline std::string tidy_series(const CsvData& data, const std::vector<std::string>& keys,
                               const std::vector<std::string>& values) {
  std::vector<std::string> header{"series"};
  header.insert(header.end(), values.begin(), values.end());
  CsvTable out(header);
  std::vector<std::size_t> cols;
  for (const auto& v : values) cols.push_back(data.column(v));
  for (const auto& [label, rows] : group_rows(data, keys))
    for (auto r : rows) {
      std::vector<Cell> row{label};
      for (auto c : cols) row.emplace_back(data.rows[r].at(c));
      out.add(std::move(row));
    }
  return out.str();
}

}  // namespace detail

/// Reads metric files from `input_dir` and writes one tidy series file per
/// metric found into config.run.out.
inline CommandResult cmd_plotdata(const ExperimentConfig& cfg, const std::string& input_dir) {
  validate_run(cfg);
  const fs::path in(input_dir);
  if (!fs::is_directory(in)) throw ConfigError("plotdata: input directory '" + input_dir + "' does not exist");
  struct Spec {
    const char* source;
    const char* target;
    std::vector<std::string> keys, values;
  };
  const std::vector<Spec> specs{
      {"free_energy.csv", "plot_free_energy.csv", {"N", "d"}, {"beta", "estimate", "stderr", "annealed_bound"}},
      {"free_energy_tail.csv", "plot_tail_profile.csv", {"beta", "N"}, {"u", "empirical", "bound"}},
      {"multi_temp.csv", "plot_multi_temp.csv", {"L"}, {"N", "gap", "stderr"}},
      {"overlap.csv", "plot_overlap.csv", {"N", "d", "mode"}, {"beta", "mean_overlap", "overlap_stderr", "residual"}},
      {"coverage_vs_J.csv", "plot_coverage_vs_J.csv", {"beta", "delta", "mode"}, {"J", "coverage"}},
      {"window_profile.csv", "plot_window_profile.csv", {"beta", "delta"}, {"sample", "window_min"}},
  };
  RunWriter out("plotdata", cfg);
  auto emitted = nlohmann::ordered_json::array();
  for (const auto& s : specs) {
    const auto src = in / s.source;
    if (!fs::exists(src)) continue;
    out.emit(s.target, detail::tidy_series(read_csv(src), s.keys, s.values));
    emitted.push_back(s.target);
  }
  if (emitted.empty()) throw ConfigError("plotdata: no run outputs found in '" + input_dir + "'");
  out.metrics()["series_files"] = emitted;
  return {kSuccess, out.finish()};
}

}  // namespace dpre::harness
