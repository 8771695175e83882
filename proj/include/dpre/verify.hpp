#pragma once

// Self-check suites run by `dpre verify`. Every suite is deterministic given the
// master seed and reports only values that do not depend on timing or on the
// number of worker threads.

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dpre/enumeration.hpp"
#include "dpre/environment.hpp"
#include "dpre/free_energy.hpp"
#include "dpre/localization.hpp"
#include "dpre/parallel.hpp"
#include "dpre/partition.hpp"
#include "dpre/planting.hpp"
#include "dpre/replica_overlap.hpp"
#include "dpre/transfer_matrix.hpp"

namespace dpre {

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  int oracle_cases = 100;
  long sampler_draws = 1'000'000;
  int claim_instances = 10'000;
  int window_instances = 1'000;
  int concentration_replicas = 2000;
  int concentration_length = 256;
  int ibp_disorder = 4;
  int threads = 0;             // worker count for the parallel pass of the determinism suite; 0 = pool default
  bool inject_fault = false;   // flip one g value between determinism passes
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<std::string> failures;

  void fail(std::string why) {
    passed = false;
    if (failures.size() < 20) failures.push_back(std::move(why));
  }
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;

  bool passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
  }
  const SuiteResult* find(const std::string& name) const {
    for (const auto& s : suites)
      if (s.name == name) return &s;
    return nullptr;
  }
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["passed"] = passed();
    j["suites"] = nlohmann::ordered_json::array();
    for (const auto& s : suites) {
      nlohmann::ordered_json e;
      e["name"] = s.name;
      e["passed"] = s.passed;
      e["metrics"] = s.metrics;
      e["failures"] = s.failures;
      j["suites"].push_back(std::move(e));
    }
    return j;
  }
};

namespace detail {

inline std::mt19937_64 suite_rng(std::uint64_t seed, std::uint64_t tag) { return std::mt19937_64(mix_seed(seed, tag)); }

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) h = (h ^ p[k]) * 0x100000001b3ULL;
  return h;
}

inline std::uint64_t hash_doubles(const std::vector<double>& xs) {
  return fnv1a(xs.data(), xs.size() * sizeof(double));
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[static_cast<std::size_t>(k)] = digits[v & 15];
  return s;
}

}  // namespace detail

inline SuiteResult verify_partitions() {
  SuiteResult r{"partition_arithmetic"};
  long checked = 0;
  for (int n = 1; n <= 300; ++n)
    for (int l = 1; l <= std::min(n, 40); ++l) {
      const auto p = make_partition(n, l);
      for (int b = 1; b <= l; ++b) {
        const int s = p.block_size(b);
        ++checked;
        if (s != n / l && s != (n + l - 1) / l) r.fail("block size off floor/ceil at N=" + std::to_string(n));
        if (2 * l * s < n || s * l > 2 * n) r.fail("block bound at N=" + std::to_string(n) + " L=" + std::to_string(l));
      }
      for (int k : {1, 2, 3, 5, 12, 24, 60}) {
        if (n / l < k) continue;
        for (int b = 1; b <= l; ++b) {
          const auto sub = make_subpartition(p, b, k);
          const int bs = p.block_size(b);
          for (int q = 1; q <= k; ++q) {
            const int s = sub.piece_size(q);
            ++checked;
            if (s != bs / k && s != (bs + k - 1) / k) r.fail("sub-block size off floor/ceil");
            if (4L * l * k * s < n || static_cast<long>(s) * l * k > 4L * n)
              r.fail("sub-block bound at N=" + std::to_string(n) + " L=" + std::to_string(l) + " K=" + std::to_string(k));
          }
        }
      }
    }
  r.metrics["checked"] = checked;
  return r;
}

inline SuiteResult verify_oracle(const VerifyOptions& o) {
  SuiteResult r{"oracle_equivalence"};
  auto rng = detail::suite_rng(o.seed, 1);
  double worst = 0, worst_split = 0, worst_marg = 0;
  for (int c = 0; c < o.oracle_cases; ++c) {
    const int dim = 1 + static_cast<int>(uniform_index(rng, 2));
    const int n = 1 + static_cast<int>(uniform_index(rng, dim == 1 ? 8 : 7));
    LatticeParams params{dim, n};
    GaussianEnvironment env(rng(), params);
    std::vector<double> betas(static_cast<std::size_t>(n));
    const auto kind = uniform_index(rng, 3);
    const double base = uniform_real(rng, 0.0, 3.0);
    for (auto& b : betas) b = kind == 0 ? base : uniform_real(rng, 0.0, 3.0);
    if (kind == 2) betas[uniform_index(rng, static_cast<std::size_t>(n))] = 0.0;
    const BetaProfile profile(betas);
    const auto fwd = forward_layers(env, profile);
    const auto bwd = backward_layers(env, profile);
    const double tm = log_partition(fwd);
    const double bf = brute_force_log_partition(env, profile);
    worst = std::max(worst, std::abs(tm - bf));
    for (int s = 0; s <= n; ++s) worst_split = std::max(worst_split, std::abs(split_log_partition(fwd, bwd, s) - bf));
    const auto marg = site_marginals(fwd, bwd);
    const auto ref = brute_force_marginals(env, profile);
    const auto& cones = fwd.cones();
    for (int i = 0; i <= n; ++i) {
      const auto& cone = cones[i];
      for (std::size_t k = 0; k < cone.size(); ++k) {
        const auto it = ref[static_cast<std::size_t>(i)].find(cone.point(k));
        const double want = it == ref[static_cast<std::size_t>(i)].end() ? 0.0 : it->second;
        worst_marg = std::max(worst_marg, std::abs(marg[static_cast<std::size_t>(i)][k] - want));
      }
    }
  }
  if (!(worst < 1e-10)) r.fail("log Z differs from enumeration by " + std::to_string(worst));
  if (!(worst_split < 1e-10)) r.fail("Markov split differs from enumeration by " + std::to_string(worst_split));
  if (!(worst_marg < 1e-10)) r.fail("site marginals differ from enumeration by " + std::to_string(worst_marg));
  r.metrics["cases"] = o.oracle_cases;
  r.metrics["max_abs_error"] = worst;
  r.metrics["max_split_error"] = worst_split;
  r.metrics["max_marginal_error"] = worst_marg;
  return r;
}

/// TV distance and chi-square p-value of sampled paths against the enumerated law.
struct SamplerCheck {
  double tv = 0;
  double chi2 = 0;
  int dof = 0;
  double p_value = 0;
};

inline SamplerCheck check_sampler(std::uint64_t env_seed, std::uint64_t draw_seed, int length, double beta, long draws) {
  LatticeParams params{1, length};
  GaussianEnvironment env(env_seed, params);
  const auto profile = BetaProfile::constant(length, beta);
  const auto law = gibbs_law(env, profile);
  std::unordered_map<Path, std::size_t, PathHash> index;
  for (std::size_t k = 0; k < law.size(); ++k) index.emplace(law[k].first, k);
  std::vector<long> counts(law.size(), 0);
  const auto table = forward_layers(env, profile);
  std::mt19937_64 rng(draw_seed);
  for (long d = 0; d < draws; ++d) ++counts[index.at(sample_path(table, rng))];
  SamplerCheck c;
  for (std::size_t k = 0; k < law.size(); ++k) {
    const double expect = law[k].second * static_cast<double>(draws);
    const double diff = static_cast<double>(counts[k]) - expect;
    c.tv += std::abs(static_cast<double>(counts[k]) / static_cast<double>(draws) - law[k].second);
    if (expect > 0) c.chi2 += diff * diff / expect;
  }
  c.tv *= 0.5;
  c.dof = static_cast<int>(law.size()) - 1;
  c.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(c.dof), c.chi2));
  return c;
}

inline SuiteResult verify_sampler(const VerifyOptions& o) {
  SuiteResult r{"sampler_exactness"};
  for (int n : {4, 5, 6}) {
    const auto c = check_sampler(mix_seed(o.seed, 20 + static_cast<std::uint64_t>(n)),
                                 mix_seed(o.seed, 30 + static_cast<std::uint64_t>(n)), n, 1.0, o.sampler_draws);
    nlohmann::ordered_json m;
    m["tv"] = c.tv;
    m["chi2"] = c.chi2;
    m["dof"] = c.dof;
    m["p_value"] = c.p_value;
    r.metrics["N=" + std::to_string(n)] = m;
    if (!(c.tv < 5e-3)) r.fail("TV distance " + std::to_string(c.tv) + " at N=" + std::to_string(n));
    if (!(c.p_value > 1e-4)) r.fail("chi-square p-value " + std::to_string(c.p_value) + " at N=" + std::to_string(n));
  }
  r.metrics["draws"] = o.sampler_draws;
  return r;
}

inline SuiteResult verify_claims(const VerifyOptions& o) {
  SuiteResult r{"claim_reduction"};
  auto rng = detail::suite_rng(o.seed, 2);
  long checked = 0, violations = 0, no_meet = 0, same = 0;
  double min_block_ratio = 1e300;
  for (int t = 0; t < o.claim_instances; ++t) {
    const auto inst = planted_claim_instance(rng, 1 + static_cast<int>(uniform_index(rng, 2)));
    const auto rec = verify_claim_reduction(inst.target, inst.first, inst.second, inst.delta, inst.partition, inst.block);
    if (!rec.hypotheses || !rec.size_condition) {
      r.fail("planted instance " + std::to_string(t) + " misses the hypotheses: " + rec.note);
      continue;
    }
    ++checked;
    same += inst.first == inst.second;
    if (rec.hypotheses && rec.rich_pieces.size() >= 2 && !rec.meet && !(inst.first == inst.second)) ++no_meet;
    if (!rec.conclusions_hold()) {
      ++violations;
      r.fail("instance " + std::to_string(t) + ": " + (rec.note.empty() ? "conclusion failed" : rec.note));
      continue;
    }
    if (inst.first == inst.second && !(rec.witness == inst.first)) {
      ++violations;
      r.fail("instance " + std::to_string(t) + ": identical inputs did not return the input path");
    }
    min_block_ratio = std::min(min_block_ratio, rec.block_overlap / (inst.delta * inst.delta / 104.0));
  }
  r.metrics["instances"] = o.claim_instances;
  r.metrics["checked"] = checked;
  r.metrics["identical_pairs"] = same;
  r.metrics["violations"] = violations;
  r.metrics["infinite_meeting_times"] = no_meet;
  r.metrics["min_block_overlap_over_bound"] = checked ? min_block_ratio : 0.0;
  return r;
}

/// A random (N, eps) instance with a pair of paths whose block overlaps all reach delta.
struct WindowInstance {
  double eps = 0;
  double delta = 0;
  PartitionScheme partition;
  Path center;
  Path sample;
};

template <class Rng>
WindowInstance planted_window_instance(Rng& rng) {
  WindowInstance w;
  w.eps = uniform_real(rng, 0.04, 1.0);
  const int blocks = blocks_for_window(w.eps);
  const int n = blocks + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(std::max(1, 400 - blocks))));
  w.delta = uniform_real(rng, 0.02, 1.0);
  w.partition = make_partition(n, blocks);
  const int dim = 1 + static_cast<int>(uniform_index(rng, 2));
  w.center = random_walk(dim, n, rng);
  std::vector<std::pair<int, int>> cover;
  for (int l = 1; l <= blocks; ++l) {
    const int need = static_cast<int>(std::ceil(w.delta * w.partition.block_size(l) - 1e-9));
    auto c = random_cover(w.partition.first(l), w.partition.last(l), need, rng);
    cover.insert(cover.end(), c.begin(), c.end());
  }
  w.sample = plant_copy(w.center, cover, rng);
  return w;
}

inline SuiteResult verify_windows(const VerifyOptions& o) {
  SuiteResult r{"window_reduction"};
  auto rng = detail::suite_rng(o.seed, 3);
  long violations = 0, no_block = 0;
  double min_ratio = 1e300;
  for (int t = 0; t < o.window_instances; ++t) {
    const auto w = planted_window_instance(rng);
    const auto& p = w.partition;
    bool all_blocks = true;
    for (int l = 1; l <= p.blocks(); ++l) all_blocks = all_blocks && block_overlap(w.center, w.sample, p, l) >= w.delta;
    if (!all_blocks) {
      r.fail("planted instance " + std::to_string(t) + " misses a block");
      continue;
    }
    const int n = p.length();
    const int width = std::max(1, static_cast<int>(std::ceil(w.eps * n - 1e-9)));
    for (int a = 1; a + width - 1 <= n; ++a)
      if (!block_inside(p, a, a + width - 1)) ++no_block;
    const double m = min_window_overlap(w.center, w.sample, width);
    min_ratio = std::min(min_ratio, m / (w.delta / 18.0));
    if (!(m >= w.delta / 18.0)) {
      ++violations;
      r.fail("instance " + std::to_string(t) + ": window overlap " + std::to_string(m) + " below delta/18");
    }
  }
  if (no_block) r.fail(std::to_string(no_block) + " windows contain no full block");
  r.metrics["instances"] = o.window_instances;
  r.metrics["violations"] = violations;
  r.metrics["windows_without_block"] = no_block;
  r.metrics["min_overlap_over_bound"] = min_ratio;
  return r;
}

inline SuiteResult verify_concentration(const VerifyOptions& o) {
  SuiteResult r{"concentration"};
  const LatticeParams params{1, o.concentration_length};
  const auto prof = concentration_profile(1.0, params, static_cast<std::size_t>(o.concentration_replicas),
                                          {0.05, 0.1, 0.2, 0.4}, mix_seed(o.seed, 4));
  r.metrics["beta"] = prof.beta;
  r.metrics["N"] = prof.length;
  r.metrics["replicas"] = prof.n_disorder;
  r.metrics["mean"] = prof.mean;
  auto tail = nlohmann::ordered_json::array();
  for (const auto& t : prof.tail) {
    tail.push_back({{"u", t.u}, {"empirical", t.empirical}, {"bound", t.bound}, {"slack", t.slack}});
    if (!t.within_bound()) r.fail("tail at u=" + std::to_string(t.u) + " exceeds the bound");
  }
  r.metrics["tail"] = tail;
  return r;
}

inline SuiteResult verify_ibp(const VerifyOptions& o) {
  SuiteResult r{"ibp_identity"};
  const auto e = ibp_residual_enumeration(mix_seed(o.seed, 5), 1.0, 1e-4, LatticeParams{1, 6},
                                          static_cast<std::size_t>(o.ibp_disorder));
  r.metrics["enumeration_residual"] = e.residual;
  r.metrics["enumeration_mean_overlap"] = e.mean_overlap;
  if (!(e.residual < 1e-6)) r.fail("enumeration residual " + std::to_string(e.residual));
  const auto m = ibp_residual_monte_carlo(mix_seed(o.seed, 6), 0.8, 1e-3, LatticeParams{1, 32}, 200);
  r.metrics["monte_carlo_residual"] = m.residual;
  r.metrics["monte_carlo_std_error"] = m.std_error;
  if (!(m.residual < 5e-3 + 3 * m.std_error)) r.fail("Monte Carlo residual " + std::to_string(m.residual));
  return r;
}

/// Replica log Z values and a block of g values computed twice, on one worker and
/// on the configured pool, must agree bit for bit. A flipped g value must be seen.
inline SuiteResult verify_determinism(const VerifyOptions& o) {
  SuiteResult r{"determinism"};
  const LatticeParams params{2, 24};
  const auto cones = make_cones(params);
  const auto profile = BetaProfile::constant(params.length, 1.0);
  const std::uint64_t master = mix_seed(o.seed, 7);
  const Point flip_cell = axis_step(origin(), 0, 1);

  auto g_block = [&](bool flip) {
    GaussianEnvironment env(master, params);
    FlippedEnvironment<GaussianEnvironment> flipped(env, flip ? 1 : -1, flip_cell);
    return map_replicas(10'000, [&](std::size_t k) {
      const int step = 1 + static_cast<int>(k % static_cast<std::size_t>(params.length));
      const auto& cone = (*cones)[step];
      return flipped(step, cone.point((k * 2654435761ULL) % cone.size()));
    });
  };
  auto log_z = [&](bool flip) {
    return map_replicas(64, [&](std::size_t k) {
      GaussianEnvironment env(replica_seed(master, k), params);
      if (flip && k == 0) return stream_log_partition(FlippedEnvironment<GaussianEnvironment>(env, 1, flip_cell), profile, cones);
      return stream_log_partition(env, profile, cones);
    });
  };

  const int saved = thread_count();
  set_thread_count(1);
  const auto g1 = g_block(false);
  const auto z1 = log_z(false);
  set_thread_count(o.threads > 0 ? o.threads : std::max(saved, 2));
  const auto g2 = g_block(o.inject_fault);
  const auto z2 = log_z(o.inject_fault);
  const auto control = log_z(true);
  set_thread_count(saved);

  const auto hg1 = detail::hash_doubles(g1), hg2 = detail::hash_doubles(g2);
  const auto hz1 = detail::hash_doubles(z1), hz2 = detail::hash_doubles(z2);
  r.metrics["g_hash"] = detail::hex64(hg1);
  r.metrics["log_z_hash"] = detail::hex64(hz1);
  if (hg1 != hg2) r.fail("g values differ between passes");
  if (hz1 != hz2) r.fail("replica log Z differ between passes");
  const bool detected = std::memcmp(control.data(), z1.data(), sizeof(double)) != 0;
  r.metrics["negative_control_detected"] = detected;
  if (!detected) r.fail("flipped g value went unnoticed");
  return r;
}

inline VerifyReport run_verify(const VerifyOptions& o) {
  VerifyReport rep;
  rep.seed = o.seed;
  rep.suites.push_back(verify_partitions());
  rep.suites.push_back(verify_oracle(o));
  rep.suites.push_back(verify_sampler(o));
  rep.suites.push_back(verify_claims(o));
  rep.suites.push_back(verify_windows(o));
  rep.suites.push_back(verify_concentration(o));
  rep.suites.push_back(verify_ibp(o));
  rep.suites.push_back(verify_determinism(o));
  return rep;
}

}  // namespace dpre
