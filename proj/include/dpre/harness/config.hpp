#pragma once

// Experiment configuration. The text form is sectioned key=value:
//
//   # comment
//   [free_energy]
//   betas = 0.5, 1, 2
//
// and the JSON form nests the same keys under section objects. Both forms
// round-trip losslessly; doubles are written with 17 significant digits.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "dpre/lattice.hpp"
#include "dpre/localization.hpp"
#include "dpre/replica_overlap.hpp"
#include "dpre/verify.hpp"

namespace dpre::harness {

/// Raised for malformed or out-of-range configuration; maps to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunSection {
  std::uint64_t seed = 20240601;
  int threads = 0;
  std::string out = "out";
  bool operator==(const RunSection&) const = default;
};

struct FreeEnergySection {
  int dim = 1;
  std::vector<int> lengths{64, 256, 1024};
  std::vector<double> betas{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
  int n_disorder = 200;
  double tail_beta = 1.0;
  int tail_length = 256;
  int tail_replicas = 2000;
  std::vector<double> tail_u{0.05, 0.1, 0.2, 0.4};
  std::vector<double> block_betas{};  // non-empty: also run the multi-temperature check
  std::vector<int> multi_lengths{64, 128, 256, 512};
  bool operator==(const FreeEnergySection&) const = default;
};

struct OverlapSection {
  int dim = 1;
  std::vector<int> lengths{64, 128, 256};
  std::vector<double> betas{0.0, 0.5, 1.0, 2.0};
  int n_disorder = 200;
  std::string mode = "monte_carlo";  // or "enumeration"
  double h = 0.0;                    // 0 selects the default step
  bool operator==(const OverlapSection&) const = default;
};

struct LocalizeSection {
  int dim = 1;
  int length = 512;
  std::vector<double> betas{2.0, 0.0};
  int n_samples = 500;
  std::vector<double> deltas{0.05};
  double epsilon = 0.1;
  int blocks = 0;  // 0: the L with 2/L <= eps < 2/(L-1)
  int pieces = 0;  // 0: ceil(12/delta)
  int max_paths = 10;
  int max_distinguished = 200000;
  bool operator==(const LocalizeSection&) const = default;
};

struct VerifySection {
  int oracle_cases = 100;
  long sampler_draws = 1'000'000;
  int claim_instances = 10'000;
  int window_instances = 1'000;
  int concentration_replicas = 2000;
  int concentration_length = 256;
  int ibp_disorder = 4;
  bool inject_fault = false;
  bool operator==(const VerifySection&) const = default;
};

struct ExperimentConfig {
  RunSection run;
  FreeEnergySection free_energy;
  OverlapSection overlap;
  LocalizeSection localize;
  VerifySection verify;
  bool operator==(const ExperimentConfig&) const = default;

  template <class F>
  void visit(F&& f) {
    f("run", "seed", run.seed);
    f("run", "threads", run.threads);
    f("run", "out", run.out);
    f("free_energy", "dim", free_energy.dim);
    f("free_energy", "lengths", free_energy.lengths);
    f("free_energy", "betas", free_energy.betas);
    f("free_energy", "n_disorder", free_energy.n_disorder);
    f("free_energy", "tail_beta", free_energy.tail_beta);
    f("free_energy", "tail_length", free_energy.tail_length);
    f("free_energy", "tail_replicas", free_energy.tail_replicas);
    f("free_energy", "tail_u", free_energy.tail_u);
    f("free_energy", "block_betas", free_energy.block_betas);
    f("free_energy", "multi_lengths", free_energy.multi_lengths);
    f("overlap", "dim", overlap.dim);
    f("overlap", "lengths", overlap.lengths);
    f("overlap", "betas", overlap.betas);
    f("overlap", "n_disorder", overlap.n_disorder);
    f("overlap", "mode", overlap.mode);
    f("overlap", "h", overlap.h);
    f("localize", "dim", localize.dim);
    f("localize", "length", localize.length);
    f("localize", "betas", localize.betas);
    f("localize", "n_samples", localize.n_samples);
    f("localize", "deltas", localize.deltas);
    f("localize", "epsilon", localize.epsilon);
    f("localize", "blocks", localize.blocks);
    f("localize", "pieces", localize.pieces);
    f("localize", "max_paths", localize.max_paths);
    f("localize", "max_distinguished", localize.max_distinguished);
    f("verify", "oracle_cases", verify.oracle_cases);
    f("verify", "sampler_draws", verify.sampler_draws);
    f("verify", "claim_instances", verify.claim_instances);
    f("verify", "window_instances", verify.window_instances);
    f("verify", "concentration_replicas", verify.concentration_replicas);
    f("verify", "concentration_length", verify.concentration_length);
    f("verify", "ibp_disorder", verify.ibp_disorder);
    f("verify", "inject_fault", verify.inject_fault);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<ExperimentConfig*>(this)->visit([&](const char* s, const char* k, auto& v) { f(s, k, std::as_const(v)); });
  }

  VerifyOptions verify_options() const {
    VerifyOptions o;
    o.seed = run.seed;
    o.threads = run.threads;
    o.oracle_cases = verify.oracle_cases;
    o.sampler_draws = verify.sampler_draws;
    o.claim_instances = verify.claim_instances;
    o.window_instances = verify.window_instances;
    o.concentration_replicas = verify.concentration_replicas;
    o.concentration_length = verify.concentration_length;
    o.ibp_disorder = verify.ibp_disorder;
    o.inject_fault = verify.inject_fault;
    return o;
  }
};

// ---------------------------------------------------------------------------
// Scalar and list codecs

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

namespace detail {

inline std::string where(const std::string& section, const std::string& key) { return section + "." + key; }

template <class T>
T parse_scalar(const std::string& text, const std::string& at) {
  const std::string s = trim(text);
  try {
    std::size_t used = 0;
    if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "1") return true;
      if (s == "false" || s == "0") return false;
      throw std::invalid_argument("bool");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return s;
    } else if constexpr (std::is_same_v<T, double>) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
      const auto v = std::stoull(s, &used, 0);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return static_cast<std::uint64_t>(v);
    } else {
      const long long v = std::stoll(s, &used);
      if (used != s.size() || v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max())
        throw std::invalid_argument("range");
      return static_cast<T>(v);
    }
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + s + "' for " + at);
  }
}

template <class T>
std::string format_scalar(const T& v) {
  if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else if constexpr (std::is_same_v<T, std::string>) return v;
  else if constexpr (std::is_same_v<T, double>) return format_double(v);
  else return std::to_string(v);
}

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
void assign_text(T& field, const std::string& text, const std::string& at) {
  if constexpr (is_vector<T>::value) {
    T out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) out.push_back(parse_scalar<typename T::value_type>(item, at));
    field = std::move(out);
  } else {
    field = parse_scalar<T>(text, at);
  }
}

template <class T>
std::string field_text(const T& field) {
  if constexpr (is_vector<T>::value) {
    std::string s;
    for (std::size_t k = 0; k < field.size(); ++k) s += (k ? ", " : "") + format_scalar(field[k]);
    return s;
  } else {
    return format_scalar(field);
  }
}

}  // namespace detail

/// Sets one field from text; `key` is "section.name".
inline void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("config: override key '" + key + "' must be section.name");
  const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
  bool found = false;
  cfg.visit([&](const char* s, const char* k, auto& field) {
    if (section == s && name == k) {
      detail::assign_text(field, value, key);
      found = true;
    }
  });
  if (!found) throw ConfigError("config: unknown key '" + key + "'");
}

inline std::string to_text(const ExperimentConfig& cfg) {
  std::string out, current;
  cfg.visit([&](const char* s, const char* k, const auto& field) {
    if (current != s) {
      if (!current.empty()) out += "\n";
      out += "[" + std::string(s) + "]\n";
      current = s;
    }
    out += std::string(k) + " = " + detail::field_text(field) + "\n";
  });
  return out;
}

/// Parses sectioned key=value text on top of the defaults.
inline ExperimentConfig parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
    set_field(cfg, section + "." + trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  cfg.visit([&](const char* s, const char* k, const auto& field) { j[s][k] = field; });
  return j;
}

inline ExperimentConfig from_json(const nlohmann::ordered_json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      bool found = false;
      cfg.visit([&](const char* s, const char* k, auto& field) {
        if (section != s || key != k) return;
        found = true;
        try {
          value.get_to(field);
        } catch (const nlohmann::json::exception&) {
          throw ConfigError("config: wrong JSON type for " + section + "." + key);
        }
      });
      if (!found) throw ConfigError("config: unknown key '" + section + "." + key + "'");
    }
  }
  return cfg;
}

/// Loads a config file; JSON when the first non-blank character is '{'.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return from_json(nlohmann::ordered_json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
  }
  return parse_text(text);
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

inline void require_lengths(const std::vector<int>& ns, int dim, const std::string& at) {
  require(!ns.empty(), at + " must not be empty");
  for (int n : ns) {
    require(n >= 1, at + " entries must be >= 1");
    LatticeParams p{dim, n};
    try {
      p.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + at + ": " + e.what());
    }
  }
}

inline void require_betas(const std::vector<double>& bs, const std::string& at, bool allow_empty = false) {
  require(allow_empty || !bs.empty(), at + " must not be empty");
  for (double b : bs) require(std::isfinite(b) && b >= 0 && b <= 50, at + " entries must lie in [0, 50]");
}

}  // namespace detail

inline void validate_run(const ExperimentConfig& c) {
  using detail::require;
  require(c.run.threads >= 0 && c.run.threads <= 1024, "run.threads must lie in [0, 1024]");
  require(!c.run.out.empty(), "run.out must not be empty");
}

inline void validate_free_energy(const ExperimentConfig& c) {
  using detail::require;
  const auto& f = c.free_energy;
  require(f.dim >= 1 && f.dim <= kMaxDim, "free_energy.dim must lie in [1, 8]");
  detail::require_lengths(f.lengths, f.dim, "free_energy.lengths");
  detail::require_betas(f.betas, "free_energy.betas");
  require(f.n_disorder >= 2, "free_energy.n_disorder must be >= 2");
  require(std::isfinite(f.tail_beta) && f.tail_beta > 0, "free_energy.tail_beta must be positive");
  require(f.tail_replicas == 0 || f.tail_replicas >= 100, "free_energy.tail_replicas must be 0 or >= 100");
  detail::require_lengths({f.tail_length}, f.dim, "free_energy.tail_length");
  for (std::size_t k = 0; k < f.tail_u.size(); ++k)
    require(f.tail_u[k] > 0 && (k == 0 || f.tail_u[k] > f.tail_u[k - 1]), "free_energy.tail_u must be positive and increasing");
  detail::require_betas(f.block_betas, "free_energy.block_betas", true);
  if (!f.block_betas.empty()) {
    const long long l = static_cast<long long>(f.block_betas.size());
    detail::require_lengths(f.multi_lengths, f.dim, "free_energy.multi_lengths");
    for (int n : f.multi_lengths)
      require(n >= l * l, "free_energy.multi_lengths: N = " + std::to_string(n) + " violates N >= L^2 (L = " +
                              std::to_string(l) + "), the hypothesis of the multi-temperature consistency theorem");
  }
}

inline void validate_overlap(const ExperimentConfig& c) {
  using detail::require;
  const auto& o = c.overlap;
  require(o.dim >= 1 && o.dim <= kMaxDim, "overlap.dim must lie in [1, 8]");
  detail::require_lengths(o.lengths, o.dim, "overlap.lengths");
  detail::require_betas(o.betas, "overlap.betas");
  require(o.mode == "monte_carlo" || o.mode == "enumeration", "overlap.mode must be monte_carlo or enumeration");
  require(o.n_disorder >= (o.mode == "enumeration" ? 1 : 2), "overlap.n_disorder too small");
  require(std::isfinite(o.h) && o.h >= 0, "overlap.h must be >= 0");
  if (o.mode == "enumeration")
    for (int n : o.lengths)
      require(std::pow(2.0 * o.dim, n) <= kEnumerationCap, "overlap.lengths: enumeration mode needs (2d)^N <= 10^7");
}

inline void validate_localize(const ExperimentConfig& c) {
  using detail::require;
  const auto& l = c.localize;
  require(l.dim >= 1 && l.dim <= kMaxDim, "localize.dim must lie in [1, 8]");
  detail::require_lengths({l.length}, l.dim, "localize.length");
  detail::require_betas(l.betas, "localize.betas");
  require(l.n_samples >= 1 && l.n_samples <= 100000, "localize.n_samples must lie in [1, 100000]");
  require(!l.deltas.empty(), "localize.deltas must not be empty");
  for (double d : l.deltas) require(std::isfinite(d) && d > 0, "localize.deltas must be positive");
  require(l.epsilon > 0 && l.epsilon < 1, "localize.epsilon must lie in (0, 1)");
  const int blocks = l.blocks > 0 ? l.blocks : blocks_for_window(l.epsilon);
  require(l.blocks >= 0 && blocks <= l.length, "localize.blocks must lie in [0, N]");
  require(l.pieces >= 0, "localize.pieces must be >= 0");
  require(l.max_paths >= 1, "localize.max_paths must be >= 1");
  require(l.max_distinguished >= 1, "localize.max_distinguished must be >= 1");
}

inline void validate_verify(const ExperimentConfig& c) {
  using detail::require;
  const auto& v = c.verify;
  require(v.oracle_cases >= 1, "verify.oracle_cases must be >= 1");
  require(v.sampler_draws >= 1000, "verify.sampler_draws must be >= 1000");
  require(v.claim_instances >= 1, "verify.claim_instances must be >= 1");
  require(v.window_instances >= 1, "verify.window_instances must be >= 1");
  require(v.concentration_replicas >= 100, "verify.concentration_replicas must be >= 100");
  require(v.concentration_length >= 1, "verify.concentration_length must be >= 1");
  require(v.ibp_disorder >= 1, "verify.ibp_disorder must be >= 1");
}

inline void validate(const ExperimentConfig& c) {
  validate_run(c);
  validate_free_energy(c);
  validate_overlap(c);
  validate_localize(c);
  validate_verify(c);
}

}  // namespace dpre::harness
