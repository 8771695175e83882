#pragma once

#include <openssl/sha.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dpre/harness/config.hpp"
#include "dpre/lattice.hpp"
#include "dpre/localization.hpp"

namespace dpre::harness {

namespace fs = std::filesystem;

/// One CSV cell: a number (written with 17 significant digits), an integer,
/// text, or empty.
using Cell = std::variant<std::monostate, double, long long, std::string>;

inline std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(long long x) const { return std::to_string(x); }
    std::string operator()(const std::string& s) const { return s; }
  } v;
  return std::visit(v, c);
}

/// Header-first CSV with a fixed column order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void add(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw std::logic_error("CsvTable: row width differs from header");
    std::vector<std::string> text;
    for (const auto& c : row) text.push_back(cell_text(c));
    rows_.push_back(std::move(text));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
      out += "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parsed CSV, for reading back files this tool wrote (no quoting).
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw std::runtime_error("csv: missing column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvData read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvData d;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "' is empty");
  d.header = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) d.rows.push_back(split_csv_line(line));
  return d;
}

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Content hashing

inline std::string sha1_hex(const std::string& data) {
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char b : digest) {
    out += hex[b >> 4];
    out += hex[b & 15];
  }
  return out;
}

/// Hash of a blob as git computes it: SHA-1 over "blob <size>\0<content>".
inline std::string git_blob_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return sha1_hex(blob);
}

// ---------------------------------------------------------------------------
// Run records

struct RunRecord {
  std::string command;
  ExperimentConfig config;
  std::string input_hash;                               // git blob hash of the canonical config text
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();  // file name -> git blob hash
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  double wall_seconds = 0;
  std::string timestamp;                                // UTC, ISO 8601

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["input_hash"] = input_hash;
    j["config"] = harness::to_json(config);
    j["outputs"] = outputs;
    j["metrics"] = metrics;
    j["wall_seconds"] = wall_seconds;
    j["timestamp"] = timestamp;
    return j;
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects output files for one command and writes its record on finish.
class RunWriter {
 public:
  RunWriter(std::string command, const ExperimentConfig& cfg)
      : start_(std::chrono::steady_clock::now()), dir_(cfg.run.out) {
    rec_.command = std::move(command);
    rec_.config = cfg;
    rec_.input_hash = git_blob_hash(rec_.command + "\n" + to_text(cfg));
  }

  const fs::path& dir() const { return dir_; }
  nlohmann::ordered_json& metrics() { return rec_.metrics; }

  void emit(const std::string& name, const std::string& content) {
    write_file(dir_ / name, content);
    rec_.outputs[name] = git_blob_hash(content);
  }

  RunRecord finish() {
    rec_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    rec_.timestamp = utc_timestamp();
    write_file(dir_ / (rec_.command + "_run.json"), rec_.to_json().dump(2) + "\n");
    return rec_;
  }

 private:
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  RunRecord rec_;
};

// ---------------------------------------------------------------------------
// Path and report encoding

inline constexpr const char* kAxisNames = "xyzwvuts";

/// Steps as comma-separated signed axis letters, e.g. "+x,-y,+x".
inline std::string encode_steps(const Path& p) {
  std::string out;
  for (int i = 1; i <= p.length(); ++i) {
    const auto& a = p[static_cast<std::size_t>(i - 1)];
    const auto& b = p[static_cast<std::size_t>(i)];
    for (int k = 0; k < p.dim(); ++k) {
      const int d = b[static_cast<std::size_t>(k)] - a[static_cast<std::size_t>(k)];
      if (d == 0) continue;
      if (i > 1) out += ',';
      out += d > 0 ? '+' : '-';
      out += kAxisNames[k];
    }
  }
  return out;
}

inline Path decode_steps(const std::string& s, int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("decode_steps: bad dimension");
  std::vector<Point> pts{origin()};
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string axis_names(kAxisNames);
    if (tok.size() != 2 || (tok[0] != '+' && tok[0] != '-')) throw std::invalid_argument("decode_steps: bad step '" + tok + "'");
    const auto axis = axis_names.find(tok[1]);
    if (axis == std::string::npos || static_cast<int>(axis) >= dim)
      throw std::invalid_argument("decode_steps: bad axis in '" + tok + "'");
    pts.push_back(axis_step(pts.back(), static_cast<int>(axis), tok[0] == '+' ? 1 : -1));
  }
  return Path(dim, std::move(pts));
}

/// A localization report with the run parameters it came from, one JSONL line.
struct ReportLine {
  std::uint64_t seed = 0;
  double beta = 0;
  int length = 0;
  int dim = 1;
  int blocks = 1;
  std::size_t n_samples = 0;
  LocalizationReport report;

  bool operator==(const ReportLine& o) const {
    const auto& a = report;
    const auto& b = o.report;
    return seed == o.seed && beta == o.beta && length == o.length && dim == o.dim && blocks == o.blocks &&
           n_samples == o.n_samples && a.mode == b.mode && a.delta == b.delta && a.epsilon == b.epsilon &&
           a.chosen == b.chosen && a.paths == b.paths && a.coverage_trace == b.coverage_trace &&
           a.coverage == b.coverage && a.localized == b.localized && a.block_profiles == b.block_profiles;
  }
};

inline nlohmann::ordered_json to_json(const ReportLine& r) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(r.report.mode);
  j["delta"] = r.report.delta;
  j["epsilon"] = r.report.epsilon;
  j["seed"] = r.seed;
  j["beta"] = r.beta;
  j["N"] = r.length;
  j["d"] = r.dim;
  j["L"] = r.blocks;
  j["n_samples"] = r.n_samples;
  j["J"] = r.report.size();
  j["coverage"] = r.report.coverage;
  j["localized"] = r.report.localized;
  j["chosen"] = r.report.chosen;
  j["coverage_trace"] = r.report.coverage_trace;
  j["block_profiles"] = r.report.block_profiles;
  auto paths = nlohmann::ordered_json::array();
  for (const auto& p : r.report.paths) paths.push_back(encode_steps(p));
  j["paths"] = paths;
  return j;
}

inline ReportLine report_from_json(const nlohmann::ordered_json& j) {
  ReportLine r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.beta = j.at("beta").get<double>();
  r.length = j.at("N").get<int>();
  r.dim = j.at("d").get<int>();
  r.blocks = j.at("L").get<int>();
  r.n_samples = j.at("n_samples").get<std::size_t>();
  auto& rep = r.report;
  rep.mode = parse_cover_mode(j.at("mode").get<std::string>());
  rep.delta = j.at("delta").get<double>();
  rep.epsilon = j.at("epsilon").get<double>();
  rep.coverage = j.at("coverage").get<double>();
  rep.localized = j.at("localized").get<bool>();
  rep.chosen = j.at("chosen").get<std::vector<std::size_t>>();
  rep.coverage_trace = j.at("coverage_trace").get<std::vector<double>>();
  rep.block_profiles = j.at("block_profiles").get<std::vector<std::vector<double>>>();
  for (const auto& s : j.at("paths")) rep.paths.push_back(decode_steps(s.get<std::string>(), r.dim));
  return r;
}

inline std::vector<ReportLine> parse_jsonl(const std::string& text) {
  std::vector<ReportLine> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!trim(line).empty()) out.push_back(report_from_json(nlohmann::ordered_json::parse(line)));
  return out;
}

}  // namespace dpre::harness
