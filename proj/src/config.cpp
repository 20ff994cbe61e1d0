#include "vlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vlab/errors.hpp"
#include "vlab/report.hpp"

namespace vlab {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return std::uint64_t(x);
  } catch (const std::exception&) {
    throw ConfigError("bad unsigned value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v,
                          Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse(key, item));
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_g17(v[i]);
  }
  return out;
}

} // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

void apply_override(ExperimentConfig& cfg, const std::string& rawKey,
                    const std::string& rawValue) {
  const std::string key = trim(rawKey);
  const std::string v = trim(rawValue);
  if (key == "parity") {
    if (v != "odd" && v != "even")
      throw ConfigError("parity must be odd or even");
    cfg.parity = v;
  } else if (key == "order") {
    cfg.order = int(parse_int(key, v));
  } else if (key == "inner_half_width") {
    cfg.innerHalfWidth = parse_double(key, v);
  } else if (key == "outer_half_width") {
    cfg.outerHalfWidth = parse_double(key, v);
  } else if (key == "a0") {
    if (v == "auto") {
      cfg.a0Auto = true;
      cfg.a0 = 0.0;
    } else {
      cfg.a0Auto = false;
      cfg.a0 = parse_double(key, v);
    }
  } else if (key == "ell") {
    cfg.ell = int(parse_int(key, v));
  } else if (key == "slope_target") {
    cfg.slopeTarget = parse_double(key, v);
  } else if (key == "d") {
    cfg.d = int(parse_int(key, v));
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, v);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, v);
  } else if (key == "grid_size") {
    cfg.gridSize = int(parse_int(key, v));
  } else if (key == "sample_count") {
    cfg.sampleCount = int(parse_int(key, v));
  } else if (key == "n_values") {
    cfg.nValues = parse_list<int>(key, v, [](const std::string& k,
                                             const std::string& s) {
      return int(parse_int(k, s));
    });
  } else if (key == "r_values") {
    cfg.rValues = parse_list<double>(key, v, parse_double);
  } else if (key == "census_steps") {
    cfg.censusSteps = int(parse_int(key, v));
  } else if (key == "census_count") {
    cfg.censusCount = int(parse_int(key, v));
  } else if (key == "ccal") {
    if (v != "one" && v != "auto") parse_double(key, v);  // must be numeric
    cfg.ccal = v;
  } else if (key == "lemma26_proof_scaling") {
    cfg.lemma26ProofScaling = parse_bool(key, v);
  } else if (key == "out") {
    cfg.out = v;
  } else if (key == "workers") {
    cfg.workers = int(parse_int(key, v));
  } else if (key == "lane") {
    if (v != "auto" && v != "scalar" && v != "avx2")
      throw ConfigError("lane must be auto, scalar, or avx2");
    cfg.lane = v;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

void apply_set(ExperimentConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value: " + assignment);
  apply_override(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineNo = 0;
  while (std::getline(f, line)) {
    ++lineNo;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineNo) +
                        ": expected key = value");
    apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.order < 2 || cfg.order > 6)
    throw ConfigError("order must be in [2, 6]");
  if (cfg.gridSize < 64 || cfg.gridSize > (1 << 20) ||
      (cfg.gridSize & (cfg.gridSize - 1)) != 0)
    throw ConfigError("grid_size must be a power of two in [64, 2^20]");
  if (cfg.sampleCount < 0 || cfg.sampleCount > (1 << 30))
    throw ConfigError("sample_count out of range");
  if (cfg.censusSteps < 1) throw ConfigError("census_steps must be positive");
  if (cfg.censusCount < 0 || cfg.censusCount > (1 << 26))
    throw ConfigError("census_count out of range");
  if (cfg.workers < 0 || cfg.workers > 4096)
    throw ConfigError("workers out of range");
  if (cfg.ell < 1) throw ConfigError("ell must be positive");
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha))
    throw ConfigError("alpha must be positive");
  for (int n : cfg.nValues)
    if (n < 1) throw ConfigError("n_values entries must be positive");
}

std::string canonical_string(const ExperimentConfig& cfg) {
  std::string s;
  s += "a0=" + (cfg.a0Auto ? std::string("auto") : format_g17(cfg.a0)) + "\n";
  s += "alpha=" + format_g17(cfg.alpha) + "\n";
  s += "ccal=" + cfg.ccal + "\n";
  s += "census_count=" + std::to_string(cfg.censusCount) + "\n";
  s += "census_steps=" + std::to_string(cfg.censusSteps) + "\n";
  s += "d=" + std::to_string(cfg.d) + "\n";
  s += "ell=" + std::to_string(cfg.ell) + "\n";
  s += "grid_size=" + std::to_string(cfg.gridSize) + "\n";
  s += "inner_half_width=" + format_g17(cfg.innerHalfWidth) + "\n";
  s += "lemma26_proof_scaling=" +
       std::string(cfg.lemma26ProofScaling ? "1" : "0") + "\n";
  s += "n_values=" + join_ints(cfg.nValues) + "\n";
  s += "order=" + std::to_string(cfg.order) + "\n";
  s += "outer_half_width=" + format_g17(cfg.outerHalfWidth) + "\n";
  s += "parity=" + cfg.parity + "\n";
  s += "r_values=" + join_doubles(cfg.rValues) + "\n";
  s += "sample_count=" + std::to_string(cfg.sampleCount) + "\n";
  s += "seed=" + std::to_string(cfg.seed) + "\n";
  s += "slope_target=" + format_g17(cfg.slopeTarget) + "\n";
  return s;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a(canonical_string(cfg));
}

MapSpec to_map_spec(const ExperimentConfig& cfg) {
  MapSpec spec;
  spec.parity = cfg.parity == "even" ? Parity::Even : Parity::Odd;
  spec.criticalOrder = cfg.order;
  spec.innerHalfWidth = cfg.innerHalfWidth;
  spec.outerHalfWidth = cfg.parity == "even" ? 1.0 : cfg.outerHalfWidth;
  spec.a0 = cfg.a0;
  spec.slopeTarget = cfg.slopeTarget;
  return spec;
}

} // namespace vlab
