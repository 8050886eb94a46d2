#include "bpeps/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace bpeps {

ConfigError::ConfigError(int l, const std::string& msg)
    : std::runtime_error(l > 0 ? "line " + std::to_string(l) + ": " + msg : msg), line(l) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& v, int line, const std::string& key) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(line, "invalid value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(line, "expected true or false for " + key + ", got '" + v + "'");
}

Index parse_cap(const std::string& v, int line, const std::string& key) {
  if (v == "unbounded") return kUnbounded;
  const auto n = parse_number<long long>(v, line, key);
  if (n < 1) throw ConfigError(line, key + " must be at least 1 or 'unbounded'");
  return static_cast<Index>(n);
}

std::string cap_text(Index v) { return v == kUnbounded ? "unbounded" : std::to_string(v); }

std::string real_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, int)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"model",
       {
           {"kind",
            [](ExperimentConfig& c, const std::string& v, int l) {
              if (v != "tfi" && v != "heisenberg") throw ConfigError(l, "kind must be tfi or heisenberg");
              c.run.kind = v;
            }},
           {"lx",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.lx = parse_number<int>(v, l, "lx");
              if (c.run.lx < 1) throw ConfigError(l, "lx must be at least 1");
            }},
           {"ly",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.ly = parse_number<int>(v, l, "ly");
              if (c.run.ly < 1) throw ConfigError(l, "ly must be at least 1");
            }},
           {"g", [](ExperimentConfig& c, const std::string& v, int l) { c.run.g = parse_number<double>(v, l, "g"); }},
       }},
      {"run",
       {
           {"p",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.p = parse_number<long long>(v, l, "p");
              if (c.run.p < 1) throw ConfigError(l, "p must be at least 1");
            }},
           {"chi", [](ExperimentConfig& c, const std::string& v, int l) { c.run.chi = parse_cap(v, l, "chi"); }},
           {"eta", [](ExperimentConfig& c, const std::string& v, int l) { c.run.eta = parse_cap(v, l, "eta"); }},
           {"tau",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.tau = parse_number<double>(v, l, "tau");
              if (!(c.run.tau >= 0.0)) throw ConfigError(l, "tau must be nonnegative");
            }},
           {"iterations",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.iterations = parse_number<int>(v, l, "iterations");
              if (c.run.iterations < 0) throw ConfigError(l, "iterations must be nonnegative");
            }},
           {"seed",
            [](ExperimentConfig& c, const std::string& v, int l) { c.run.seed = parse_number<std::uint64_t>(v, l, "seed"); }},
           {"zipup_tol",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.zipup_tol = parse_number<double>(v, l, "zipup_tol");
              if (!(c.run.zipup_tol >= 0.0)) throw ConfigError(l, "zipup_tol must be nonnegative");
            }},
           {"svd_tol",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.svd_tol = parse_number<double>(v, l, "svd_tol");
              if (!(c.run.svd_tol >= 0.0)) throw ConfigError(l, "svd_tol must be nonnegative");
            }},
           {"disentangler_iters",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.disentangler_iters = parse_number<int>(v, l, "disentangler_iters");
              if (c.run.disentangler_iters < 0) throw ConfigError(l, "disentangler_iters must be nonnegative");
            }},
           {"disentangle",
            [](ExperimentConfig& c, const std::string& v, int l) { c.run.disentangle = parse_bool(v, l, "disentangle"); }},
           {"reduced_update",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.reduced_update = parse_bool(v, l, "reduced_update");
            }},
           {"zipup_oversample",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.zipup_oversample = parse_number<int>(v, l, "zipup_oversample");
              if (c.run.zipup_oversample < 1) throw ConfigError(l, "zipup_oversample must be at least 1");
            }},
           {"measure_scale",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.measure_scale = parse_number<int>(v, l, "measure_scale");
              if (c.run.measure_scale < 1) throw ConfigError(l, "measure_scale must be at least 1");
            }},
           {"energy_period",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.energy_period = parse_number<int>(v, l, "energy_period");
              if (c.run.energy_period < 1) throw ConfigError(l, "energy_period must be at least 1");
            }},
           {"checkpoint_period",
            [](ExperimentConfig& c, const std::string& v, int l) {
              c.run.checkpoint_period = parse_number<int>(v, l, "checkpoint_period");
              if (c.run.checkpoint_period < 0) throw ConfigError(l, "checkpoint_period must be nonnegative");
            }},
       }},
      {"output",
       {
           {"dir",
            [](ExperimentConfig& c, const std::string& v, int l) {
              if (v.empty()) throw ConfigError(l, "dir must not be empty");
              c.out_dir = v;
            }},
           {"formats",
            [](ExperimentConfig& c, const std::string& v, int l) {
              std::vector<std::string> f;
              std::stringstream ss(v);
              for (std::string item; std::getline(ss, item, ',');) {
                item = trim(item);
                if (item != "csv" && item != "json") throw ConfigError(l, "unknown output format '" + item + "'");
                if (std::find(f.begin(), f.end(), item) == f.end()) f.push_back(item);
              }
              c.formats = f;
            }},
           {"oracle", [](ExperimentConfig& c, const std::string& v, int l) { c.oracle = parse_bool(v, l, "oracle"); }},
           {"oracle_cap",
            [](ExperimentConfig& c, const std::string& v, int l) { c.oracle_cap = parse_cap(v, l, "oracle_cap"); }},
           {"deterministic",
            [](ExperimentConfig& c, const std::string& v, int l) { c.deterministic = parse_bool(v, l, "deterministic"); }},
       }},
  };
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::string> seen_sections, seen_keys;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!schema().count(section)) throw ConfigError(line, "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) throw ConfigError(line, "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(line, "key '" + key + "' outside any section");
    const auto& keys = schema().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]");
    if (!seen_keys.insert(section + "." + key).second) throw ConfigError(line, "duplicate key '" + key + "'");
    it->second(c, value, line);
  }
  try {
    validate(c.run);
  } catch (const ArgumentError& e) {
    throw ConfigError(0, e.what());
  }
  if (c.oracle_cap < 1) throw ConfigError(0, "oracle_cap must be positive");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  const RunConfig& r = c.run;
  o << "[model]\n";
  o << "kind = " << r.kind << "\n";
  o << "lx = " << r.lx << "\n";
  o << "ly = " << r.ly << "\n";
  o << "g = " << real_text(r.g) << "\n";
  o << "\n[run]\n";
  o << "p = " << r.p << "\n";
  o << "chi = " << cap_text(r.chi) << "\n";
  o << "eta = " << cap_text(r.eta) << "\n";
  o << "tau = " << real_text(r.tau) << "\n";
  o << "iterations = " << r.iterations << "\n";
  o << "seed = " << r.seed << "\n";
  o << "zipup_tol = " << real_text(r.zipup_tol) << "\n";
  o << "svd_tol = " << real_text(r.svd_tol) << "\n";
  o << "disentangler_iters = " << r.disentangler_iters << "\n";
  o << "disentangle = " << (r.disentangle ? "true" : "false") << "\n";
  o << "reduced_update = " << (r.reduced_update ? "true" : "false") << "\n";
  o << "zipup_oversample = " << r.zipup_oversample << "\n";
  o << "measure_scale = " << r.measure_scale << "\n";
  o << "energy_period = " << r.energy_period << "\n";
  o << "checkpoint_period = " << r.checkpoint_period << "\n";
  o << "\n[output]\n";
  o << "dir = " << c.out_dir << "\n";
  o << "formats = ";
  for (std::size_t k = 0; k < c.formats.size(); ++k) o << (k ? "," : "") << c.formats[k];
  o << "\n";
  o << "oracle = " << (c.oracle ? "true" : "false") << "\n";
  o << "oracle_cap = " << cap_text(c.oracle_cap) << "\n";
  o << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace bpeps
