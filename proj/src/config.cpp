#include "lmk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lmk/errors.hpp"

namespace lmk {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

const std::unordered_map<std::string, std::unordered_set<std::string>>&
schema() {
  static const std::unordered_map<std::string,
                                  std::unordered_set<std::string>> s = {
      {"rerank",
       {"g11", "g12", "g13", "g21", "g22", "g23", "g31", "g32", "g33", "h11",
        "h12", "h13", "h21", "h22", "h23", "h31", "h32", "h33",
        "penalty_condition"}},
      {"recognize", {"alpha", "beta", "gamma", "theta", "t_nl", "K"}},
      {"io", {"threads", "query_block", "gallery_block"}},
      {"tune", {"cap"}},
      // Grid files reuse the parameter names of the section they tune.
      {"grid",
       {"g11", "g12", "g13", "g21", "g22", "g23", "g31", "g32", "g33", "h11",
        "h12", "h13", "h21", "h22", "h23", "h31", "h32", "h33",
        "penalty_condition", "alpha", "beta", "gamma", "theta", "t_nl", "K"}},
  };
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* first = value.data();
  const auto* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad numeric value for " + key + ": " + value);
  }
  return v;
}

std::size_t parse_positive_int(const std::string& key,
                               const std::string& value) {
  std::size_t v = 0;
  const auto* first = value.data();
  const auto* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || v == 0) {
    throw ConfigError("value for " + key + " must be a positive integer: " +
                      value);
  }
  return v;
}

}  // namespace

const ConfigFile::Entries* ConfigFile::find(const std::string& name) const {
  for (const auto& [section, entries] : sections) {
    if (section == name) {
      return &entries;
    }
  }
  return nullptr;
}

ConfigFile parse_config_text(const std::string& text,
                             const std::string& origin) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  ConfigFile::Entries* current = nullptr;
  std::string current_name;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') {
      continue;
    }
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      }
      current_name = trim(stripped.substr(1, stripped.size() - 2));
      if (schema().find(current_name) == schema().end()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": unknown section [" + current_name + "]");
      }
      for (const auto& [existing, _] : cfg.sections) {
        if (existing == current_name) {
          throw ConfigError(origin + ": duplicate section [" + current_name +
                            "]");
        }
      }
      cfg.sections.emplace_back(current_name, ConfigFile::Entries{});
      current = &cfg.sections.back().second;
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    if (current == nullptr) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": key outside any [section]");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    const auto& allowed = schema().at(current_name);
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError(origin + ": unknown key '" + key + "' in [" +
                        current_name + "]");
    }
    for (const auto& [existing, _] : *current) {
      if (existing == key) {
        throw ConfigError(origin + ": duplicate key '" + key + "' in [" +
                          current_name + "]");
      }
    }
    current->emplace_back(key, value);
  }
  return cfg;
}

ConfigFile parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

void write_config_file(const std::filesystem::path& path,
                       const std::string& section,
                       const ConfigFile::Entries& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write config file: " + path.string());
  }
  out << '[' << section << "]\n";
  for (const auto& [key, value] : entries) {
    out << key << " = " << value << '\n';
  }
  if (!out) {
    throw ConfigError("write failed: " + path.string());
  }
}

void set_rerank_param(AdjustmentConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key == "penalty_condition") {
    if (value == "mismatch") {
      cfg.penalty_condition = PenaltyCondition::mismatch;
    } else if (value == "match") {
      cfg.penalty_condition = PenaltyCondition::match;
    } else {
      throw ConfigError("penalty_condition must be mismatch or match: " +
                        value);
    }
    return;
  }
  if (key.size() == 3 && (key[0] == 'g' || key[0] == 'h') && key[1] >= '1' &&
      key[1] <= '3' && key[2] >= '1' && key[2] <= '3') {
    const double v = parse_double(key, value);
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError(key + " must be finite and non-negative: " + value);
    }
    const std::size_t j = std::size_t(key[1] - '1');
    const std::size_t k = std::size_t(key[2] - '1');
    (key[0] == 'g' ? cfg.boost : cfg.penalty)[j][k] = v;
    return;
  }
  throw ConfigError("unknown rerank parameter: " + key);
}

void set_recognize_param(RecognitionConfig& cfg, const std::string& key,
                         const std::string& value) {
  if (key == "alpha") {
    const double v = parse_double(key, value);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ConfigError("alpha must be in [0,1]: " + value);
    }
    cfg.alpha = v;
  } else if (key == "beta") {
    const double v = parse_double(key, value);
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("beta must be finite and non-negative: " + value);
    }
    cfg.beta = v;
  } else if (key == "gamma") {
    const double v = parse_double(key, value);
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("gamma must be finite and non-negative: " + value);
    }
    cfg.gamma = v;
  } else if (key == "theta") {
    // "inf" disables the hard filter.
    if (value == "inf" || value == "+inf") {
      cfg.theta = kHardFilterDisabled;
    } else {
      const double v = parse_double(key, value);
      if (std::isnan(v)) {
        throw ConfigError("theta must not be NaN");
      }
      cfg.theta = v;
    }
  } else if (key == "t_nl") {
    cfg.t_nl = parse_positive_int(key, value);
  } else if (key == "K") {
    cfg.k = parse_positive_int(key, value);
  } else {
    throw ConfigError("unknown recognize parameter: " + key);
  }
}

AdjustmentConfig read_rerank_section(const ConfigFile& cfg) {
  AdjustmentConfig out;
  if (const auto* entries = cfg.find("rerank")) {
    for (const auto& [key, value] : *entries) {
      set_rerank_param(out, key, value);
    }
  }
  return out;
}

RecognitionConfig read_recognize_section(const ConfigFile& cfg) {
  RecognitionConfig out;
  if (const auto* entries = cfg.find("recognize")) {
    for (const auto& [key, value] : *entries) {
      set_recognize_param(out, key, value);
    }
  }
  return out;
}

IoSettings read_io_section(const ConfigFile& cfg) {
  IoSettings out;
  if (const auto* entries = cfg.find("io")) {
    for (const auto& [key, value] : *entries) {
      if (key == "threads") {
        out.threads = int(parse_positive_int(key, value));
      } else if (key == "query_block") {
        out.query_block = parse_positive_int(key, value);
      } else if (key == "gallery_block") {
        out.gallery_block = parse_positive_int(key, value);
      }
    }
  }
  return out;
}

TuneSettings read_tune_section(const ConfigFile& cfg) {
  TuneSettings out;
  if (const auto* entries = cfg.find("tune")) {
    for (const auto& [key, value] : *entries) {
      if (key == "cap") {
        out.cap = parse_positive_int(key, value);
      }
    }
  }
  return out;
}

const std::vector<std::string>& rerank_param_names() {
  static const std::vector<std::string> names = {
      "g11", "g12", "g13", "g21", "g22", "g23", "g31", "g32", "g33",
      "h11", "h12", "h13", "h21", "h22", "h23", "h31", "h32", "h33",
      "penalty_condition"};
  return names;
}

const std::vector<std::string>& recognize_param_names() {
  static const std::vector<std::string> names = {"alpha", "beta",  "gamma",
                                                 "theta", "t_nl", "K"};
  return names;
}

}  // namespace lmk
