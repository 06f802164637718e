#include "pathsum/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pathsum/error.hpp"

namespace pathsum {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") {
    out = INFINITY;
    return true;
  }
  const char* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, out);
  return r.ec == std::errc() && r.ptr == end && !t.empty() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.sections_[""];
  std::string section;
  std::istringstream in(text);
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    const std::string where = source + ":" + std::to_string(no);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ParseError(where + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(where + ": empty key");
    if (value.empty()) throw ParseError(where + ": key '" + key + "' has no value");
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) throw ParseError(where + ": key '" + key + "' repeated (first at " + sec[key].origin + ")");
    sec[key] = {value, where};
  }
  return cfg;
}

Config Config::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& section, const std::string& key, const std::string& value, const std::string& origin) {
  sections_[section][key] = {value, origin};
}

ConfigSection::ConfigSection(const Config& cfg, const std::string& name) : name_(name) {
  const auto& all = cfg.sections();
  if (auto g = all.find(""); g != all.end()) merged_ = g->second;
  if (auto s = all.find(name); s != all.end())
    for (const auto& [k, e] : s->second) {
      merged_[k] = e;
      own_.insert(k);
    }
}

bool ConfigSection::has(const std::string& key) const { return merged_.count(key) != 0; }

const Config::Entry& ConfigSection::entry(const std::string& key) {
  auto it = merged_.find(key);
  if (it == merged_.end()) throw ParseError("[" + name_ + "]: required key '" + key + "' is missing");
  used_.insert(key);
  return it->second;
}

void ConfigSection::fail(const std::string& key, const std::string& what) const {
  throw ParseError(merged_.at(key).origin + ": key '" + key + "': " + what + ", got '" + merged_.at(key).value + "'");
}

double ConfigSection::number(const std::string& key) {
  double v = 0.0;
  if (!parse_double(entry(key).value, v)) fail(key, "expected a finite number");
  return v;
}

double ConfigSection::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

int ConfigSection::integer(const std::string& key, int fallback) {
  if (!has(key)) return fallback;
  const std::string t = trim(entry(key).value);
  int v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail(key, "expected an integer");
  return v;
}

unsigned ConfigSection::seed(const std::string& key, unsigned fallback) {
  if (!has(key)) return fallback;
  const std::string t = trim(entry(key).value);
  unsigned v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail(key, "expected a non-negative integer");
  return v;
}

std::string ConfigSection::text(const std::string& key, const std::string& fallback) {
  return has(key) ? entry(key).value : fallback;
}

std::vector<double> ConfigSection::numbers(const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split(entry(key).value, ',')) {
    double v = 0.0;
    if (!parse_double(item, v)) fail(key, "expected a comma-separated list of finite numbers");
    out.push_back(v);
  }
  return out;
}

std::vector<int> ConfigSection::integers(const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split(entry(key).value, ',')) {
    int v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
      fail(key, "expected a comma-separated list of integers");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> ConfigSection::words(const std::string& key) {
  auto out = split(entry(key).value, ',');
  for (const auto& w : out)
    if (w.empty()) fail(key, "empty item in list");
  return out;
}

int ConfigSection::choice(const std::string& key, const std::vector<std::string>& allowed, int fallback) {
  if (!has(key)) return fallback;
  const std::string v = entry(key).value;
  for (std::size_t k = 0; k < allowed.size(); ++k)
    if (allowed[k] == v) return static_cast<int>(k);
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
  fail(key, "expected one of " + list);
}

void ConfigSection::finish() const {
  for (const auto& k : own_)
    if (const auto& e = merged_.at(k); !used_.count(k)) throw ParseError(e.origin + ": unknown key '" + k + "' for [" + name_ + "]");
}

}  // namespace pathsum
