#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace pathsum {

// Flat `key = value` text with `[section]` headers; '#' starts a comment.
// Keys before the first header are global and visible from every section.
class Config {
 public:
  struct Entry {
    std::string value;
    std::string origin;  // "file:line" or "--flag"
  };

  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config read(const std::string& path);

  // Overrides (or adds) a key in a section; used for command-line flags.
  void set(const std::string& section, const std::string& key, const std::string& value, const std::string& origin);

  const std::map<std::string, std::map<std::string, Entry>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;  // "" holds globals
};

// Typed view of one section merged over the globals. Every accessor marks its
// key as used; finish() rejects section keys nobody asked for (unused globals are fine).
class ConfigSection {
 public:
  ConfigSection(const Config& cfg, const std::string& name);

  bool has(const std::string& key) const;
  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  unsigned seed(const std::string& key, unsigned fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key);
  std::vector<int> integers(const std::string& key);
  std::vector<std::string> words(const std::string& key);  // comma separated
  // Index of the value within `allowed`.
  int choice(const std::string& key, const std::vector<std::string>& allowed, int fallback);

  void finish() const;

 private:
  const Config::Entry& entry(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string name_;
  std::map<std::string, Config::Entry> merged_;
  std::set<std::string> own_;
  std::set<std::string> used_;
};

}  // namespace pathsum
