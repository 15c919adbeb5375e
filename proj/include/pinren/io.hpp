#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pinren {

inline constexpr char kPinrenVersion[] = "1.0.0";

// Flat key=value experiment configuration.  Lines hold one `key = value`
// pair each; blank lines and #-comments are skipped.  Keys are lowercase
// identifiers; duplicates are rejected so a config file cannot silently
// shadow itself.  The canonical form (sorted keys, LF) is what gets hashed
// into output manifests, so parse -> canonical -> parse is lossless.
class RunConfig {
public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text);

  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

  // typed access; errors name the offending key
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t raw_seed(const std::string& key) const;

  // command-line overrides land here after file parsing
  void override_value(const std::string& key, const std::string& value);

  // strict schema check: every present key must be in the allowed list
  void restrict_keys(const std::vector<std::string>& allowed) const;

  std::string canonical() const;
  std::uint64_t hash() const; // FNV-1a over the canonical form

private:
  std::map<std::string, std::string> entries_;
};

// Shortest representation that parses back to the identical double; '.'
// decimal separator regardless of locale.  The reproducibility story of
// every CSV rests on this.
std::string format_double(double x);

// Simple rectangular CSV assembled in memory and written in one shot with
// LF endings; cells are preformatted strings.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

} // namespace pinren
