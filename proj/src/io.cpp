#include "pinren/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace pinren {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
    ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
    --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty())
    return false;
  for (char c : k)
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

} // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#')
      continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has no '='");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!valid_key(key))
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": bad key '" + key + "'");
    if (value.empty())
      throw std::invalid_argument("config key '" + key + "' has empty value");
    if (!cfg.entries_.emplace(key, value).second)
      throw std::invalid_argument("config key '" + key + "' appears twice");
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  return parse_text(read_text_file(path));
}

bool RunConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::string RunConfig::text(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument("config key '" + key + "' is required");
  return it->second;
}

std::string RunConfig::text_or(const std::string& key,
                               const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double RunConfig::number(const std::string& key) const {
  const std::string v = text(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config key '" + key + "' is not a number: '" +
                                v + "'");
  return out;
}

double RunConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  const std::string v = text(key);
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config key '" + key +
                                "' is not an integer: '" + v + "'");
  return out;
}

std::int64_t RunConfig::integer_or(const std::string& key,
                                   std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t RunConfig::raw_seed(const std::string& key) const {
  const std::string v = text(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config key '" + key +
                                "' is not an unsigned seed: '" + v + "'");
  return out;
}

void RunConfig::override_value(const std::string& key,
                               const std::string& value) {
  if (!valid_key(key))
    throw std::invalid_argument("bad override key '" + key + "'");
  entries_[key] = value;
}

void RunConfig::restrict_keys(const std::vector<std::string>& allowed) const {
  for (const auto& kv : entries_) {
    bool ok = false;
    for (const auto& a : allowed)
      if (kv.first == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("unknown config key '" + kv.first + "'");
  }
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& kv : entries_) {
    out += kv.first;
    out += '=';
    out += kv.second;
    out += '\n';
  }
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c)
      out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::logic_error("csv row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c)
        out += ',';
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf);
}

} // namespace pinren
