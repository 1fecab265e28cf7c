#include "config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "capfade/text.hpp"
#include "usage.hpp"

namespace capfade::cli {

Config Config::parse(std::istream& in, const std::string& origin) {
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto key = text::trim(t.substr(0, eq));
    if (key.empty()) throw UsageError(origin + ":" + std::to_string(lineno) + ": empty key");
    c.values_[std::string(key)] = std::string(text::trim(t.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  auto c = parse(in, path.string());
  c.base_dir = path.parent_path();
  return c;
}

void Config::set(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + assignment + "'");
  auto key = text::trim(std::string_view(assignment).substr(0, eq));
  if (key.empty()) throw UsageError("--set with empty key");
  set(std::string(key), std::string(text::trim(std::string_view(assignment).substr(eq + 1))));
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string Config::require_str(const std::string& key) const {
  auto v = get(key);
  if (!v || v->empty()) throw UsageError("missing required setting '" + key + "'");
  return *v;
}

double Config::number(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  double out = 0.0;
  if (!text::parse_double(*v, out)) throw UsageError(key + ": not a number: '" + *v + "'");
  return out;
}

long long Config::integer(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw UsageError(key + ": not an integer: '" + *v + "'");
  }
  return out;
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw UsageError(key + ": not an unsigned 64-bit value: '" + *v + "'");
  }
  return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw UsageError(key + ": expected true or false, got '" + *v + "'");
}

std::vector<int> Config::int_list(const std::string& key, const std::vector<int>& fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<int> out;
  if (text::trim(*v).empty()) return out;
  for (auto part : text::split(*v, ',')) {
    int x = 0;
    if (!text::parse_int(part, x)) throw UsageError(key + ": bad integer '" + std::string(part) + "'");
    out.push_back(x);
  }
  return out;
}

std::vector<double> Config::number_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  if (text::trim(*v).empty()) return out;
  for (auto part : text::split(*v, ',')) {
    double x = 0;
    if (!text::parse_double(part, x)) throw UsageError(key + ": bad number '" + std::string(part) + "'");
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> Config::str_list(const std::string& key) const {
  std::vector<std::string> out;
  auto v = get(key);
  if (!v || text::trim(*v).empty()) return out;
  for (auto part : text::split(*v, ',')) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::optional<std::string> scoped(const Config& c, const std::string& prefix,
                                  const std::string& fallback_prefix, const std::string& key) {
  if (auto v = c.get(prefix + key)) return v;
  return c.get(fallback_prefix + key);
}

std::optional<DatasetProfile> dataset_profile(const std::string& name) {
  if (name == "rwth") return DatasetProfile{1.85, 500, 0.8};
  if (name == "stanford") return DatasetProfile{1.1, 200, 0.8};
  if (name == "oxford") return DatasetProfile{0.74, 500, 0.8};
  if (name == "nasa") return DatasetProfile{2.0, 0, 0.7};
  return std::nullopt;
}

}  // namespace capfade::cli
