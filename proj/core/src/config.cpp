#include "iontrap/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "iontrap/error.hpp"

namespace iontrap {
namespace {

struct UnitEntry {
  std::string_view name;
  Dimension dim;
  double scale;
};

constexpr UnitEntry unit_table[] = {
    {"m", Dimension::length, 1.0},           {"cm", Dimension::length, 1e-2},
    {"mm", Dimension::length, 1e-3},         {"um", Dimension::length, 1e-6},
    {"nm", Dimension::length, 1e-9},         {"Hz", Dimension::frequency, 1.0},
    {"kHz", Dimension::frequency, 1e3},      {"MHz", Dimension::frequency, 1e6},
    {"GHz", Dimension::frequency, 1e9},      {"V", Dimension::voltage, 1.0},
    {"mV", Dimension::voltage, 1e-3},        {"kV", Dimension::voltage, 1e3},
    {"s", Dimension::time, 1.0},             {"ms", Dimension::time, 1e-3},
    {"us", Dimension::time, 1e-6},           {"ns", Dimension::time, 1e-9},
    {"ps", Dimension::time, 1e-12},          {"eV", Dimension::energy, 1.0},
    {"meV", Dimension::energy, 1e-3},        {"keV", Dimension::energy, 1e3},
    {"rad", Dimension::angle, 1.0},          {"deg", Dimension::angle, 3.14159265358979323846 / 180.0},
    {"ohm", Dimension::resistance, 1.0},     {"mohm", Dimension::resistance, 1e-3},
    {"K", Dimension::temperature, 1.0},      {"ohm_m", Dimension::resistivity, 1.0},
    {"ohm_cm", Dimension::resistivity, 1e-2},
};

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::none: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::frequency: return "frequency";
    case Dimension::voltage: return "voltage";
    case Dimension::time: return "time";
    case Dimension::energy: return "energy";
    case Dimension::angle: return "angle";
    case Dimension::resistance: return "resistance";
    case Dimension::temperature: return "temperature";
    case Dimension::resistivity: return "resistivity";
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view s, int line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid number '" + std::string(s) + "'", line);
  return v;
}

double unit_scale(std::string_view unit, Dimension d, int line) {
  for (const auto& u : unit_table) {
    if (u.name != unit) continue;
    if (u.dim != d) {
      throw ConfigError("unit '" + std::string(unit) + "' is a " + std::string(dimension_name(u.dim)) +
                            " unit; expected " + std::string(dimension_name(d)),
                        line);
    }
    return u.scale;
  }
  throw ConfigError("unknown unit '" + std::string(unit) + "'", line);
}

} // namespace

std::string_view base_unit(Dimension d) {
  switch (d) {
    case Dimension::none: return "";
    case Dimension::length: return "m";
    case Dimension::frequency: return "Hz";
    case Dimension::voltage: return "V";
    case Dimension::time: return "s";
    case Dimension::energy: return "eV";
    case Dimension::angle: return "rad";
    case Dimension::resistance: return "ohm";
    case Dimension::temperature: return "K";
    case Dimension::resistivity: return "ohm_m";
  }
  return "";
}

double parse_quantity(std::string_view text, Dimension d, int line) {
  auto parts = split_ws(text);
  if (parts.empty()) throw ConfigError("missing value", line);
  if (parts.size() == 1) {
    // unit written flush against the number: "0.25ms"
    const std::string_view t = parts[0];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && ptr != t.data() + t.size()) {
      const auto n = static_cast<std::size_t>(ptr - t.data());
      parts = {t.substr(0, n), t.substr(n)};
    }
  }
  if (parts.size() > 2) throw ConfigError("expected '<number> <unit>', got '" + std::string(text) + "'", line);
  const double v = parse_number(parts[0], line);
  if (d == Dimension::none) {
    if (parts.size() == 2) throw ConfigError("dimensionless value must not carry a unit", line);
    return v;
  }
  if (parts.size() == 1) {
    throw ConfigError("value '" + std::string(text) + "' needs a " + std::string(dimension_name(d)) + " unit", line);
  }
  return v * unit_scale(parts[1], d, line);
}

std::string format_quantity(double v, Dimension d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (d != Dimension::none) s += " " + std::string(base_unit(d));
  return s;
}

// ---- Section ----------------------------------------------------------------

const Config::Entry* Config::Section::find(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const Config::Entry& Config::Section::need(std::string_view key) const {
  if (const auto* e = find(key)) return *e;
  throw ConfigError("section [" + name_ + "] is missing required key '" + std::string(key) + "'", line_);
}

std::string Config::Section::text(std::string_view key, std::optional<std::string> fallback) const {
  if (const auto* e = find(key)) return e->value;
  if (fallback) return *fallback;
  return need(key).value;
}

double Config::Section::quantity(std::string_view key, Dimension d, std::optional<double> fallback) const {
  if (const auto* e = find(key)) return parse_quantity(e->value, d, e->line);
  if (fallback) return *fallback;
  const auto& e = need(key);
  return parse_quantity(e.value, d, e.line);
}

std::optional<double> Config::Section::optional_quantity(std::string_view key, Dimension d) const {
  if (const auto* e = find(key)) return parse_quantity(e->value, d, e->line);
  return std::nullopt;
}

long Config::Section::integer(std::string_view key, std::optional<long> fallback) const {
  const auto* e = find(key);
  if (!e) {
    if (fallback) return *fallback;
    e = &need(key);
  }
  long v = 0;
  const auto* end = e->value.data() + e->value.size();
  auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + e->key + "' must be an integer", e->line);
  return v;
}

bool Config::Section::flag(std::string_view key, std::optional<bool> fallback) const {
  const auto* e = find(key);
  if (!e) {
    if (fallback) return *fallback;
    e = &need(key);
  }
  if (e->value == "yes" || e->value == "true" || e->value == "on") return true;
  if (e->value == "no" || e->value == "false" || e->value == "off") return false;
  throw ConfigError("'" + e->key + "' must be yes/no, true/false or on/off", e->line);
}

Vec3 Config::Section::vector(std::string_view key, Dimension d, std::optional<Vec3> fallback) const {
  const auto* e = find(key);
  if (!e) {
    if (fallback) return *fallback;
    e = &need(key);
  }
  const auto parts = split_ws(e->value);
  const std::size_t expected = d == Dimension::none ? 3 : 4;
  if (parts.size() != expected) {
    throw ConfigError("'" + e->key + "' needs three numbers" + (d == Dimension::none ? "" : " and a unit"), e->line);
  }
  const double scale = d == Dimension::none ? 1.0 : unit_scale(parts[3], d, e->line);
  return {parse_number(parts[0], e->line) * scale, parse_number(parts[1], e->line) * scale,
          parse_number(parts[2], e->line) * scale};
}

void Config::Section::require_known(std::initializer_list<std::string_view> allowed) const {
  for (const auto& e : entries_) {
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
      throw ConfigError("unknown key '" + e.key + "' in section [" + name_ + "]", e.line);
    }
  }
}

// ---- Config -----------------------------------------------------------------

Config Config::parse(std::string_view text) {
  Config cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError("empty section name", line_no);
      if (cfg.section(name)) throw ConfigError("duplicate section [" + name + "]", line_no);
      Section s;
      s.name_ = name;
      s.line_ = line_no;
      cfg.sections_.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    if (cfg.sections_.empty()) throw ConfigError("key outside of any [section]", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    auto& sec = cfg.sections_.back();
    if (sec.find(key)) throw ConfigError("duplicate key '" + key + "' in section [" + sec.name_ + "]", line_no);
    sec.entries_.push_back({key, value, line_no});
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Config::Section* Config::section(std::string_view name) const {
  for (const auto& s : sections_)
    if (s.name_ == name) return &s;
  return nullptr;
}

std::vector<const Config::Section*> Config::sections_with_prefix(std::string_view prefix) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_) {
    if (s.name_.size() > prefix.size() + 1 && s.name_.compare(0, prefix.size(), prefix) == 0 &&
        s.name_[prefix.size()] == '.') {
      out.push_back(&s);
    }
  }
  return out;
}

} // namespace iontrap
