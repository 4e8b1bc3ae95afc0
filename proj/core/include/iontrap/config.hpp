#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iontrap/vec3.hpp"

namespace iontrap {

enum class Dimension { none, length, frequency, voltage, time, energy, angle, resistance, temperature, resistivity };

/// SI base unit written by format_quantity ("m", "Hz", ...; empty for none).
std::string_view base_unit(Dimension d);

/// "15.955 MHz" -> 1.5955e7. Dimensioned quantities must carry a unit.
/// Throws ConfigError (tagged with `line`) on a bad number or unit.
double parse_quantity(std::string_view text, Dimension d, int line = 0);

/// Exact round-trip text in the base unit, e.g. "1.5955e+07 Hz".
std::string format_quantity(double si_value, Dimension d);

/// Plain-text configuration: `[section]` headers and `key = value` lines.
/// `#` starts a comment. Keys are unique within a section.
class Config {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };

  class Section {
   public:
    const std::string& name() const { return name_; }
    int line() const { return line_; }
    const std::vector<Entry>& entries() const { return entries_; }

    const Entry* find(std::string_view key) const;
    bool has(std::string_view key) const { return find(key) != nullptr; }

    std::string text(std::string_view key, std::optional<std::string> fallback = std::nullopt) const;
    double quantity(std::string_view key, Dimension d, std::optional<double> fallback = std::nullopt) const;
    std::optional<double> optional_quantity(std::string_view key, Dimension d) const;
    long integer(std::string_view key, std::optional<long> fallback = std::nullopt) const;
    bool flag(std::string_view key, std::optional<bool> fallback = std::nullopt) const;
    /// Three numbers followed by one unit: "0 0 -5 mm".
    Vec3 vector(std::string_view key, Dimension d, std::optional<Vec3> fallback = std::nullopt) const;

    /// Throws ConfigError for any key not in `allowed`.
    void require_known(std::initializer_list<std::string_view> allowed) const;

   private:
    friend class Config;
    const Entry& need(std::string_view key) const;
    std::string name_;
    int line_ = 0;
    std::vector<Entry> entries_;
  };

  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  const std::vector<Section>& sections() const { return sections_; }
  const Section* section(std::string_view name) const;
  /// Sections named "<prefix>.<suffix>", in file order.
  std::vector<const Section*> sections_with_prefix(std::string_view prefix) const;

 private:
  std::vector<Section> sections_;
};

} // namespace iontrap
