#include "wmw/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace wmw {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr auto kUnits = std::to_array<UnitInfo>({
    {"", Dimension::dimensionless, 1.0},
    {"m", Dimension::length, 1.0},
    {"cm", Dimension::length, 0.01},
    {"mm", Dimension::length, 0.001},
    {"km", Dimension::length, 1000.0},
    {"s", Dimension::time, 1.0},
    {"ms", Dimension::time, 0.001},
    {"min", Dimension::time, 60.0},
    {"h", Dimension::time, 3600.0},
    {"kg", Dimension::mass, 1.0},
    {"g", Dimension::mass, 0.001},
    {"m/s", Dimension::speed, 1.0},
    {"km/h", Dimension::speed, 1.0 / 3.6},
    {"cm/s", Dimension::speed, 0.01},
    {"m/s²", Dimension::acceleration, 1.0},
    {"cm/s²", Dimension::acceleration, 0.01},
    {"N", Dimension::force, 1.0},
    {"kN", Dimension::force, 1000.0},
    {"J", Dimension::energy, 1.0},
    {"kJ", Dimension::energy, 1000.0},
    {"cal", Dimension::energy, 4.184},
    {"W", Dimension::power, 1.0},
    {"kW", Dimension::power, 1000.0},
    {"°C", Dimension::temperature, 1.0},
    {"K", Dimension::temperature, 1.0, -273.15},
    {"°F", Dimension::temperature, 5.0 / 9.0, -160.0 / 9.0},
    {"A", Dimension::current, 1.0},
    {"mA", Dimension::current, 0.001},
    {"V", Dimension::voltage, 1.0},
    {"kV", Dimension::voltage, 1000.0},
    {"mV", Dimension::voltage, 0.001},
    {"Ω", Dimension::resistance, 1.0},
    {"kΩ", Dimension::resistance, 1000.0},
    {"Hz", Dimension::frequency, 1.0},
    {"kHz", Dimension::frequency, 1000.0},
    {"Pa", Dimension::pressure, 1.0},
    {"kPa", Dimension::pressure, 1000.0},
    {"deg", Dimension::angle, 1.0},
    {"rad", Dimension::angle, 180.0 / kPi},
    {"rad/s", Dimension::angular_velocity, 1.0},
    {"rpm", Dimension::angular_velocity, 2.0 * kPi / 60.0},
    {"m³", Dimension::volume, 1.0},
    {"L", Dimension::volume, 0.001},
    {"kg/m³", Dimension::density, 1.0},
    {"g/cm³", Dimension::density, 1000.0},
    {"J/(kg·K)", Dimension::specific_heat, 1.0},
});

constexpr auto kExtraUnits = std::to_array<UnitInfo>({
    {"cal/(g·°C)", Dimension::specific_heat, 4184.0},
    {"Wb", Dimension::magnetic_flux, 1.0},
    {"mWb", Dimension::magnetic_flux, 0.001},
    {"C", Dimension::charge, 1.0},
    {"N/m", Dimension::spring_constant, 1.0},
});

struct Alias {
  std::string_view spelled;
  std::string_view token;
};

// Keys are compared after lower-casing and stripping spaces, so each alias is
// written in that folded form.
constexpr auto kAliases = std::to_array<Alias>({
    {"meter", "m"},          {"meters", "m"},          {"metre", "m"},
    {"metres", "m"},         {"centimeters", "cm"},    {"kilometers", "km"},
    {"sec", "s"},            {"second", "s"},          {"seconds", "s"},
    {"millisecond", "ms"},   {"milliseconds", "ms"},   {"kilogram", "kg"},
    {"kilograms", "kg"},     {"gram", "g"},            {"grams", "g"},
    {"m/sec", "m/s"},        {"mps", "m/s"},           {"km/hr", "km/h"},
    {"kph", "km/h"},         {"kmh", "km/h"},          {"m/s^2", "m/s²"},
    {"m/s2", "m/s²"},        {"ms^-2", "m/s²"},        {"m/s/s", "m/s²"},
    {"m/sec^2", "m/s²"},     {"cm/s^2", "cm/s²"},      {"cm/s2", "cm/s²"},
    {"newton", "N"},         {"newtons", "N"},         {"kilonewton", "kN"},
    {"joule", "J"},          {"joules", "J"},          {"kilojoule", "kJ"},
    {"watt", "W"},           {"watts", "W"},           {"degc", "°C"},
    {"celsius", "°C"},       {"ºc", "°C"},             {"kelvin", "K"},
    {"degf", "°F"},          {"fahrenheit", "°F"},     {"ºf", "°F"},
    {"amp", "A"},            {"amps", "A"},            {"ampere", "A"},
    {"amperes", "A"},        {"volt", "V"},            {"volts", "V"},
    {"ohm", "Ω"},            {"ohms", "Ω"},            {"kohm", "kΩ"},
    {"kohms", "kΩ"},         {"hertz", "Hz"},          {"pascal", "Pa"},
    {"pascals", "Pa"},       {"°", "deg"},             {"degree", "deg"},
    {"degrees", "deg"},      {"radian", "rad"},        {"radians", "rad"},
    {"rad/sec", "rad/s"},    {"m^3", "m³"},            {"m3", "m³"},
    {"liter", "L"},          {"liters", "L"},          {"kg/m^3", "kg/m³"},
    {"kg/m3", "kg/m³"},      {"g/cm^3", "g/cm³"},      {"j/(kg*k)", "J/(kg·K)"},
    {"j/kg/k", "J/(kg·K)"},  {"j/(kgk)", "J/(kg·K)"},  {"weber", "Wb"},
});

constexpr auto kConfusions = std::to_array<UnitConfusion>({
    {"m", "cm"},     {"m", "km"},          {"N", "kN"},     {"J", "kJ"},
    {"°C", "°F"},    {"s", "ms"},          {"kg", "g"},     {"m/s", "km/h"},
    {"Ω", "kΩ"},     {"Hz", "kHz"},        {"Pa", "kPa"},   {"m/s²", "cm/s²"},
    {"A", "mA"},     {"V", "kV"},          {"W", "kW"},     {"m/s", "m/s²"},
    {"rad/s", "rpm"}, {"m³", "L"},         {"kg/m³", "g/cm³"}, {"J/(kg·K)", "cal/(g·°C)"},
    {"Wb", "mWb"},   {"deg", "rad"},
});

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (std::isspace(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const UnitInfo* find_exact(std::string_view token) {
  for (const auto& u : kUnits)
    if (u.token == token) return &u;
  for (const auto& u : kExtraUnits)
    if (u.token == token) return &u;
  return nullptr;
}

}  // namespace

std::optional<std::string> canonical_unit(std::string_view spelled) {
  std::string trimmed;
  for (char c : spelled)
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
  if (const auto* u = find_exact(trimmed)) return std::string(u->token);
  const std::string folded = fold(spelled);
  for (const auto& a : kAliases)
    if (a.spelled == folded) return std::string(a.token);
  // Case-insensitive match on canonical tokens, except where case carries
  // meaning (m vs M is not ambiguous here, but mA vs MA or ms vs Ms would be).
  for (const auto& u : kUnits)
    if (fold(u.token) == folded && u.token.size() > 2) return std::string(u.token);
  return std::nullopt;
}

const UnitInfo* find_unit(std::string_view spelled) {
  auto token = canonical_unit(spelled);
  if (!token) return nullptr;
  return find_exact(*token);
}

std::optional<double> convert(double value, std::string_view from, std::string_view to) {
  const UnitInfo* a = find_unit(from);
  const UnitInfo* b = find_unit(to);
  if (a == nullptr || b == nullptr || a->dimension != b->dimension) return std::nullopt;
  if (a == b) return value;
  const double base = value * a->scale + a->offset;
  return (base - b->offset) / b->scale;
}

std::span<const UnitConfusion> unit_confusion_table() { return kConfusions; }

std::vector<std::string> confusable_units(std::string_view unit) {
  std::vector<std::string> out;
  auto token = canonical_unit(unit);
  if (!token) return out;
  for (const auto& c : kConfusions) {
    if (c.first == *token) out.emplace_back(c.second);
    if (c.second == *token) out.emplace_back(c.first);
  }
  return out;
}

const std::vector<double>& confusion_scale_factors() {
  static const std::vector<double> factors = [] {
    std::vector<double> out;
    for (const auto& c : kConfusions) {
      const UnitInfo* a = find_exact(c.first);
      const UnitInfo* b = find_exact(c.second);
      if (a == nullptr || b == nullptr || a->dimension != b->dimension) continue;
      if (a->offset != 0.0 || b->offset != 0.0) continue;
      const double f = a->scale / b->scale;
      for (double x : {f, 1.0 / f}) {
        bool seen = std::any_of(out.begin(), out.end(),
                                [x](double y) { return std::abs(x - y) <= 1e-9 * std::abs(y); });
        if (!seen) out.push_back(x);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return factors;
}

}  // namespace wmw
