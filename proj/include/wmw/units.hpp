#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wmw {

enum class Dimension {
  dimensionless,
  length,
  time,
  mass,
  speed,
  acceleration,
  force,
  energy,
  power,
  temperature,
  current,
  voltage,
  resistance,
  frequency,
  pressure,
  angle,
  angular_velocity,
  volume,
  density,
  specific_heat,
  magnetic_flux,
  charge,
  spring_constant,
};

/// One canonical unit token. Converting to the dimension's base unit is
/// `value * scale + offset`; only temperatures carry a non-zero offset.
struct UnitInfo {
  std::string_view token;
  Dimension dimension;
  double scale;
  double offset = 0.0;
};

/// Maps a free-form unit spelling ("m/s^2", "ohms", "degC") onto its canonical
/// token ("m/s²", "Ω", "°C"). Returns nullopt for unknown spellings.
std::optional<std::string> canonical_unit(std::string_view spelled);

/// Looks up a canonical token (or any known spelling).
const UnitInfo* find_unit(std::string_view spelled);

/// Converts between two units of the same dimension; nullopt when either unit
/// is unknown or the dimensions differ.
std::optional<double> convert(double value, std::string_view from, std::string_view to);

/// A commonly confused unit pair. Most pairs share a dimension; a few are
/// cross-dimension confusions such as velocity vs acceleration.
struct UnitConfusion {
  std::string_view first;
  std::string_view second;
};

std::span<const UnitConfusion> unit_confusion_table();

/// Alternatives a unit is commonly confused with, in table order.
std::vector<std::string> confusable_units(std::string_view unit);

/// Multiplicative scale errors produced by same-dimension confusions
/// (e.g. 100 for m↔cm, 3.6 for m/s↔km/h), both directions, deduplicated.
const std::vector<double>& confusion_scale_factors();

}  // namespace wmw
