#include "wmw/families.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wmw {

namespace {

constexpr double kG = 9.8;
constexpr double kDeg = std::numbers::pi / 180.0;

double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

// Shortest round-trip text for a value, as it appears in JSON.
std::string fmt(double v) { return Json(v).dump(); }

const VariableSpec kGravity{"gravitational_acceleration", "m/s²", kG, kG, 2};

std::vector<FamilySpec> build_registry() {
  std::vector<FamilySpec> r;

  r.push_back({Family::inclined_plane, 2,
               [](int variant) {
                 std::vector<VariableSpec> v{{"incline_angle", "deg", 15, 60, 1},
                                             {"block_mass", "kg", 0.5, 20, 2},
                                             kGravity};
                 if (variant == 1) v.push_back({"coefficient_of_friction", "", 0.05, 0.5, 2});
                 return v;
               },
               "acceleration", "m/s²",
               {"newton", "second law", "incline", "force", "component"},
               [](const VariableMap& in, int) {
                 const double th = in.at("incline_angle") * kDeg;
                 const double mu = in.contains("coefficient_of_friction") ? in.at("coefficient_of_friction") : 0.0;
                 const double a = in.at("gravitational_acceleration") * (std::sin(th) - mu * std::cos(th));
                 return VariableMap{{"acceleration", a}, {"net_force", in.at("block_mass") * a}};
               },
               [](VariableMap& in, int variant, Rng& rng) {
                 if (variant != 1) return;
                 // Keep the block sliding: mu well below tan(theta).
                 const double cap = 0.7 * std::tan(in.at("incline_angle") * kDeg);
                 in["coefficient_of_friction"] = round_to(rng.uniform(0.05, std::max(0.06, cap)), 2);
               }});

  r.push_back({Family::projectile, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"launch_speed", "m/s", 5, 30, 1},
                                                  {"launch_angle", "deg", 15, 75, 1},
                                                  kGravity};
               },
               "range_distance", "m",
               {"projectile", "kinematic", "trajectory", "range", "parabolic"},
               [](const VariableMap& in, int) {
                 const double v = in.at("launch_speed");
                 const double th = in.at("launch_angle") * kDeg;
                 const double g = in.at("gravitational_acceleration");
                 return VariableMap{{"range_distance", v * v * std::sin(2 * th) / g},
                                    {"flight_time", 2 * v * std::sin(th) / g},
                                    {"max_height", std::pow(v * std::sin(th), 2) / (2 * g)}};
               },
               nullptr});

  r.push_back({Family::collision, 2,
               [](int) {
                 return std::vector<VariableSpec>{{"mass_1", "kg", 0.5, 10, 2},
                                                  {"velocity_1", "m/s", 1, 10, 2},
                                                  {"mass_2", "kg", 0.5, 10, 2}};
               },
               "final_velocity", "m/s",
               {"momentum", "conservation", "collision", "impulse"},
               [](const VariableMap& in, int variant) {
                 const double m1 = in.at("mass_1"), v1 = in.at("velocity_1"), m2 = in.at("mass_2");
                 VariableMap out{{"total_momentum", m1 * v1}};
                 if (variant == 0) {
                   out["final_velocity"] = m1 * v1 / (m1 + m2);
                 } else {
                   out["final_velocity"] = 2 * m1 * v1 / (m1 + m2);
                   out["velocity_1_after"] = (m1 - m2) * v1 / (m1 + m2);
                 }
                 return out;
               },
               nullptr});

  r.push_back({Family::pulley, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"mass_1", "kg", 2, 20, 2},
                                                  {"mass_2", "kg", 0.5, 1.8, 2},
                                                  kGravity};
               },
               "acceleration", "m/s²",
               {"atwood", "pulley", "tension", "newton"},
               [](const VariableMap& in, int) {
                 const double m1 = in.at("mass_1"), m2 = in.at("mass_2");
                 const double g = in.at("gravitational_acceleration");
                 return VariableMap{{"acceleration", (m1 - m2) * g / (m1 + m2)},
                                    {"tension", 2 * m1 * m2 * g / (m1 + m2)}};
               },
               [](VariableMap& in, int, Rng& rng) {
                 // Heavier side is mass_1 so the acceleration stays positive.
                 in["mass_2"] = round_to(rng.uniform(0.5, 0.9 * in.at("mass_1")), 2);
               }});

  r.push_back({Family::spring, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"spring_constant", "N/m", 20, 400, 1},
                                                  {"mass", "kg", 0.2, 5, 2},
                                                  {"compression_distance", "m", 0.02, 0.3, 3}};
               },
               "angular_frequency", "rad/s",
               {"hooke", "spring", "harmonic", "oscillat"},
               [](const VariableMap& in, int) {
                 const double w = std::sqrt(in.at("spring_constant") / in.at("mass"));
                 return VariableMap{{"angular_frequency", w},
                                    {"restoring_force", in.at("spring_constant") * in.at("compression_distance")},
                                    {"period", 2 * std::numbers::pi / w}};
               },
               nullptr});

  r.push_back({Family::circuit, 2,
               [](int) {
                 return std::vector<VariableSpec>{{"voltage", "V", 3, 24, 1},
                                                  {"resistance_1", "Ω", 2, 50, 1},
                                                  {"resistance_2", "Ω", 2, 50, 1}};
               },
               "current", "A",
               {"ohm", "resistance", "series", "parallel", "kirchhoff"},
               [](const VariableMap& in, int variant) {
                 const double r1 = in.at("resistance_1"), r2 = in.at("resistance_2");
                 const double req = variant == 0 ? r1 + r2 : r1 * r2 / (r1 + r2);
                 return VariableMap{{"equivalent_resistance", req}, {"current", in.at("voltage") / req}};
               },
               nullptr});

  r.push_back({Family::fluid, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"fluid_density", "kg/m³", 800, 1200, 0},
                                                  {"depth", "m", 0.5, 20, 2},
                                                  kGravity};
               },
               "gauge_pressure", "Pa",
               {"hydrostatic", "pressure", "depth", "pascal"},
               [](const VariableMap& in, int) {
                 return VariableMap{{"gauge_pressure",
                                     in.at("fluid_density") * in.at("gravitational_acceleration") * in.at("depth")}};
               },
               nullptr});

  r.push_back({Family::thermal, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"mass", "kg", 0.2, 5, 2},
                                                  {"specific_heat", "J/(kg·K)", 400, 4200, 0},
                                                  {"temperature_change", "K", 5, 60, 1}};
               },
               "heat_energy", "J",
               {"heat", "calorimetry", "specific heat", "thermal"},
               [](const VariableMap& in, int) {
                 return VariableMap{
                     {"heat_energy", in.at("mass") * in.at("specific_heat") * in.at("temperature_change")}};
               },
               nullptr});

  r.push_back({Family::free_fall, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"fall_time", "s", 0.5, 5, 2}, kGravity};
               },
               "fall_distance", "m",
               {"free fall", "free-fall", "gravity", "uniformly accelerated", "kinematic"},
               [](const VariableMap& in, int) {
                 const double t = in.at("fall_time"), g = in.at("gravitational_acceleration");
                 return VariableMap{{"fall_distance", 0.5 * g * t * t}, {"final_velocity", g * t}};
               },
               nullptr});

  r.push_back({Family::friction, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"coefficient_of_friction", "", 0.1, 0.8, 2},
                                                  {"mass", "kg", 1, 20, 2},
                                                  kGravity};
               },
               "friction_force", "N",
               {"friction", "coulomb", "normal force", "kinetic"},
               [](const VariableMap& in, int) {
                 const double n = in.at("mass") * in.at("gravitational_acceleration");
                 return VariableMap{{"normal_force", n}, {"friction_force", in.at("coefficient_of_friction") * n}};
               },
               nullptr});

  r.push_back({Family::circular_motion, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"speed", "m/s", 2, 20, 2}, {"radius", "m", 1, 50, 2}};
               },
               "centripetal_acceleration", "m/s²",
               {"centripetal", "circular", "radius"},
               [](const VariableMap& in, int) {
                 const double v = in.at("speed");
                 return VariableMap{{"centripetal_acceleration", v * v / in.at("radius")},
                                    {"angular_velocity", v / in.at("radius")}};
               },
               nullptr});

  r.push_back({Family::wave, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"frequency", "Hz", 1, 50, 1}, {"wavelength", "m", 0.1, 5, 2}};
               },
               "wave_speed", "m/s",
               {"wave", "frequency", "wavelength", "propagat"},
               [](const VariableMap& in, int) {
                 return VariableMap{{"wave_speed", in.at("frequency") * in.at("wavelength")},
                                    {"period", 1.0 / in.at("frequency")}};
               },
               nullptr});

  r.push_back({Family::lever, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"mass_1", "kg", 1, 20, 2},
                                                  {"distance_1", "m", 0.2, 2, 2},
                                                  {"mass_2", "kg", 1, 20, 2}};
               },
               "distance_2", "m",
               {"torque", "moment", "lever", "fulcrum", "equilibrium"},
               [](const VariableMap& in, int) {
                 const double d2 = in.at("mass_1") * in.at("distance_1") / in.at("mass_2");
                 return VariableMap{{"distance_2", d2}, {"arm_ratio", d2 / in.at("distance_1")}};
               },
               nullptr});

  r.push_back({Family::buoyancy, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"fluid_density", "kg/m³", 800, 1200, 0},
                                                  {"submerged_volume", "m³", 0.001, 0.05, 4},
                                                  kGravity};
               },
               "buoyant_force", "N",
               {"archimedes", "buoyan", "displaced"},
               [](const VariableMap& in, int) {
                 const double displaced = in.at("fluid_density") * in.at("submerged_volume");
                 return VariableMap{{"buoyant_force", displaced * in.at("gravitational_acceleration")},
                                    {"displaced_mass", displaced}};
               },
               nullptr});

  r.push_back({Family::optics, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"focal_length", "m", 0.05, 0.5, 3},
                                                  {"object_distance", "m", 0.1, 2.5, 3}};
               },
               "image_distance", "m",
               {"lens", "focal", "thin lens", "refract"},
               [](const VariableMap& in, int) {
                 const double f = in.at("focal_length"), d = in.at("object_distance");
                 const double di = f * d / (d - f);
                 return VariableMap{{"image_distance", di}, {"magnification", di / d}};
               },
               [](VariableMap& in, int, Rng& rng) {
                 // A real image needs the object outside the focal point.
                 const double f = in.at("focal_length");
                 in["object_distance"] = round_to(rng.uniform(1.5 * f, 5 * f), 3);
               }});

  r.push_back({Family::pendulum, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"pendulum_length", "m", 0.2, 3, 2}, kGravity};
               },
               "period", "s",
               {"pendulum", "small-angle", "oscillat", "harmonic"},
               [](const VariableMap& in, int) {
                 const double t = 2 * std::numbers::pi *
                                  std::sqrt(in.at("pendulum_length") / in.at("gravitational_acceleration"));
                 return VariableMap{{"period", t}, {"frequency", 1.0 / t}};
               },
               nullptr});

  r.push_back({Family::em_induction, 1,
               [](int) {
                 return std::vector<VariableSpec>{{"coil_turns", "", 10, 500, 0},
                                                  {"magnetic_flux_change", "Wb", -0.5, -0.01, 3},
                                                  {"time_interval", "s", 0.05, 2, 2}};
               },
               "induced_emf", "V",
               {"faraday", "induction", "flux", "lenz"},
               [](const VariableMap& in, int) {
                 return VariableMap{{"induced_emf", -in.at("coil_turns") * in.at("magnetic_flux_change") /
                                                        in.at("time_interval")},
                                    {"flux_rate", in.at("magnetic_flux_change") / in.at("time_interval")}};
               },
               nullptr});

  return r;
}

const std::vector<FamilySpec>& registry() {
  static const std::vector<FamilySpec> r = build_registry();
  return r;
}

// Text and structure for one trace, filled by the family dresser.
struct Dress {
  std::vector<Object> objects;
  std::vector<Relation> relations;
  std::vector<Force> forces;
  std::vector<std::string> assumptions;
  std::string rule;
  std::string effect;
  std::string equation;
  std::vector<std::string> evidence;
  std::string predicted_change;
  std::string question;
  std::string scene;
};

Object obj(std::string name, std::map<std::string, Scalar> attrs = {}) {
  return Object{std::move(name), std::move(attrs)};
}

Force force(std::string name, std::string target, std::string direction, std::optional<double> magnitude = {},
            std::optional<std::string> unit = {}) {
  if (magnitude) magnitude = round_significant(*magnitude, 6);
  if (magnitude && !unit) unit = "N";
  return Force{std::move(name), std::move(target), std::move(direction), magnitude, std::move(unit)};
}

class Phrase {
 public:
  Phrase(const FamilySpec& spec, const VariableMap& in, int variant) {
    for (const auto& v : spec.inputs(variant)) units_[v.key] = v.unit;
    in_ = &in;
  }
  // "key = value unit", the form the question uses for every input.
  std::string operator()(const std::string& key) const {
    std::string s = key + " = " + fmt(in_->at(key));
    if (const auto& u = units_.at(key); !u.empty()) s += " " + u;
    return s;
  }

 private:
  std::map<std::string, std::string> units_;
  const VariableMap* in_;
};

Dress dress(Family f, const VariableMap& in, const VariableMap& out, int variant, const Phrase& p) {
  Dress d;
  auto v = [&](const std::string& k) { return in.at(k); };
  switch (f) {
    case Family::inclined_plane: {
      const bool rough = variant == 1;
      const double m = v("block_mass"), g = v("gravitational_acceleration");
      const double th = v("incline_angle") * kDeg;
      d.objects = {obj("block", {{"mass", m}, {"shape", std::string("box")}}),
                   obj("incline", {{"angle", v("incline_angle")}})};
      d.relations = {{"on", {"block", "incline"}}, {"contact", {"block", "incline"}}};
      d.forces = {force("gravity", "block", "downward", m * g),
                  force("normal force", "block", "perpendicular to the incline, away from the surface",
                        m * g * std::cos(th)),
                  force("net force", "block", "down the incline", m * out.at("acceleration"))};
      if (rough) {
        d.forces.insert(d.forces.begin() + 2,
                        force("kinetic friction", "block", "up the incline",
                              v("coefficient_of_friction") * m * g * std::cos(th)));
        d.assumptions = {"kinetic friction acts with the given coefficient_of_friction",
                         "the incline is rigid and fixed"};
        d.equation = "a = g*(sin(theta) - mu*cos(theta))";
      } else {
        d.assumptions = {"frictionless incline surface", "the incline is rigid and fixed"};
        d.equation = "a = g*sin(theta)";
      }
      d.rule = "Newton's second law with the gravity component along the incline";
      d.effect = "the block accelerates down the incline at constant rate";
      d.evidence = {"the block rests on the incline", "gravity has a component parallel to the surface"};
      d.predicted_change = "the block speed increases steadily as it slides down the incline";
      d.question = "A block with " + p("block_mass") + " is released on " +
                   (rough ? std::string("a rough incline with ") + p("coefficient_of_friction") + " and "
                          : std::string("a frictionless incline with ")) +
                   p("incline_angle") + ", where " + p("gravitational_acceleration") +
                   ". What is the acceleration of the block along the incline?";
      d.scene = "Side view: a box sits on a straight ramp tilted at " + fmt(v("incline_angle")) +
                " degrees above the horizontal ground.";
      break;
    }
    case Family::projectile: {
      d.objects = {obj("ball", {{"shape", std::string("sphere")}}), obj("ground")};
      d.relations = {{"above", {"ball", "ground"}}, {"separated", {"ball", "ground"}}};
      d.forces = {force("gravity", "ball", "downward"), force("net force", "ball", "downward")};
      d.assumptions = {"no air resistance", "launch and landing at the same height"};
      d.rule = "Projectile kinematics under constant gravitational acceleration";
      d.effect = "the ball follows a parabolic path and its vertical velocity decreases under gravity";
      d.equation = "R = v^2*sin(2*theta)/g";
      d.evidence = {"the only force after launch is gravity", "horizontal velocity stays constant"};
      d.predicted_change = "height decreases back to launch level after covering the range";
      d.question = "A ball is launched from level ground with " + p("launch_speed") + " at " + p("launch_angle") +
                   ", where " + p("gravitational_acceleration") +
                   ". Neglect air resistance. How far away does it land (the range)?";
      d.scene = "Side view: a ball leaves flat ground on an arc launched at " + fmt(v("launch_angle")) +
                " degrees.";
      break;
    }
    case Family::collision: {
      const bool elastic = variant == 1;
      d.objects = {obj("cart_1", {{"mass", v("mass_1")}}), obj("cart_2", {{"mass", v("mass_2")}}), obj("track")};
      d.relations = {{"on", {"cart_1", "track"}},
                     {"on", {"cart_2", "track"}},
                     {"left_of", {"cart_1", "cart_2"}}};
      d.forces = {force("gravity", "cart_1", "downward", v("mass_1") * kG),
                  force("normal force", "cart_1", "upward, away from the surface", v("mass_1") * kG),
                  force("net force", "cart_2", "rightward")};
      d.assumptions = {"frictionless track",
                       elastic ? "perfectly elastic collision: kinetic energy is conserved"
                               : "perfectly inelastic collision: the carts stick together",
                       "cart_2 is initially at rest"};
      d.rule = "Conservation of linear momentum";
      d.effect = "cart_2 accelerates rightward as momentum is transferred at impact";
      d.equation = elastic ? "v2 = 2*m1*v1/(m1 + m2)" : "v = m1*v1/(m1 + m2)";
      d.evidence = {"no external horizontal force acts on the two-cart system", "cart_2 starts at rest"};
      d.predicted_change = "the velocity of cart_2 increases from zero while total momentum is conserved";
      d.question = "On a frictionless track, cart_1 with " + p("mass_1") + " moving at " + p("velocity_1") +
                   " hits cart_2 with " + p("mass_2") + " at rest. The collision is perfectly " +
                   (elastic ? "elastic. What is the final velocity of cart_2?"
                            : "inelastic. What is the final velocity of the joined carts?");
      d.scene = "Side view: two carts on a straight horizontal track; the left cart rolls toward the right one.";
      break;
    }
    case Family::pulley: {
      d.objects = {obj("heavy_block", {{"mass", v("mass_1")}}), obj("light_block", {{"mass", v("mass_2")}}),
                   obj("pulley", {{"mass", 0.0}})};
      d.relations = {{"below", {"heavy_block", "pulley"}},
                     {"below", {"light_block", "pulley"}},
                     {"attached", {"heavy_block", "pulley"}},
                     {"attached", {"light_block", "pulley"}}};
      d.forces = {force("gravity", "heavy_block", "downward", v("mass_1") * v("gravitational_acceleration")),
                  force("tension", "heavy_block", "upward", out.at("tension")),
                  force("net force", "heavy_block", "down")};
      d.assumptions = {"massless, frictionless pulley", "inextensible massless rope"};
      d.rule = "Newton's second law for the Atwood machine";
      d.effect = "heavy_block accelerates down as the system moves";
      d.equation = "a = (m1 - m2)*g/(m1 + m2)";
      d.evidence = {"heavy_block is heavier than light_block", "the rope tension is the same on both sides"};
      d.predicted_change = "the speed of heavy_block increases as it descends";
      d.question = "An Atwood machine hangs heavy_block with " + p("mass_1") + " and light_block with " +
                   p("mass_2") + " over an ideal pulley, where " + p("gravitational_acceleration") +
                   ". What is the magnitude of the acceleration of the blocks?";
      d.scene = "Front view: two blocks hang from a rope over a pulley; the left block is larger.";
      break;
    }
    case Family::spring: {
      d.objects = {obj("mass_block", {{"mass", v("mass")}}), obj("spring", {{"stiffness", v("spring_constant")}}),
                   obj("wall"), obj("floor")};
      d.relations = {{"attached", {"mass_block", "spring"}},
                     {"attached", {"spring", "wall"}},
                     {"on", {"mass_block", "floor"}}};
      d.forces = {force("spring force", "mass_block", "toward equilibrium", out.at("restoring_force")),
                  force("gravity", "mass_block", "downward", v("mass") * kG),
                  force("normal force", "mass_block", "upward, away from the surface", v("mass") * kG),
                  force("net force", "mass_block", "toward equilibrium", out.at("restoring_force"))};
      d.assumptions = {"frictionless floor", "ideal massless spring"};
      d.rule = "Hooke's law with simple harmonic motion";
      d.effect = "the block accelerates toward equilibrium and oscillates";
      d.equation = "omega = sqrt(k/m); F = -k*x";
      d.evidence = {"the spring is compressed from its natural length", "the restoring force is linear in x"};
      d.predicted_change = "the block speed increases as it returns toward equilibrium, then the motion repeats";
      d.question = "A block with " + p("mass") + " on a frictionless floor is attached to a spring with " +
                   p("spring_constant") + " and released from " + p("compression_distance") +
                   ". What is the angular frequency of the oscillation?";
      d.scene = "Side view: a block on a floor attached to a wall by a compressed coil spring.";
      break;
    }
    case Family::circuit: {
      const bool parallel = variant == 1;
      d.objects = {obj("battery", {{"emf", v("voltage")}}), obj("resistor_1", {{"resistance", v("resistance_1")}}),
                   obj("resistor_2", {{"resistance", v("resistance_2")}})};
      d.relations = {{"attached", {"resistor_1", "battery"}},
                     {"attached", {"resistor_2", parallel ? "battery" : "resistor_1"}},
                     {"left_of", {"resistor_1", "resistor_2"}}};
      d.assumptions = {"ideal wires and battery", parallel ? "resistors connected in parallel"
                                                           : "resistors connected in series"};
      d.rule = parallel ? "Ohm's law with parallel resistance combination"
                        : "Ohm's law with series resistance combination";
      d.effect = "the current increases from zero to a steady value set by the equivalent resistance";
      d.equation = parallel ? "I = V*(R1 + R2)/(R1*R2)" : "I = V/(R1 + R2)";
      d.evidence = {"the battery drives the loop", parallel ? "both resistors see the full voltage"
                                                            : "the same current flows through both resistors"};
      d.predicted_change = "a steady current increases to V/R_eq and flows through the battery";
      d.question = std::string("A battery with ") + p("voltage") + " drives resistor_1 with " + p("resistance_1") +
                   " and resistor_2 with " + p("resistance_2") + " connected in " +
                   (parallel ? "parallel" : "series") + ". What current does the battery deliver?";
      d.scene = std::string("Schematic: a battery and two resistors drawn ") +
                (parallel ? "on parallel branches." : "one after another in a single loop.");
      break;
    }
    case Family::fluid: {
      d.objects = {obj("water", {{"density", v("fluid_density")}}), obj("tank"), obj("probe")};
      d.relations = {{"inside", {"water", "tank"}}, {"inside", {"probe", "water"}}};
      d.forces = {force("gravity", "water", "downward"),
                  force("pressure force", "probe", "inward", out.at("gauge_pressure") * 1e-4, "N")};
      d.assumptions = {"incompressible fluid at rest", "gauge pressure excludes the atmosphere"};
      d.rule = "Hydrostatic pressure relation";
      d.effect = "the pressure increases linearly with depth below the free surface";
      d.equation = "P = rho*g*h";
      d.evidence = {"the fluid is static", "the weight of the column above the probe sets the pressure"};
      d.predicted_change = "gauge pressure increases to rho*g*h at the probe location";
      d.question = "A probe sits at " + p("depth") + " in a liquid with " + p("fluid_density") + ", where " +
                   p("gravitational_acceleration") + ". What gauge pressure does the probe read?";
      d.scene = "Cutaway: a tall tank of liquid with a small probe held below the surface.";
      break;
    }
    case Family::thermal: {
      d.objects = {obj("sample", {{"mass", v("mass")}, {"material", std::string("metal")}}), obj("heater")};
      d.relations = {{"on", {"sample", "heater"}}, {"contact", {"sample", "heater"}}};
      d.forces = {force("gravity", "sample", "downward", v("mass") * kG),
                  force("normal force", "sample", "upward, away from the surface", v("mass") * kG)};
      d.assumptions = {"no heat lost to the surroundings", "no phase change"};
      d.rule = "Calorimetry heat equation";
      d.effect = "the temperature increases as heat flows into the sample";
      d.equation = "Q = m*c*dT";
      d.evidence = {"the heater supplies energy to the sample", "specific heat is constant over the range"};
      d.predicted_change = "the sample temperature increases by temperature_change after absorbing Q";
      d.question = "A sample with " + p("mass") + " and " + p("specific_heat") + " is warmed by " +
                   p("temperature_change") + ". How much heat does it absorb?";
      d.scene = "Side view: a metal block resting on a hot plate.";
      break;
    }
    case Family::free_fall: {
      d.objects = {obj("ball", {{"shape", std::string("sphere")}}), obj("ground")};
      d.relations = {{"above", {"ball", "ground"}}, {"separated", {"ball", "ground"}}};
      d.forces = {force("gravity", "ball", "downward"), force("net force", "ball", "downward")};
      d.assumptions = {"no air resistance", "released from rest"};
      d.rule = "Uniformly accelerated free fall kinematics";
      d.effect = "the ball falls downward under constant gravitational acceleration";
      d.equation = "d = 0.5*g*t^2";
      d.evidence = {"gravity is the only force", "the ball starts at rest"};
      d.predicted_change = "height decreases while the ball gains speed";
      d.question = "A ball is dropped from rest and falls for " + p("fall_time") + ", where " +
                   p("gravitational_acceleration") + ". Neglect air resistance. How far does it fall?";
      d.scene = "Side view: a ball released above flat ground.";
      break;
    }
    case Family::friction: {
      const double m = v("mass"), g = v("gravitational_acceleration");
      const double fk = out.at("friction_force");
      d.objects = {obj("crate", {{"mass", m}}), obj("floor")};
      d.relations = {{"on", {"crate", "floor"}}, {"contact", {"crate", "floor"}}};
      d.forces = {force("gravity", "crate", "downward", m * g),
                  force("normal force", "crate", "upward, away from the surface", m * g),
                  force("applied push", "crate", "rightward", 1.5 * fk),
                  force("kinetic friction", "crate", "leftward", fk)};
      d.assumptions = {"kinetic friction with the given coefficient_of_friction", "level floor"};
      d.rule = "Coulomb kinetic friction model";
      d.effect = "the crate accelerates rightward because the push exceeds kinetic friction";
      d.equation = "F_f = mu*N; N = m*g";
      d.evidence = {"the crate slides on the floor", "the normal force balances gravity"};
      d.predicted_change = "the crate speed increases while friction stays at mu*N";
      d.question = "A crate with " + p("mass") + " is pushed across a level floor with " +
                   p("coefficient_of_friction") + ", where " + p("gravitational_acceleration") +
                   ". What is the kinetic friction force on the crate?";
      d.scene = "Side view: a person pushes a crate to the right across a flat floor.";
      break;
    }
    case Family::circular_motion: {
      d.objects = {obj("car", {{"shape", std::string("vehicle")}}), obj("road")};
      d.relations = {{"on", {"car", "road"}}, {"contact", {"car", "road"}}};
      d.forces = {force("gravity", "car", "downward"), force("normal force", "car", "upward, away from the surface"),
                  force("net force", "car", "toward center")};
      d.assumptions = {"uniform speed", "flat circular track"};
      d.rule = "Uniform circular motion centripetal acceleration";
      d.effect = "the car accelerates toward center while its speed stays constant";
      d.equation = "a_c = v^2/r";
      d.evidence = {"the path is a circle of fixed radius", "the speed does not change"};
      d.predicted_change = "the heading angle increases steadily as the car turns";
      d.question = "A car drives around a flat circular track of " + p("radius") + " at constant " + p("speed") +
                   ". What is its centripetal acceleration?";
      d.scene = "Top view: a car on a circular track, an arrow points from the car to the center.";
      break;
    }
    case Family::wave: {
      d.objects = {obj("source", {{"kind", std::string("oscillator")}}), obj("string", {{"tension", std::string("taut")}})};
      d.relations = {{"attached", {"source", "string"}}, {"left_of", {"source", "string"}}};
      d.assumptions = {"uniform medium", "steady periodic driving"};
      d.rule = "Wave speed relation v = f*lambda";
      d.effect = "the disturbance propagates forward along the string";
      d.equation = "v = f*lambda";
      d.evidence = {"the source oscillates at a fixed frequency", "crests are spaced one wavelength apart"};
      d.predicted_change = "the crest position increases by one wavelength each period";
      d.question = "A source drives waves on a string with " + p("frequency") + " and " + p("wavelength") +
                   ". What is the wave speed?";
      d.scene = "Side view: a sinusoidal wave on a long string driven from the left end.";
      break;
    }
    case Family::lever: {
      d.objects = {obj("plank", {{"uniform", std::string("yes")}}), obj("fulcrum"), obj("load_1", {{"mass", v("mass_1")}}),
                   obj("load_2", {{"mass", v("mass_2")}})};
      d.relations = {{"on", {"plank", "fulcrum"}},
                     {"on", {"load_1", "plank"}},
                     {"on", {"load_2", "plank"}},
                     {"left_of", {"load_1", "load_2"}}};
      d.forces = {force("gravity", "load_1", "downward", v("mass_1") * kG),
                  force("gravity", "load_2", "downward", v("mass_2") * kG),
                  force("normal force", "plank", "upward, away from the surface")};
      d.assumptions = {"massless rigid plank", "static equilibrium"};
      d.rule = "Torque balance about the fulcrum";
      d.effect = "the net torque decreases to zero so the plank stays balanced";
      d.equation = "m1*d1 = m2*d2";
      d.evidence = {"the plank does not rotate", "both loads press down on the plank"};
      d.predicted_change = "the angular acceleration decreases to zero and the plank remains level";
      d.question = "A plank balances on a fulcrum with load_1 of " + p("mass_1") + " at " + p("distance_1") +
                   " on one side. Where must load_2 of " + p("mass_2") +
                   " sit on the other side (distance from the fulcrum)?";
      d.scene = "Side view: a seesaw with two loads on either side of a triangular fulcrum.";
      break;
    }
    case Family::buoyancy: {
      d.objects = {obj("block", {{"material", std::string("wood")}}), obj("water", {{"density", v("fluid_density")}})};
      d.relations = {{"inside", {"block", "water"}}};
      d.forces = {force("buoyant force", "block", "upward", out.at("buoyant_force")),
                  force("gravity", "block", "downward")};
      d.assumptions = {"fluid at rest", "uniform fluid density"};
      d.rule = "Archimedes' principle for the displaced fluid";
      d.effect = "the buoyant force increases with submerged volume and pushes the block upward";
      d.equation = "F_b = rho*V*g";
      d.evidence = {"the block displaces fluid", "the displaced weight equals the buoyant force"};
      d.predicted_change = "the upward support on the block increases to rho*V*g";
      d.question = "A block has " + p("submerged_volume") + " below the surface of a liquid with " +
                   p("fluid_density") + ", where " + p("gravitational_acceleration") +
                   ". What buoyant force acts on it?";
      d.scene = "Cutaway: a wooden block partly submerged in a tank of liquid.";
      break;
    }
    case Family::optics: {
      d.objects = {obj("lens", {{"kind", std::string("converging")}}), obj("candle"), obj("screen")};
      d.relations = {{"left_of", {"candle", "lens"}},
                     {"right_of", {"screen", "lens"}},
                     {"aligned", {"candle", "lens"}}};
      d.assumptions = {"thin lens", "paraxial rays"};
      d.rule = "Thin lens equation";
      d.effect = "refracted rays converge forward to a real image behind the lens";
      d.equation = "1/f = 1/d_o + 1/d_i";
      d.evidence = {"the object is outside the focal length", "the lens is converging"};
      d.predicted_change = "a real inverted image forms and the image distance increases as the object nears focus";
      d.question = "A candle stands at " + p("object_distance") + " from a thin converging lens with " +
                   p("focal_length") + ". At what distance behind the lens does the image form?";
      d.scene = "Side view: a candle, a lens, and a screen along one optical axis.";
      break;
    }
    case Family::pendulum: {
      d.objects = {obj("bob", {{"shape", std::string("sphere")}}), obj("string"), obj("pivot")};
      d.relations = {{"attached", {"bob", "string"}},
                     {"attached", {"string", "pivot"}},
                     {"below", {"bob", "pivot"}}};
      d.forces = {force("gravity", "bob", "downward"), force("tension", "bob", "toward the pivot"),
                  force("net restoring force", "bob", "toward equilibrium")};
      d.assumptions = {"small-angle approximation", "massless inextensible string"};
      d.rule = "Simple pendulum small-angle oscillation";
      d.effect = "the bob accelerates toward equilibrium and swings periodically";
      d.equation = "T = 2*pi*sqrt(L/g)";
      d.evidence = {"the bob hangs from a fixed pivot", "the amplitude is small"};
      d.predicted_change = "the bob speed increases through the lowest point and the swing repeats each period";
      d.question = "A simple pendulum has " + p("pendulum_length") + ", where " + p("gravitational_acceleration") +
                   ". What is its period for small swings?";
      d.scene = "Front view: a small ball hanging on a string from a ceiling pivot, displaced slightly.";
      break;
    }
    case Family::em_induction: {
      d.objects = {obj("coil", {{"turns", v("coil_turns")}}), obj("magnet", {{"kind", std::string("bar")}})};
      d.relations = {{"left_of", {"magnet", "coil"}}, {"aligned", {"magnet", "coil"}}};
      d.assumptions = {"uniform flux through each turn", "constant rate of flux change"};
      d.rule = "Faraday's law of induction with Lenz's law";
      d.effect = "the changing flux induces an emf and the induced current increases to oppose the change";
      d.equation = "emf = -N*dPhi/dt";
      d.evidence = {"the magnet moves away from the coil", "the flux through the coil is falling"};
      d.predicted_change = "an induced emf appears and the coil current increases from zero";
      d.question = "A coil with " + p("coil_turns") + " sees " + p("magnetic_flux_change") + " over " +
                   p("time_interval") + ". What emf is induced?";
      d.scene = "Side view: a bar magnet being pulled away from a wire coil.";
      break;
    }
  }
  return d;
}

}  // namespace

const FamilySpec& family_spec(Family f) {
  for (const auto& s : registry())
    if (s.family == f) return s;
  throw std::out_of_range("no spec for family");
}

const std::map<std::string, std::vector<std::string>>& default_rule_keywords() {
  static const auto table = [] {
    std::map<std::string, std::vector<std::string>> m;
    for (const auto& s : registry()) m[std::string(to_string(s.family))] = s.rule_keywords;
    return m;
  }();
  return table;
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(x))));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(x * scale) / scale;
}

double recompute_answer(Family f, const VariableMap& inputs, int variant) {
  const auto& spec = family_spec(f);
  return spec.derive(inputs, variant).at(spec.answer_key);
}

Trace build_trace(Family f, const VariableMap& inputs, int variant, std::string id) {
  const auto& spec = family_spec(f);
  VariableMap out = spec.derive(inputs, variant);
  for (auto& [k, v] : out) v = round_significant(v, 6);

  const Phrase phrase(spec, inputs, variant);
  Dress d = dress(f, inputs, out, variant, phrase);

  Trace t;
  t.id = std::move(id);
  t.scenario_family = std::string(to_string(f));
  t.state_0 = State0{d.objects, d.relations, d.forces, inputs, d.assumptions};
  t.transition = Transition{d.rule, d.effect, d.equation, d.evidence};
  t.state_1 = State1{d.predicted_change, out};

  const double answer = out.at(spec.answer_key);
  t.answer = Answer{answer, spec.answer_unit, std::string("From ") + d.equation + ", " + spec.answer_key + " = " +
                                                  fmt(answer) + " " + spec.answer_unit + "."};
  t.derivation = "Identify the governing relation (" + d.rule + "), substitute the given values into " +
                 d.equation + ", and evaluate " + spec.answer_key + ".";

  Metadata m;
  m.gold_answer = t.answer;
  m.gold_variables = inputs;
  m.gold_relations = d.relations;
  for (const auto& [k, _] : inputs) m.parameter_keys.push_back(k);
  m.parameter_keys.push_back(spec.answer_key);
  m.question = d.question;
  m.answer_type = AnswerType::unit_bearing;
  m.answer_key = spec.answer_key;
  m.canonical_unit = spec.answer_unit;
  m.scene_description = d.scene;
  m.diagram = Json{{"family", t.scenario_family}, {"variant", variant}, {"view", "side"},
                   {"parameters", Json(inputs)}};
  t.metadata = std::move(m);
  t.document = to_json(t);
  return t;
}

const std::string& canonical_rule(Family f) {
  static const auto rules = [] {
    std::map<Family, std::string> m;
    for (Family fam : all_families()) {
      Rng rng(0);
      m[fam] = generate_trace(fam, rng, "rule").transition->rule;
    }
    return m;
  }();
  return rules.at(f);
}

Trace generate_trace(Family f, Rng& rng, std::string id) {
  const auto& spec = family_spec(f);
  const int variant = spec.variants > 1 ? static_cast<int>(rng.below(spec.variants)) : 0;
  VariableMap in;
  for (const auto& v : spec.inputs(variant)) in[v.key] = round_to(rng.uniform(v.lo, v.hi), v.decimals);
  if (spec.constrain) spec.constrain(in, variant, rng);
  if (id.empty()) id = std::string(to_string(f)) + "-sample";
  return build_trace(f, in, variant, std::move(id));
}

}  // namespace wmw
