#pragma once

#include <set>
#include <string>

#include "wmw/families.hpp"
#include "wmw/generator.hpp"
#include "wmw/metrics.hpp"
#include "wmw/trace.hpp"

namespace wmw::test {

/// theta = 30 deg, 2 kg, g = 9.8, frictionless.
inline Trace incline_trace(const std::string& id = "t-incline") {
  return build_trace(Family::inclined_plane,
                     {{"incline_angle", 30.0}, {"block_mass", 2.0}, {"gravitational_acceleration", 9.8}}, 0, id);
}

/// Reference bank shared by tests (seed 2026, n 200, splits assigned).
inline const std::vector<Trace>& seed_bank() {
  static const std::vector<Trace> bank = [] {
    auto b = generate_bank(2026, 200).traces;
    assign_splits(b, 2026);
    return b;
  }();
  return bank;
}

inline void refresh(Trace& t) { t.document = to_json(t); }

/// Independent field-level diff: the "section.field" paths where two traces
/// differ, computed on their JSON forms. Top-level scalars and metadata are
/// compared whole.
inline std::set<std::string> field_diff(const Trace& a, const Trace& b) {
  const Json ja = to_json(a), jb = to_json(b);
  std::set<std::string> out;
  std::set<std::string> keys;
  for (auto it = ja.begin(); it != ja.end(); ++it) keys.insert(it.key());
  for (auto it = jb.begin(); it != jb.end(); ++it) keys.insert(it.key());
  for (const auto& k : keys) {
    const Json va = ja.value(k, Json()), vb = jb.value(k, Json());
    if (va == vb) continue;
    if (va.is_object() && vb.is_object() && k != "metadata") {
      std::set<std::string> sub;
      for (auto it = va.begin(); it != va.end(); ++it) sub.insert(it.key());
      for (auto it = vb.begin(); it != vb.end(); ++it) sub.insert(it.key());
      for (const auto& s : sub)
        if (va.value(s, Json()) != vb.value(s, Json())) out.insert(k + "." + s);
    } else {
      out.insert(k);
    }
  }
  return out;
}

inline VerifierReport report_with(Verdict state, Verdict trans, Verdict faith, int labels = 0) {
  VerifierReport r;
  r.z_state = state;
  r.z_trans = trans;
  r.z_faith = faith;
  for (int i = 0; i < labels; ++i) r.labels.insert(all_labels()[static_cast<std::size_t>(i)]);
  return r;
}

inline EvalRecord eval(bool correct, Verdict trace, const std::string& source = "synthetic") {
  EvalRecord e;
  e.answer_correct = correct;
  e.report = report_with(trace, trace, trace);
  e.source = source;
  return e;
}

}  // namespace wmw::test
