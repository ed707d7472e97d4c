#include "disconj/report.hpp"

#include <cmath>

#include "disconj/errors.hpp"
#include "disconj/text.hpp"

namespace disconj {

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw ParseError("expected a number, got " + j.dump(), 0);
}

Json to_json(const Interval& iv) { return iv.to_string(); }

Json to_json(const ExtendedPoint& p) {
  if (p.window_limited) return p.to_string();
  return p.value;
}

Json to_json(const Witness& w) {
  return Json{{"start", w.a}, {"z1", w.z1}, {"z2", w.z2}, {"residual", w.residual}};
}

Json to_json(const Verdict& v) {
  Json j{{"kind", to_string(v.kind)}, {"criterion", v.criterion}};
  if (v.examined) j["interval"] = to_json(*v.examined);
  j["window_limited"] = v.window_limited;
  if (v.witness) j["witness"] = to_json(*v.witness);
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace disconj
