#ifndef FIXPROX_IO_HPP
#define FIXPROX_IO_HPP

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixprox/bench.hpp"
#include "fixprox/errors.hpp"
#include "fixprox/functions.hpp"
#include "fixprox/operators.hpp"
#include "fixprox/schedules.hpp"
#include "fixprox/solvers.hpp"
#include "fixprox/vecspace.hpp"

namespace fixprox {

using json = nlohmann::json;

inline constexpr const char* kInstanceFormat = "fixprox-instance";
inline constexpr int kInstanceVersion = 1;

namespace io_detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw UsageError(std::string("malformed JSON: missing field '") + key + "'");
  }
  return j.at(key);
}

inline std::string type_of(const json& j) { return field(j, "type").get<std::string>(); }

}  // namespace io_detail

inline json to_json(const Vector& v) { return json(v.data()); }

inline Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw UsageError("malformed JSON: expected an array of numbers");
  return Vector(j.get<std::vector<double>>());
}

inline json to_json(const ProximableFunction& f) {
  const auto& g = std::get<WeightedShiftedL1>(f);
  return {{"type", "weighted_shifted_l1"},
          {"weights", to_json(g.weights())},
          {"shifts", to_json(g.shifts())}};
}

inline ProximableFunction function_from_json(const json& j) {
  const auto type = io_detail::type_of(j);
  if (type == "weighted_shifted_l1") {
    return WeightedShiftedL1(vector_from_json(io_detail::field(j, "weights")),
                             vector_from_json(io_detail::field(j, "shifts")));
  }
  throw UsageError("unknown function type '" + type + "'");
}

inline json to_json(const ClosedConvexSet& set) {
  if (const auto* b = std::get_if<Ball>(&set)) {
    return {{"type", "ball"}, {"center", to_json(b->center())}, {"radius", b->radius()}};
  }
  const auto& h = std::get<HalfSpace>(set);
  return {{"type", "halfspace"}, {"normal", to_json(h.normal())}, {"offset", h.offset()}};
}

inline ClosedConvexSet set_from_json(const json& j) {
  const auto type = io_detail::type_of(j);
  if (type == "ball") {
    return Ball(vector_from_json(io_detail::field(j, "center")),
                io_detail::field(j, "radius").get<double>());
  }
  if (type == "halfspace") {
    return HalfSpace(vector_from_json(io_detail::field(j, "normal")),
                     io_detail::field(j, "offset").get<double>());
  }
  throw UsageError("unknown set type '" + type + "'");
}

inline json to_json(const NonexpansiveOperator& op) {
  struct Visitor {
    json operator()(const IdentityOp&) const { return {{"type", "identity"}}; }
    json operator()(const ProjectionOp& p) const {
      return {{"type", "projection"}, {"set", to_json(p.set)}};
    }
    json operator()(const WeightedAverageOp& w) const {
      json terms = json::array();
      for (const auto& t : w.terms) terms.push_back(to_json(t));
      return {{"type", "weighted_average"}, {"weights", w.weights}, {"terms", std::move(terms)}};
    }
    json operator()(const ComposeOp& c) const {
      return {{"type", "compose"}, {"outer", to_json(*c.outer)}, {"inner", to_json(*c.inner)}};
    }
    json operator()(const HalfAveragedOp& h) const {
      return {{"type", "half_averaged"}, {"inner", to_json(*h.inner)}};
    }
  };
  return std::visit(Visitor{}, op.node());
}

inline NonexpansiveOperator operator_from_json(const json& j) {
  const auto type = io_detail::type_of(j);
  if (type == "identity") return NonexpansiveOperator::identity();
  if (type == "projection") {
    return NonexpansiveOperator::projection(set_from_json(io_detail::field(j, "set")));
  }
  if (type == "weighted_average") {
    std::vector<NonexpansiveOperator> terms;
    for (const auto& t : io_detail::field(j, "terms")) terms.push_back(operator_from_json(t));
    return NonexpansiveOperator::weighted_average(
        std::move(terms), io_detail::field(j, "weights").get<std::vector<double>>());
  }
  if (type == "compose") {
    return NonexpansiveOperator::compose(operator_from_json(io_detail::field(j, "outer")),
                                         operator_from_json(io_detail::field(j, "inner")));
  }
  if (type == "half_averaged") {
    return NonexpansiveOperator::half_averaged(operator_from_json(io_detail::field(j, "inner")));
  }
  throw UsageError("unknown operator type '" + type + "'");
}

inline json to_json(const NetworkProblem& p) {
  json users = json::array();
  for (const auto& u : p.users()) {
    users.push_back({{"f", to_json(u.f)},
                     {"T", to_json(u.T)},
                     {"anchor", to_json(u.anchor)},
                     {"bounding", u.bounding ? to_json(*u.bounding) : json(nullptr)}});
  }
  return {{"dim", p.dim()}, {"users", std::move(users)}};
}

inline NetworkProblem problem_from_json(const json& j) {
  std::vector<UserProblem> users;
  for (const auto& u : io_detail::field(j, "users")) {
    std::optional<ClosedConvexSet> bounding;
    if (u.contains("bounding") && !u.at("bounding").is_null()) {
      bounding = set_from_json(u.at("bounding"));
    }
    Vector anchor;
    if (u.contains("anchor")) anchor = vector_from_json(u.at("anchor"));
    users.push_back(UserProblem{function_from_json(io_detail::field(u, "f")),
                                operator_from_json(io_detail::field(u, "T")), std::move(anchor),
                                std::move(bounding)});
  }
  NetworkProblem p(std::move(users));
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != p.dim()) {
    throw UsageError("instance: declared dim does not match the data");
  }
  return p;
}

inline json to_json(const StepSequence& s) {
  if (const auto* p = std::get_if<PowerLaw>(&s)) {
    return {{"type", "power_law"}, {"scale", p->scale}, {"exponent", p->exponent}};
  }
  return {{"type", "constant"}, {"value", std::get<Constant>(s).value}};
}

inline StepSequence step_sequence_from_json(const json& j) {
  const auto type = io_detail::type_of(j);
  if (type == "power_law") {
    return PowerLaw{io_detail::field(j, "scale").get<double>(),
                    io_detail::field(j, "exponent").get<double>()};
  }
  if (type == "constant") return Constant{io_detail::field(j, "value").get<double>()};
  throw UsageError("unknown step sequence type '" + type + "'");
}

/// Self-describing instance document; `x0` and `runs` are optional.
struct InstanceFile {
  NetworkProblem problem;
  std::optional<Vector> x0;
  std::optional<Regime> regime;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sample_index;
  json runs = json::array();
};

inline json to_json(const InstanceFile& f) {
  json j = to_json(f.problem);
  j["format"] = kInstanceFormat;
  j["version"] = kInstanceVersion;
  if (f.regime) j["regime"] = std::string(to_string(*f.regime));
  if (f.seed) j["seed"] = *f.seed;
  if (f.sample_index) j["sample_index"] = *f.sample_index;
  if (f.x0) j["x0"] = to_json(*f.x0);
  if (!f.runs.empty()) j["runs"] = f.runs;
  return j;
}

inline InstanceFile instance_from_json(const json& j) {
  if (!j.contains("format") || j.at("format") != kInstanceFormat) {
    throw UsageError("instance: not a fixprox instance document");
  }
  InstanceFile f{problem_from_json(j), std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                 json::array()};
  if (j.contains("x0")) f.x0 = vector_from_json(j.at("x0"));
  if (j.contains("regime")) f.regime = parse_regime(j.at("regime").get<std::string>());
  if (j.contains("seed")) f.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sample_index")) f.sample_index = j.at("sample_index").get<std::size_t>();
  if (j.contains("runs")) f.runs = j.at("runs");
  return f;
}

inline json to_json(const RunTrace& t, bool include_time = true) {
  json j;
  j["objective"] = t.objective;
  j["residual"] = t.residual;
  if (include_time) j["time_s"] = t.time_s;
  if (!t.iterates.empty()) {
    json its = json::array();
    for (const auto& x : t.iterates) its.push_back(to_json(x));
    j["iterates"] = std::move(its);
  }
  if (!t.monitors.empty()) {
    json mons = json::array();
    for (const auto& m : t.monitors) {
      json r = {{"iteration", m.iteration}, {"prox_gap", m.prox_gap}};
      if (!std::isnan(m.descent_gap)) r["descent_gap"] = m.descent_gap;
      mons.push_back(std::move(r));
    }
    j["monitors"] = std::move(mons);
  }
  j["final_iterate"] = to_json(t.final_iterate);
  return j;
}

inline json to_json(const AlgorithmVariant& a) {
  return {{"algorithm", std::string(to_string(a.algorithm))},
          {"variant", a.variant},
          {"gamma", to_json(StepSequence{a.gamma})},
          {"alpha", to_json(a.alpha)}};
}

inline json to_json(const BenchConfig& c) {
  json algos = json::array();
  for (const auto& a : c.algorithms) algos.push_back(to_json(a));
  return {{"N", c.dim},
          {"I", c.users},
          {"K", c.sets},
          {"samples", c.samples},
          {"max_iters", c.max_iters},
          {"regime", std::string(to_string(c.regime))},
          {"seed", c.seed},
          {"stop_f_tol", c.stop_f_tol},
          {"stop_d_tol", c.stop_d_tol},
          {"algorithms", std::move(algos)}};
}

inline json stop_to_json(const StopHit& h, bool include_time) {
  json j = {{"n", h.n ? json(*h.n) : json(nullptr)}, {"value", h.value}};
  if (include_time) j["time_s"] = h.time_s;
  return j;
}

/// Full report: config echo plus F_n, D_n and time series per algorithm.
inline json report_json(const BenchReport& r, bool include_time = true) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = to_json(row.spec);
    j["F"] = row.F;
    j["D"] = row.D;
    if (include_time) j["cumulative_time_s"] = row.cumulative_time_s;
    j["stop_F"] = stop_to_json(row.stop_F, include_time);
    j["stop_D"] = stop_to_json(row.stop_D, include_time);
    rows.push_back(std::move(j));
  }
  return {{"config", to_json(r.config)}, {"paired", r.paired}, {"rows", std::move(rows)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

}  // namespace fixprox

#endif  // FIXPROX_IO_HPP
