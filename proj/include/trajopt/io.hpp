#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/lift.hpp"
#include "trajopt/trajectory.hpp"

namespace trajopt::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "trajopt 1.0.0";
inline constexpr const char* kTieBreak = "min gradient; ties by lexicographic (k,l) in preferred order";

/// Failure to open, read or write a file (exit code 1 in the CLI).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline Json parse(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

namespace detail {

inline Vector number_array(const Json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + field + "'");
  if (!it->is_array()) throw Error(ErrorCode::ParseError, std::string("field '") + field + "' must be an array");
  Vector out;
  for (const auto& x : *it) {
    if (!x.is_number()) {
      throw Error(ErrorCode::ParseError, std::string("field '") + field + "' must contain only numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

inline double number_or(const Json& doc, const char* field, double fallback) {
  const auto it = doc.find(field);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::ParseError, std::string("field '") + field + "' must be a number");
  return it->get<double>();
}

template <class T>
T get_field(const Json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + field + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("field '") + field + "' has the wrong type");
  }
}

}  // namespace detail

/// Instance document: eigenvalues, target, cost, optional conserved and
/// initial_populations, optional eps_pop / eps_grad. Not validated here.
inline ProblemInstance instance_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "instance must be a JSON object");
  ProblemInstance inst;
  inst.lambda = detail::number_array(doc, "eigenvalues");
  inst.target = detail::number_array(doc, "target");
  inst.cost = detail::number_array(doc, "cost");
  if (doc.contains("conserved")) inst.conserved = detail::number_array(doc, "conserved");
  if (doc.contains("initial_populations")) {
    inst.initial_populations = detail::number_array(doc, "initial_populations");
  }
  inst.eps_pop = detail::number_or(doc, "eps_pop", inst.eps_pop);
  inst.eps_grad = detail::number_or(doc, "eps_grad", inst.eps_grad);
  return inst;
}

inline Json instance_to_json(const ProblemInstance& inst) {
  Json doc;
  doc["eigenvalues"] = inst.lambda;
  doc["target"] = inst.target;
  doc["cost"] = inst.cost;
  if (inst.conserved) doc["conserved"] = *inst.conserved;
  if (inst.initial_populations) doc["initial_populations"] = *inst.initial_populations;
  doc["eps_pop"] = inst.eps_pop;
  doc["eps_grad"] = inst.eps_grad;
  return doc;
}

inline ProblemInstance load_instance(const std::string& path) {
  return instance_from_json(parse(read_file(path), path));
}

/// A serialized trajectory plus where it starts ("minimal_vertex" or
/// "initial_populations").
struct TrajectoryFile {
  OptimalTrajectory trajectory;
  std::string start = "minimal_vertex";
  std::optional<double> alpha_in;
  std::optional<double> initial_cost;
};

inline Json trajectory_to_json(const TrajectoryFile& file) {
  const auto& t = file.trajectory;
  Json doc;
  doc["format"] = "trajopt-trajectory";
  doc["dimension"] = t.dim();
  doc["alpha_range"] = {t.alpha_min(), t.alpha_max()};
  Json bps = Json::array();
  for (const auto& b : t.breakpoints) bps.push_back({b.alpha, b.omega});
  doc["breakpoints"] = std::move(bps);
  Json steps = Json::array();
  for (const auto& s : t.steps) {
    Json js;
    js["k"] = s.k;
    js["l"] = s.l;
    js["gradient"] = s.gradient;
    js["delta_alpha"] = s.delta_alpha;
    js["alpha_start"] = s.alpha_start;
    js["alpha_end"] = s.alpha_end;
    steps.push_back(std::move(js));
  }
  doc["steps"] = std::move(steps);
  doc["vertices"] = t.vertices;
  doc["start_source"] = t.start_source;
  doc["preferred_order"] = t.order.perm;
  doc["blocks"] = t.blocks;
  Json meta;
  meta["start"] = file.start;
  if (file.alpha_in) meta["alpha_in"] = *file.alpha_in;
  if (file.initial_cost) meta["initial_cost"] = *file.initial_cost;
  meta["tie_break"] = kTieBreak;
  meta["eps_pop"] = t.eps_pop;
  meta["eps_grad"] = t.eps_grad;
  meta["tool_version"] = kToolVersion;
  doc["metadata"] = std::move(meta);
  return doc;
}

inline TrajectoryFile trajectory_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "trajectory must be a JSON object");
  if (doc.value("format", std::string()) != "trajopt-trajectory") {
    throw Error(ErrorCode::ParseError, "field 'format' must be \"trajopt-trajectory\"");
  }
  TrajectoryFile file;
  auto& t = file.trajectory;
  for (const auto& b : detail::get_field<std::vector<std::vector<double>>>(doc, "breakpoints")) {
    if (b.size() != 2) throw Error(ErrorCode::ParseError, "field 'breakpoints' needs [alpha, omega] pairs");
    t.breakpoints.push_back({b[0], b[1]});
  }
  const auto it = doc.find("steps");
  if (it == doc.end() || !it->is_array()) throw Error(ErrorCode::ParseError, "field 'steps' must be an array");
  for (const auto& js : *it) {
    SwapStep s;
    s.k = detail::get_field<std::size_t>(js, "k");
    s.l = detail::get_field<std::size_t>(js, "l");
    s.gradient = detail::get_field<double>(js, "gradient");
    s.delta_alpha = detail::get_field<double>(js, "delta_alpha");
    s.alpha_start = detail::get_field<double>(js, "alpha_start");
    s.alpha_end = detail::get_field<double>(js, "alpha_end");
    t.steps.push_back(s);
  }
  t.vertices = detail::get_field<std::vector<PopulationVector>>(doc, "vertices");
  t.start_source = detail::get_field<Permutation>(doc, "start_source");
  t.order.perm = detail::get_field<Permutation>(doc, "preferred_order");
  t.blocks = detail::get_field<Blocks>(doc, "blocks");
  const std::size_t d = detail::get_field<std::size_t>(doc, "dimension");

  if (t.breakpoints.empty() || t.vertices.size() != t.breakpoints.size() ||
      t.steps.size() + 1 != t.vertices.size()) {
    throw Error(ErrorCode::ParseError, "trajectory has inconsistent vertex/step/breakpoint counts");
  }
  for (const auto& v : t.vertices) {
    if (v.size() != d) throw Error(ErrorCode::ParseError, "field 'vertices' has a vector of wrong length");
  }
  if (t.start_source.size() != d || t.order.perm.size() != d) {
    throw Error(ErrorCode::ParseError, "permutation fields have wrong length");
  }
  for (std::size_t i : t.order.perm) {
    if (i >= d) throw Error(ErrorCode::ParseError, "field 'preferred_order' has an index out of range");
  }
  t.order.inverse = invert(t.order.perm);

  const auto meta = doc.find("metadata");
  if (meta == doc.end() || !meta->is_object()) throw Error(ErrorCode::ParseError, "missing field 'metadata'");
  file.start = detail::get_field<std::string>(*meta, "start");
  if (meta->contains("alpha_in")) file.alpha_in = detail::get_field<double>(*meta, "alpha_in");
  if (meta->contains("initial_cost")) file.initial_cost = detail::get_field<double>(*meta, "initial_cost");
  t.eps_pop = detail::get_field<double>(*meta, "eps_pop");
  t.eps_grad = detail::get_field<double>(*meta, "eps_grad");
  return file;
}

inline TrajectoryFile load_trajectory(const std::string& path) {
  return trajectory_from_json(parse(read_file(path), path));
}

/// Two-space indentation and a trailing newline. Doubles use the shortest
/// representation that parses back to the same bits.
inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

inline Json flatten(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

/// Row-major matrices of a lifted point.
inline Json lifted_to_json(const LiftedPoint& lp, double alpha, const EntryPoint& entry) {
  Json doc;
  doc["format"] = "trajopt-lift";
  doc["alpha"] = alpha;
  doc["dimension"] = lp.unitary.rows();
  doc["segment"] = entry.state.segment;
  doc["fraction"] = entry.state.t;
  doc["populations"] = entry.state.populations;
  doc["permutation_source"] = entry.source;
  Json rots = Json::array();
  for (const auto& tt : entry.chain) {
    const auto rot = rotation_for(tt);
    Json jr;
    jr["i"] = rot.i;
    jr["j"] = rot.j;
    jr["t"] = tt.t;
    jr["theta"] = rot.theta;
    rots.push_back(std::move(jr));
  }
  doc["rotations"] = std::move(rots);
  doc["unitary"] = flatten(lp.unitary);
  doc["doubly_stochastic"] = flatten(lp.doubly_stochastic);
  doc["density_diagonal"] = lp.density_diagonal;
  return doc;
}

}  // namespace trajopt::io
