// Copyright 2026 The ensctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ensctl_cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include <CLI11.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "ensctl/composite.hpp"
#include "ensctl/ensemble_sim.hpp"
#include "ensctl/errors.hpp"
#include "ensctl/liealg.hpp"
#include "ensctl/linear_ensemble.hpp"
#include "ensctl/polyfield.hpp"
#include "ensctl/slr.hpp"
#include "ensctl_cli/formats.hpp"

namespace ensctl::cli {
namespace {

using nlohmann::json;

Eigen::Vector3d axis_vector(char axis) {
  if (axis == 'x') return Eigen::Vector3d::UnitX();
  if (axis == 'y') return Eigen::Vector3d::UnitY();
  if (axis == 'z') return Eigen::Vector3d::UnitZ();
  throw InvalidInput(std::string("unknown axis '") + axis + "'");
}

Eigen::Vector3d parse_vector3(const std::string& text, const std::string& what) {
  const auto v = parse_double_list(text, what);
  if (v.size() != 3) throw InvalidInput(what + ": expected three comma-separated numbers");
  const Eigen::Vector3d x(v[0], v[1], v[2]);
  if (x.norm() == 0.0) throw InvalidInput(what + ": zero vector");
  return x;
}

sim::PlantModel parse_model(const std::string& m) {
  return m == "hard" ? sim::PlantModel::hard_pulse : sim::PlantModel::exact;
}

json exponents_json(const std::vector<liealg::Exponents>& basis) {
  json out = json::array();
  for (const auto& e : basis) out.push_back(liealg::to_string(e));
  return out;
}

// Writes artifact, diagnostics and fidelity map for a design subcommand.
void write_design_outputs(const std::string& out_path, const std::string& artifact, json diagnostics,
                          const sim::FidelityMap& map) {
  const std::string map_path = out_path + ".fidelity.csv";
  diagnostics["fidelity_map"] = map_path;
  diagnostics["min_fidelity"] = map.min();
  write_atomic(out_path, artifact);
  emit_fidelity_csv(map, map_path);
  write_atomic(out_path + ".diagnostics.json", dump_json(diagnostics));
}

// Grid with a midpoint inserted between neighbours, for the refinement check.
std::vector<double> refined(const std::vector<double>& x) {
  std::vector<double> r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) r.push_back(0.5 * (x[i - 1] + x[i]));
    r.push_back(x[i]);
  }
  return r;
}

double rotation_fidelity_from_z(const Eigen::Matrix3d& r, const Eigen::Matrix3d& target) {
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  return sim::bloch_fidelity(r * z, target * z);
}

// ---- design-slr ----------------------------------------------------------

struct SlrOptions {
  std::string axis = "x";
  double angle = 0.0;
  double band = 0.0;
  int steps = 0;
  double dt = 0.0;
  std::optional<double> a_max;
  int verify_points = 65;
  std::string model = "hard";
  std::string out;
};

int design_slr(const SlrOptions& o, std::ostream& out) {
  const char axis = o.axis[0];
  const auto design = slr::design_broadband(axis, o.angle, o.band, o.steps, o.dt, o.a_max);
  const auto profile = slr::TargetProfile::broadband(axis, o.angle, o.band, o.verify_points);
  std::vector<sim::SU2Element> targets;
  for (std::size_t i = 0; i < profile.size(); ++i) targets.push_back({profile.F_alpha[i], profile.F_beta[i]});
  const sim::DispersionGrid grid({{"omega", profile.omega}});
  const auto target = sim::TargetSpec<sim::SU2Element>::per_point(targets);
  const auto map = sim::fidelity_map(design.pulse, grid, target, parse_model(o.model));
  const auto exact_map = sim::fidelity_map(design.pulse, grid, target, sim::PlantModel::exact);
  double band_error = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto s = sim::propagate_point(design.pulse, grid.point(i), sim::PlantModel::hard_pulse);
    band_error = std::max(band_error, sim::spinor_distance(s, targets[i]));
  }
  json d;
  d["command"] = "design-slr";
  d["steps"] = static_cast<int>(design.pulse.samples.size());
  d["sub_angles"] = design.sub_angles;
  d["fit_error"] = design.fit_error;
  d["max_step_residual"] = design.max_step_residual;
  d["band_error_hard"] = band_error;
  d["max_amplitude"] = design.pulse.max_amplitude();
  d["model"] = o.model;
  d["min_fidelity_exact"] = exact_map.min();
  const auto fine = slr::TargetProfile::broadband(axis, o.angle, o.band, 2 * o.verify_points - 1);
  std::vector<sim::SU2Element> fine_targets;
  for (std::size_t i = 0; i < fine.size(); ++i) fine_targets.push_back({fine.F_alpha[i], fine.F_beta[i]});
  d["min_fidelity_refined"] = sim::fidelity_map(design.pulse, sim::DispersionGrid({{"omega", fine.omega}}),
                                                sim::TargetSpec<sim::SU2Element>::per_point(fine_targets),
                                                parse_model(o.model))
                                  .min();
  write_design_outputs(o.out, pulse_to_json(design.pulse), d, map);
  out << "design-slr: wrote " << o.out << " (" << design.pulse.samples.size() << " steps, band error "
      << format_double(band_error) << ", min fidelity " << format_double(map.min()) << ")\n";
  return kExitOk;
}

// ---- design-pattern ------------------------------------------------------

struct PatternOptions {
  std::string profile;
  int steps = 0;
  double dt = 0.0;
  std::string model = "hard";
  std::string out;
};

int design_pattern(const PatternOptions& o, std::ostream& out) {
  const auto rows = parse_profile_csv(read_file(o.profile), o.profile);
  const auto profile = slr::TargetProfile::from_flips(rows.omega, rows.flip, rows.weight);
  const auto design = slr::design_pattern(profile, o.steps, o.dt);
  // The map covers the weighted samples; zero-weight samples are don't-care.
  std::vector<double> omega, flip;
  for (std::size_t i = 0; i < rows.omega.size(); ++i)
    if (rows.weight.empty() || rows.weight[i] > 0.0) {
      omega.push_back(rows.omega[i]);
      flip.push_back(rows.flip[i]);
    }
  const sim::DispersionGrid grid({{"omega", omega}});
  sim::FidelityMap map{grid, {}};
  double max_mz_error = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = sim::propagate_point_so3(design.pulse, grid.point(i), parse_model(o.model));
    const double err = std::abs(r(2, 2) - std::cos(flip[i]));
    map.values.push_back(1.0 - err / 2.0);
    max_mz_error = std::max(max_mz_error, err);
  }
  json d;
  d["command"] = "design-pattern";
  d["steps"] = static_cast<int>(design.pulse.samples.size());
  d["fit_error"] = design.fit_error;
  d["max_step_residual"] = design.max_step_residual;
  d["max_mz_error_weighted"] = max_mz_error;
  d["max_amplitude"] = design.pulse.max_amplitude();
  d["model"] = o.model;
  write_design_outputs(o.out, pulse_to_json(design.pulse), d, map);
  out << "design-pattern: wrote " << o.out << " (" << design.pulse.samples.size() << " steps, max Mz error "
      << format_double(max_mz_error) << ")\n";
  return kExitOk;
}

// ---- design-composite ----------------------------------------------------

struct CompositeOptions {
  std::string axis = "x";
  double angle = 0.0;
  double eps_min = 0.9;
  double eps_max = 1.1;
  int eps_n = 21;
  std::string exponents = "1,3,5";
  double tol = 1e-2;
  int m = 1024;
  double dt = 1e-5;
  std::string out;
};

int design_composite(const CompositeOptions& o, std::ostream& out) {
  if (!(o.eps_min < o.eps_max) && o.eps_n > 1) throw InvalidInput("design-composite: need eps-min < eps-max");
  composite::RobustRotationSpec spec;
  spec.axis = o.axis[0];
  spec.epsilon = sim::linspace(o.eps_min, o.eps_max, o.eps_n);
  spec.target.assign(spec.epsilon.size(), o.angle);
  spec.exponents = parse_int_list(o.exponents, "exponents");
  spec.tol = o.tol;
  spec.m = o.m;
  const auto seq = composite::compile_robust_rotation(spec);
  const auto pulse = composite::realize_rf(seq.factors, o.dt);
  const Eigen::Matrix3d target_rot = so3::rotation(axis_vector(spec.axis), o.angle);
  const sim::DispersionGrid grid({{"epsilon", spec.epsilon}});
  const auto target = sim::TargetSpec<Eigen::Vector3d>::uniform(target_rot * Eigen::Vector3d::UnitZ());
  const auto map = sim::fidelity_map(pulse, grid, target);
  double min_gen = 1.0;
  for (double e : spec.epsilon) {
    const Eigen::Matrix3d g = seq.predicted.evaluate({{"eps", e}}).real();
    min_gen = std::min(min_gen, rotation_fidelity_from_z(g.exp(), target_rot));
  }
  json d;
  d["command"] = "design-composite";
  d["basis"] = exponents_json(seq.basis);
  d["coefficients"] = seq.coefficients;
  d["fit_l2"] = seq.diagnostics.fit_l2;
  d["fit_max"] = seq.diagnostics.fit_max;
  d["compile_error"] = seq.diagnostics.compile_error;
  d["subdivisions"] = seq.diagnostics.subdivisions;
  d["factor_count"] = static_cast<int>(seq.diagnostics.factor_count);
  d["min_generator_fidelity"] = min_gen;
  d["min_fidelity_refined"] =
      sim::fidelity_map(pulse, sim::DispersionGrid({{"epsilon", refined(spec.epsilon)}}), target).min();
  d["max_amplitude"] = pulse.max_amplitude();
  write_design_outputs(o.out, pulse_to_json(pulse), d, map);
  out << "design-composite: wrote " << o.out << " (" << pulse.samples.size() << " steps, fit max "
      << format_double(seq.diagnostics.fit_max) << ", min fidelity " << format_double(map.min()) << ")\n";
  return kExitOk;
}

// ---- design-zz -----------------------------------------------------------

struct ZZOptions {
  double theta = 0.0;
  double J0 = 0.0;
  double delta = 0.1;
  std::string exponents = "1,3";
  int samples = 21;
  double tol = 1e-2;
  int m = 256;
  std::string out;
};

int design_zz(const ZZOptions& o, std::ostream& out) {
  const auto exps = parse_int_list(o.exponents, "exponents");
  const auto zz = composite::compile_j_robust_zz(o.theta, o.J0, o.delta, exps, o.samples, o.tol, o.m);
  const auto ratios = o.delta == 0.0 ? std::vector<double>{1.0} : sim::linspace(1.0 - o.delta, 1.0 + o.delta, o.samples);
  std::vector<double> J;
  for (double x : ratios) J.push_back(o.J0 * x);
  const sim::DispersionGrid grid({{"J", J}});
  const Eigen::Matrix4cd gate = composite::zz_gate(o.theta);
  sim::FidelityMap map{grid, {}};
  double min_gen = 1.0;
  for (std::size_t i = 0; i < J.size(); ++i) {
    map.values.push_back(sim::unitary_fidelity(composite::simulate_segments(zz.segments, J[i]), gate));
    const Eigen::MatrixXcd g = zz.sequence.predicted.evaluate({{"x", ratios[i]}});
    min_gen = std::min(min_gen, sim::unitary_fidelity(g.exp(), gate));
  }
  json d;
  d["command"] = "design-zz";
  d["basis"] = exponents_json(zz.sequence.basis);
  d["coefficients"] = zz.sequence.coefficients;
  d["fit_l2"] = zz.sequence.diagnostics.fit_l2;
  d["fit_max"] = zz.sequence.diagnostics.fit_max;
  d["compile_error"] = zz.sequence.diagnostics.compile_error;
  d["subdivisions"] = zz.sequence.diagnostics.subdivisions;
  d["segment_count"] = static_cast<int>(zz.segments.size());
  d["min_generator_fidelity"] = min_gen;
  write_design_outputs(o.out, segments_to_json(zz.segments, o.J0), d, map);
  out << "design-zz: wrote " << o.out << " (" << zz.segments.size() << " segments, generator-level min fidelity "
      << format_double(min_gen) << ", min fidelity " << format_double(map.min()) << ")\n";
  return kExitOk;
}

// ---- simulate / fidelity-map ---------------------------------------------

struct SimulateOptions {
  std::string pulse, grid, initial = "0,0,1", target, model = "exact", out;
};

int simulate(const SimulateOptions& o, std::ostream& out) {
  const auto pulse = read_pulse(o.pulse);
  const auto grid = read_grid(o.grid);
  const auto x0 = parse_vector3(o.initial, "initial");
  const auto state = sim::propagate(pulse, grid, sim::uniform_bloch(grid, x0), parse_model(o.model));
  write_atomic(o.out, state_csv(state));
  out << "simulate: wrote " << o.out << " (" << grid.size() << " points)\n";
  return kExitOk;
}

int fidelity_map_cmd(const SimulateOptions& o, std::ostream& out) {
  const auto pulse = read_pulse(o.pulse);
  const auto grid = read_grid(o.grid);
  const auto x0 = parse_vector3(o.initial, "initial");
  const auto target = parse_vector3(o.target, "target");
  const auto map = sim::fidelity_map(pulse, grid, sim::TargetSpec<Eigen::Vector3d>::uniform(target), x0,
                                     parse_model(o.model));
  emit_fidelity_csv(map, o.out);
  out << "fidelity-map: wrote " << o.out << " (min " << format_double(map.min()) << ", max "
      << format_double(map.max()) << ")\n";
  return kExitOk;
}

// ---- analyze-lie ---------------------------------------------------------

struct LieOptions {
  std::string preset;
  int max_depth = liealg::kDefaultMaxDepth;
  int thetas = 33;
  std::string out;
};

json nilpotency_json(const liealg::Nilpotency& n, const std::vector<int>& dims) {
  json j;
  j["verdict"] = liealg::to_string(n);
  j["series_dims"] = dims;
  if (n.kind == liealg::NilpotencyKind::nilpotent) j["step"] = n.step;
  return j;
}

json closure_json(const liealg::ClosureReport& r) {
  json j;
  j["algebra_dim"] = r.algebra_dim;
  j["closed"] = r.closed;
  j["depth_reached"] = r.depth_reached;
  j["nilpotency"] = nilpotency_json(r.nilpotency, r.series_dims);
  return j;
}

liealg::DispersionPolyElement constant_element(const Eigen::MatrixXcd& m) {
  return liealg::DispersionPolyElement::monomial({}, m);
}

json analyze_heisenberg(int depth) {
  using liealg::heisenberg_g1;
  using liealg::heisenberg_g2;
  std::vector<int> vf_dims, mat_dims;
  const auto vf = liealg::vf_nilpotency({heisenberg_g1(), heisenberg_g2()}, depth, &vf_dims);
  Eigen::MatrixXcd e12 = Eigen::MatrixXcd::Zero(3, 3), e23 = Eigen::MatrixXcd::Zero(3, 3);
  e12(0, 1) = 1.0;
  e23(1, 2) = 1.0;
  int dim = 0;
  const auto mat = liealg::matrix_nilpotency({e12, e23}, depth, &mat_dims, &dim);
  json j;
  j["preset"] = "heisenberg";
  j["vector_fields"] = nilpotency_json(vf, vf_dims);
  j["matrices"] = nilpotency_json(mat, mat_dims);
  j["matrices"]["algebra_dim"] = dim;
  return j;
}

json analyze_rf(int depth) {
  const auto r = liealg::lie_closure({constant_element(so3::Wx().cast<cplx>()), constant_element(so3::Wy().cast<cplx>())},
                                     depth);
  json j = closure_json(r);
  j["preset"] = "rf";
  return j;
}

// rf with phase offset theta: the u and v generators rotate by theta.
json analyze_phase(int depth, int count) {
  if (count < 3) throw InvalidInput("analyze-lie: need at least 3 theta samples");
  std::vector<double> theta;
  for (int k = 0; k < count; ++k) theta.push_back(2.0 * kPi * k / count);
  liealg::SampledElement gu, gv;
  for (double t : theta) {
    gu.values.push_back((std::cos(t) * so3::Wy() - std::sin(t) * so3::Wx()).cast<cplx>());
    gv.values.push_back((-std::sin(t) * so3::Wy() - std::cos(t) * so3::Wx()).cast<cplx>());
  }
  const auto r = liealg::lie_closure_sampled({gu, gv}, depth);
  Eigen::MatrixXd trig(count, 3);
  for (int k = 0; k < count; ++k) trig.row(k) << 1.0, std::cos(theta[k]), std::sin(theta[k]);
  double residual = 0.0;
  for (const Eigen::Matrix3d& dir : {so3::Wx(), so3::Wy(), so3::Wz()}) {
    const auto family = liealg::reachable_functions(r, dir.cast<cplx>());
    for (Eigen::Index c = 0; c < family.samples.cols(); ++c) {
      const Eigen::VectorXd f = family.samples.col(c);
      const Eigen::VectorXd coef = trig.colPivHouseholderQr().solve(f);
      residual = std::max(residual, (trig * coef - f).lpNorm<Eigen::Infinity>());
    }
  }
  json j = closure_json(r);
  j["preset"] = "phase";
  j["theta_samples"] = count;
  j["trig_projection_residual"] = residual;
  return j;
}

json analyze_coupling(int depth) {
  const auto leaves = composite::coupling_leaves();
  const composite::Point at{{"x", 1.0}};
  const Eigen::MatrixXcd b1 = leaves.at("B1").generator.evaluate(at);
  const Eigen::MatrixXcd b2 = leaves.at("B2").generator.evaluate(at);
  const Eigen::MatrixXcd lhs = liealg::commutator(b1, liealg::commutator(b1, b2));
  const double c = liealg::trace_inner(b2, lhs) / liealg::trace_inner(b2, b2);
  const auto r = liealg::lie_closure({leaves.at("B1").generator, leaves.at("B2").generator}, depth);
  json j = closure_json(r);
  j["preset"] = "coupling";
  j["bracket_constant"] = c;
  j["bracket_residual"] = (lhs - c * b2).norm();
  return j;
}

int analyze_lie(const LieOptions& o, std::ostream& out) {
  json j;
  if (o.preset == "heisenberg") j = analyze_heisenberg(o.max_depth);
  else if (o.preset == "rf") j = analyze_rf(o.max_depth);
  else if (o.preset == "phase") j = analyze_phase(o.max_depth, o.thetas);
  else j = analyze_coupling(o.max_depth);
  const std::string text = dump_json(j);
  if (o.out.empty()) out << text;
  else write_atomic(o.out, text);
  return kExitOk;
}

// ---- analyze-linear ------------------------------------------------------

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw InvalidInput(what + " must be a nonempty array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != j[0].size()) throw InvalidInput(what + " has ragged rows");
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      if (!j[r][c].is_number()) throw InvalidInput(what + " entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

struct LinearOptions {
  std::string systems, out;
};

int analyze_linear(const LinearOptions& o, std::ostream& out) {
  const std::string text = read_file(o.systems);
  const json j = parse_json(text, o.systems);
  if (!j.is_object() || !j.contains("samples") || !j.at("samples").is_array() || j.at("samples").empty())
    throw ParseError(o.systems, 1, "expected {\"samples\": [{\"s\", \"A\", \"B\"}, ...]}");
  std::vector<linear::LinearSystemSample> samples;
  for (const auto& e : j.at("samples")) {
    if (!e.is_object() || !e.contains("s") || !e.contains("A") || !e.contains("B") || !e.at("s").is_number())
      throw ParseError(o.systems, 1, "each sample needs numeric \"s\", \"A\" and \"B\"");
    linear::LinearSystemSample s{e.at("s").get<double>(), matrix_from_json(e.at("A"), "A"), matrix_from_json(e.at("B"), "B")};
    s.validate();
    samples.push_back(std::move(s));
  }
  const auto report = linear::ensemble_necessary_conditions(samples);
  json r;
  r["pass"] = report.pass;
  r["image_rank"] = report.image_rank;
  r["singular"] = report.singular;
  json shared = json::array();
  for (const auto& [a, b] : report.shared_charpoly) shared.push_back(json::array({a, b}));
  r["shared_charpoly"] = shared;
  json coeffs = json::array();
  for (const auto& a : report.coefficients) coeffs.push_back(std::vector<double>(a.data(), a.data() + a.size()));
  r["charpoly_coefficients"] = coeffs;
  const std::string text_out = dump_json(r);
  if (o.out.empty()) out << text_out;
  else write_atomic(o.out, text_out);
  if (!report.pass) {
    out << "analyze-linear: necessary conditions fail; the ensemble is not controllable\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

// ---- demos ---------------------------------------------------------------

struct PhaseOptions {
  std::string pulse, thetas = "0,0.5,1.0", omega = "0", epsilon = "1";
};

int demo_phase(const PhaseOptions& o, std::ostream& out) {
  const auto pulse = read_pulse(o.pulse);
  const sim::DispersionGrid grid({{"omega", parse_double_list(o.omega, "omega")},
                                  {"epsilon", parse_double_list(o.epsilon, "epsilon")},
                                  {"theta", parse_double_list(o.thetas, "thetas")}});
  const double dev = sim::phase_frame_check(pulse, grid);
  out << "max frame deviation: " << format_double(dev) << "\n";
  return kExitOk;
}

struct HeisenbergOptions {
  std::uint64_t seed = 1;
  int steps = 64;
  double dt = 0.01;
  int draws = 1;
  std::string epsilons = "0.5,1,2";
};

int demo_heisenberg(const HeisenbergOptions& o, std::ostream& out) {
  const auto eps = parse_double_list(o.epsilons, "epsilons");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0.0;
  bool holds = true;
  for (int d = 0; d < o.draws; ++d) {
    std::vector<double> u1(static_cast<std::size_t>(o.steps)), u2(u1.size());
    for (std::size_t k = 0; k < u1.size(); ++k) {
      u1[k] = uni(rng);
      u2[k] = uni(rng);
    }
    const auto r = linear::heisenberg_invariant(u1, u2, o.dt, eps);
    for (std::size_t i = 0; i < eps.size(); ++i)
      out << "draw " << d << " eps " << format_double(eps[i]) << " x3/eps^2 " << format_double(r.ratios[i].z()) << "\n";
    worst = std::max(worst, r.max_relative_spread);
    holds = holds && r.holds;
  }
  out << "max relative spread: " << format_double(worst) << (holds ? " (invariant holds)" : " (invariant violated)")
      << "\n";
  return kExitOk;
}

// ---- dispatch ------------------------------------------------------------

bool given_on_command_line(const std::vector<std::string>& args, const std::string& name) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == name || a.rfind(name + "=", 0) == 0; });
}

// Appends key=value entries of --config FILE as long options of the named
// subcommand. Unknown keys are rejected with their line number.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  for (const auto& [key, entry] : parse_config(read_file(path), path)) {
    const std::string name = "--" + key;
    if (key == "config" || sub->get_option_no_throw(name) == nullptr)
      throw ParseError(path, entry.line, "unknown key \"" + key + "\" for " + args[0]);
    if (given_on_command_line(args, name)) continue;
    args.push_back(name);
    args.push_back(entry.value);
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ensctl: ensemble control design, simulation and analysis", "ensctl"};
  app.require_subcommand(1);
  std::function<int()> action;
  const auto positive = CLI::PositiveNumber;
  const auto add_config = [](CLI::App* s) { s->add_option("--config", "key=value file of long options"); };

  SlrOptions slr_o;
  auto* s = app.add_subcommand("design-slr", "Broadband rotation by inverse spinor recursion");
  s->add_option("--axis", slr_o.axis)->check(CLI::IsMember({"x", "y"}));
  s->add_option("--angle", slr_o.angle, "rotation angle, rad")->required();
  s->add_option("--band", slr_o.band, "half bandwidth, rad/s")->required()->check(positive);
  s->add_option("--steps", slr_o.steps)->required()->check(CLI::Range(2, 1 << 20));
  s->add_option("--dt", slr_o.dt, "step duration, s")->required()->check(positive);
  s->add_option("--a-max", slr_o.a_max, "amplitude bound, rad/s")->check(positive);
  s->add_option("--verify-points", slr_o.verify_points)->check(CLI::Range(2, 1 << 20));
  s->add_option("--model", slr_o.model)->check(CLI::IsMember({"hard", "exact"}));
  s->add_option("--out", slr_o.out)->required();
  add_config(s);
  s->callback([&] { action = [&] { return design_slr(slr_o, out); }; });

  PatternOptions pat_o;
  s = app.add_subcommand("design-pattern", "Frequency-selective flip pattern from a profile CSV");
  s->add_option("--profile", pat_o.profile, "CSV with header omega,flip[,weight]")->required();
  s->add_option("--steps", pat_o.steps)->required()->check(CLI::Range(2, 1 << 20));
  s->add_option("--dt", pat_o.dt, "step duration, s")->required()->check(positive);
  s->add_option("--model", pat_o.model)->check(CLI::IsMember({"hard", "exact"}));
  s->add_option("--out", pat_o.out)->required();
  add_config(s);
  s->callback([&] { action = [&] { return design_pattern(pat_o, out); }; });

  CompositeOptions comp_o;
  s = app.add_subcommand("design-composite", "rf-inhomogeneity robust rotation from bracket words");
  s->add_option("--axis", comp_o.axis)->check(CLI::IsMember({"x", "y"}));
  s->add_option("--angle", comp_o.angle, "rotation angle, rad")->required();
  s->add_option("--eps-min", comp_o.eps_min)->check(positive);
  s->add_option("--eps-max", comp_o.eps_max)->check(positive);
  s->add_option("--eps-n", comp_o.eps_n)->check(CLI::Range(1, 1 << 16));
  s->add_option("--exponents", comp_o.exponents, "comma-separated powers of epsilon");
  s->add_option("--tol", comp_o.tol, "maximum fit residual, rad")->check(positive);
  s->add_option("--m", comp_o.m, "interleaved rounds")->check(CLI::Range(1, 1 << 16));
  s->add_option("--dt", comp_o.dt, "sample duration, s")->check(positive);
  s->add_option("--out", comp_o.out)->required();
  add_config(s);
  s->callback([&] { action = [&] { return design_composite(comp_o, out); }; });

  ZZOptions zz_o;
  s = app.add_subcommand("design-zz", "Coupling-robust ZZ gate");
  s->add_option("--theta", zz_o.theta, "gate angle of exp(-i theta s1z s2z)")->required();
  s->add_option("--J0", zz_o.J0, "nominal coupling, rad/s")->required()->check(positive);
  s->add_option("--delta", zz_o.delta, "relative coupling spread")->check(CLI::Range(0.0, 1.0));
  s->add_option("--exponents", zz_o.exponents, "comma-separated powers of J/J0");
  s->add_option("--samples", zz_o.samples)->check(CLI::Range(1, 1 << 16));
  s->add_option("--tol", zz_o.tol, "maximum fit residual")->check(positive);
  s->add_option("--m", zz_o.m, "interleaved rounds")->check(CLI::Range(1, 1 << 16));
  s->add_option("--out", zz_o.out)->required();
  add_config(s);
  s->callback([&] { action = [&] { return design_zz(zz_o, out); }; });

  SimulateOptions sim_o;
  s = app.add_subcommand("simulate", "Propagate a Bloch vector over a dispersion grid");
  s->add_option("--pulse", sim_o.pulse)->required();
  s->add_option("--grid", sim_o.grid)->required();
  s->add_option("--initial", sim_o.initial, "x,y,z");
  s->add_option("--model", sim_o.model)->check(CLI::IsMember({"hard", "exact"}));
  s->add_option("--out", sim_o.out)->required();
  add_config(s);
  s->callback([&] { action = [&] { return simulate(sim_o, out); }; });

  SimulateOptions map_o;
  s = app.add_subcommand("fidelity-map", "Bloch fidelity against a target over a grid");
  s->add_option("--pulse", map_o.pulse)->required();
  s->add_option("--grid", map_o.grid)->required();
  s->add_option("--initial", map_o.initial, "x,y,z");
  s->add_option("--target", map_o.target, "x,y,z")->required();
  s->add_option("--model", map_o.model)->check(CLI::IsMember({"hard", "exact"}));
  s->add_option("--out", map_o.out)->required();
  add_config(s);
  s->callback([&] { action = [&] { return fidelity_map_cmd(map_o, out); }; });

  LieOptions lie_o;
  s = app.add_subcommand("analyze-lie", "Closure and nilpotency of preset generator sets");
  s->add_option("--preset", lie_o.preset)->required()->check(CLI::IsMember({"heisenberg", "rf", "phase", "coupling"}));
  s->add_option("--max-depth", lie_o.max_depth)->check(CLI::Range(1, 64));
  s->add_option("--thetas", lie_o.thetas, "theta samples for the phase preset")->check(CLI::Range(3, 1 << 16));
  s->add_option("--out", lie_o.out, "report path; stdout when omitted");
  add_config(s);
  s->callback([&] { action = [&] { return analyze_lie(lie_o, out); }; });

  LinearOptions lin_o;
  s = app.add_subcommand("analyze-linear", "Necessary conditions for a sampled linear ensemble");
  s->add_option("--systems", lin_o.systems, "JSON {\"samples\": [{\"s\", \"A\", \"B\"}]}")->required();
  s->add_option("--out", lin_o.out, "report path; stdout when omitted");
  add_config(s);
  s->callback([&] { action = [&] { return analyze_linear(lin_o, out); }; });

  PhaseOptions ph_o;
  s = app.add_subcommand("demo-phase", "Frame law under rf phase dispersion");
  s->add_option("--pulse", ph_o.pulse)->required();
  s->add_option("--thetas", ph_o.thetas, "increasing comma-separated phases, rad");
  s->add_option("--omega", ph_o.omega, "increasing comma-separated offsets, rad/s");
  s->add_option("--epsilon", ph_o.epsilon, "increasing comma-separated rf scales");
  add_config(s);
  s->callback([&] { action = [&] { return demo_phase(ph_o, out); }; });

  HeisenbergOptions hz_o;
  s = app.add_subcommand("demo-heisenberg", "Scaling law x3/eps^2 of the nonholonomic integrator");
  s->add_option("--seed", hz_o.seed);
  s->add_option("--steps", hz_o.steps)->check(CLI::Range(1, 1 << 20));
  s->add_option("--dt", hz_o.dt)->check(positive);
  s->add_option("--draws", hz_o.draws)->check(CLI::Range(1, 1 << 16));
  s->add_option("--epsilons", hz_o.epsilons, "comma-separated scales");
  add_config(s);
  s->callback([&] { action = [&] { return demo_heisenberg(hz_o, out); }; });

  try {
    auto expanded = expand_config(app, args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  try {
    return action();
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ensctl::cli
