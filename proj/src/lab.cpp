#include "lindbladlab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "lindbladlab/random_models.hpp"

namespace lindblad::lab {

namespace fs = std::filesystem;
using io::json;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Evolve: return "evolve";
    case Mode::Stationary: return "stationary";
    case Mode::Memory: return "memory";
    case Mode::Bose: return "bose";
    case Mode::Spectrum: return "spectrum";
    case Mode::Verify: return "verify";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name) {
  for (Mode m : {Mode::Evolve, Mode::Stationary, Mode::Memory, Mode::Bose, Mode::Spectrum, Mode::Verify})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("LINDBLADLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ModelKind classify_model(const json& doc) {
  if (!doc.is_object()) raise(ErrorCode::ParseError, "model file must hold a JSON object");
  if (doc.contains("v_tilde")) return ModelKind::Tensor;
  if (doc.contains("beta")) return ModelKind::Bose;
  if (doc.contains("lindblad_ops")) return ModelKind::Lindblad;
  raise(ErrorCode::ParseError, "model file matches no known model schema");
}

namespace {

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Lindblad: return "lindblad";
    case ModelKind::Tensor: return "tensor";
    case ModelKind::Bose: return "bose";
  }
  return "unknown";
}

[[noreturn]] void bad(const std::string& detail) { raise(ErrorCode::ParseError, detail); }

double number(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number()) bad(std::string("\"") + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(std::string("\"") + key + "\" must be finite");
  return x;
}

double positive_number(const json& doc, const char* key) {
  const double x = number(doc, key);
  if (x <= 0) bad(std::string("\"") + key + "\" must be positive");
  return x;
}

long long integer(const json& doc, const char* key, long long lo) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < lo)
    bad(std::string("\"") + key + "\" must be an integer >= " + std::to_string(lo));
  return v.get<long long>();
}

std::string text(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_string()) bad(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::uint64_t seed_value(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  bad("\"seed\" must be a non-negative integer");
}

void read_tolerances(const json& doc, Tolerances& tol) {
  if (!doc.is_object()) bad("\"tolerances\" must be an object");
  const std::pair<const char*, double Tolerances::*> fields[] = {
      {"invertibility", &Tolerances::invertibility}, {"hermitian", &Tolerances::hermitian},
      {"unitary", &Tolerances::unitary},             {"positive", &Tolerances::positive},
      {"trace", &Tolerances::trace},                 {"commutation", &Tolerances::commutation},
      {"kernel", &Tolerances::kernel},               {"singular_point", &Tolerances::singular_point}};
  for (const auto& [key, value] : doc.items()) {
    auto it = std::find_if(std::begin(fields), std::end(fields), [&](const auto& f) { return key == f.first; });
    if (it == std::end(fields)) bad("unknown tolerance \"" + key + "\"");
    tol.*(it->second) = positive_number(doc, key.c_str());
  }
}

}  // namespace

RunConfig parse_config(Mode mode, const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) bad("config must be a JSON object");
  RunConfig cfg;
  cfg.mode = mode;
  if (doc.contains("mode") && text(doc, "mode") != to_string(mode))
    bad("config mode \"" + text(doc, "mode") + "\" does not match the command");

  if (doc.contains("model") == doc.contains("models")) bad("exactly one of \"model\" or \"models\" is required");
  if (doc.contains("model")) {
    cfg.model_names.push_back(text(doc, "model"));
  } else {
    const json& list = doc.at("models");
    if (!list.is_array() || list.empty()) bad("\"models\" must be a non-empty array");
    for (const auto& entry : list) {
      if (!entry.is_string()) bad("\"models\" entries must be strings");
      cfg.model_names.push_back(entry.get<std::string>());
    }
  }
  if (mode != Mode::Verify && cfg.model_names.size() != 1) bad("this mode takes a single model");
  for (const auto& name : cfg.model_names) {
    const fs::path p = fs::path(name).is_absolute() ? fs::path(name) : base_dir / name;
    cfg.model_documents.push_back(io::read_json_file(p));
    cfg.model_kinds.push_back(classify_model(cfg.model_documents.back()));
  }
  const ModelKind expected = mode == Mode::Memory ? ModelKind::Tensor
                             : mode == Mode::Bose ? ModelKind::Bose
                                                  : ModelKind::Lindblad;
  if (mode != Mode::Verify && cfg.model_kinds.front() != expected)
    bad("mode " + std::string(to_string(mode)) + " expects a " + std::string(kind_name(expected)) + " model");

  if (doc.contains("tolerances")) read_tolerances(doc.at("tolerances"), cfg.tolerances);
  if (doc.contains("seed")) cfg.seed = seed_value(doc.at("seed"));
  if (doc.contains("out")) cfg.out_dir = base_dir / text(doc, "out");

  if (doc.contains("t_max")) {
    cfg.t_max = number(doc, "t_max");
    if (*cfg.t_max < 0) bad("\"t_max\" must be non-negative");
  }
  if (doc.contains("steps")) cfg.steps = static_cast<std::size_t>(integer(doc, "steps", 1));
  if (doc.contains("gap_multiplier")) cfg.gap_multiplier = positive_number(doc, "gap_multiplier");

  if (doc.contains("picture")) {
    const std::string p = text(doc, "picture");
    if (p == "heisenberg") cfg.picture = Picture::Heisenberg;
    else if (p == "schrodinger") cfg.picture = Picture::Schrodinger;
    else bad("\"picture\" must be heisenberg or schrodinger");
  }
  if (doc.contains("method")) {
    const std::string m = text(doc, "method");
    if (m == "exponential") cfg.method = Method::Exponential;
    else if (m == "ode") cfg.method = Method::ODE;
    else bad("\"method\" must be exponential or ode");
  }
  if (doc.contains("observable")) cfg.observable = io::matrix_from_json(doc.at("observable"));
  if (doc.contains("initial_state")) cfg.initial_state = io::matrix_from_json(doc.at("initial_state"));
  if (doc.contains("quantities")) {
    const json& q = doc.at("quantities");
    if (!q.is_array() || q.empty()) bad("\"quantities\" must be a non-empty array");
    cfg.quantities.clear();
    for (const auto& entry : q) {
      if (!entry.is_string()) bad("\"quantities\" entries must be strings");
      const std::string name = entry.get<std::string>();
      if (name != "expectation" && name != "trace" && name != "conservation_residual")
        bad("unknown quantity \"" + name + "\"");
      if (name == "conservation_residual" && cfg.picture != Picture::Heisenberg)
        bad("conservation_residual needs the Heisenberg picture");
      cfg.quantities.push_back(name);
    }
  }
  if (mode == Mode::Evolve && !cfg.observable) bad("evolve needs an \"observable\"");
  if ((mode == Mode::Memory || mode == Mode::Bose) && !cfg.observable)
    bad(std::string(to_string(mode)) + " needs an \"observable\"");

  if (doc.contains("kappa")) {
    const std::string k = text(doc, "kappa");
    if (k == "i") cfg.kappa = kKappaI;
    else if (k == "1") cfg.kappa = kKappaOne;
    else bad("\"kappa\" must be \"i\" or \"1\"");
  }
  if (doc.contains("horizon")) cfg.horizon = positive_number(doc, "horizon");
  if (doc.contains("step")) cfg.step = positive_number(doc, "step");
  if (doc.contains("witness")) {
    const json& w = doc.at("witness");
    if (!w.is_object() || !w.contains("rho_a") || !w.contains("rho_b"))
      bad("\"witness\" needs \"rho_a\" and \"rho_b\"");
    cfg.witness = WitnessStates{io::matrix_from_json(w.at("rho_a")), io::matrix_from_json(w.at("rho_b"))};
  }

  if (doc.contains("j_max")) cfg.j_max = static_cast<int>(integer(doc, "j_max", 0));
  if (doc.contains("path")) {
    const std::string p = text(doc, "path");
    if (p == "auto") cfg.fock_path = FockPath::Auto;
    else if (p == "dense") cfg.fock_path = FockPath::Dense;
    else if (p == "occupation") cfg.fock_path = FockPath::Occupation;
    else bad("\"path\" must be auto, dense or occupation");
  }
  if (doc.contains("include_vacuum")) {
    if (!doc.at("include_vacuum").is_boolean()) bad("\"include_vacuum\" must be a boolean");
    cfg.include_vacuum = doc.at("include_vacuum").get<bool>();
  }
  return cfg;
}

RunConfig load_config(Mode mode, const fs::path& path) {
  const json doc = io::read_json_file(path);
  return parse_config(mode, doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

namespace {

double horizon_for(const Superoperator& heis, double multiplier, const Tolerances& tol) {
  const StationaryReport rep = stationary_report(heis, tol);
  if (rep.spectral_gap <= 0) raise(ErrorCode::NonConvergent, "spectral gap is zero; no finite horizon");
  return multiplier / rep.spectral_gap;
}

std::vector<double> grid_for(const RunConfig& cfg, const Superoperator& heis) {
  const double t_max = cfg.t_max ? *cfg.t_max : horizon_for(heis, cfg.gap_multiplier, cfg.tolerances);
  if (t_max == 0) return {0.0};
  return uniform_grid(t_max, cfg.steps);
}

ComplexMatrix maximally_mixed(Index d) {
  return ComplexMatrix::Identity(d, d) / static_cast<double>(d);
}

cdouble trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().array() * b.array()).sum();
}

void write(const fs::path& path, const std::string& content, RunResult& result) {
  io::atomic_write(path, content);
  result.outputs.push_back(path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

RunResult run_evolve(const RunConfig& cfg) {
  const LindbladModel model = io::model_from_json(cfg.model_documents.front(), cfg.tolerances);
  const Index d = model.dim();
  const ComplexMatrix& b0 = *cfg.observable;
  const ComplexMatrix rho0 = cfg.initial_state ? *cfg.initial_state : maximally_mixed(d);
  if (b0.rows() != d || b0.cols() != d || rho0.rows() != d || rho0.cols() != d)
    raise(ErrorCode::DimensionMismatch, "observable and initial state must match the model dimension");
  const DensityMatrix rho(rho0, cfg.tolerances);

  const Superoperator heis = heisenberg_generator(model);
  const std::vector<double> grid = grid_for(cfg, heis);
  const bool heisenberg = cfg.picture == Picture::Heisenberg;
  const Superoperator gen = heisenberg ? heis : schrodinger_generator(model);

  std::optional<PositiveMatrix> w;
  cdouble conserved0{};
  if (std::find(cfg.quantities.begin(), cfg.quantities.end(), "conservation_residual") != cfg.quantities.end()) {
    w = multi_W(model, cfg.tolerances);
    conserved0 = trace_product(b0, w->matrix());
  }

  std::vector<io::TrajectoryRow> rows;
  propagate_visit(gen, heisenberg ? b0 : rho.matrix(), grid, cfg.method,
                  [&](std::size_t, double t, const ComplexMatrix& x) {
                    for (const auto& q : cfg.quantities) {
                      cdouble value;
                      if (q == "expectation")
                        value = heisenberg ? trace_product(x, rho.matrix()) : trace_product(b0, x);
                      else if (q == "trace")
                        value = x.trace();
                      else
                        value = std::abs(trace_product(x, w->matrix()) - conserved0);
                      rows.push_back({t, q, value});
                    }
                  });
  RunResult result;
  write(cfg.out_dir / "trajectory.csv", io::trajectory_csv(rows), result);
  result.summary = json{{"mode", "evolve"}, {"rows", rows.size()}};
  return result;
}

RunResult run_stationary(const RunConfig& cfg) {
  const LindbladModel model = io::model_from_json(cfg.model_documents.front(), cfg.tolerances);
  const Superoperator gen = cfg.picture == Picture::Heisenberg ? heisenberg_generator(model)
                                                               : schrodinger_generator(model);
  const StationaryReport rep = stationary_report(gen, cfg.tolerances);
  json out = io::stationary_report_to_json(rep);
  out["gap_multiplier"] = cfg.gap_multiplier;
  out["horizon"] = rep.spectral_gap > 0 ? json(cfg.gap_multiplier / rep.spectral_gap) : json(nullptr);
  RunResult result;
  write(cfg.out_dir / "stationary.json", dump(out), result);
  result.summary = json{{"mode", "stationary"}, {"kernel_dimension", rep.kernel_dimension}};
  return result;
}

RunResult run_spectrum(const RunConfig& cfg) {
  const LindbladModel model = io::model_from_json(cfg.model_documents.front(), cfg.tolerances);
  const Superoperator gen = cfg.picture == Picture::Heisenberg ? heisenberg_generator(model)
                                                               : schrodinger_generator(model);
  const StationaryReport rep = stationary_report(gen, cfg.tolerances);
  std::string csv = "re, im\n";
  for (Index k = 0; k < rep.eigenvalues.size(); ++k)
    csv += io::format_real(rep.eigenvalues(k).real()) + "," + io::format_real(rep.eigenvalues(k).imag()) + "\n";
  RunResult result;
  write(cfg.out_dir / "spectrum.csv", csv, result);
  result.summary = json{{"mode", "spectrum"}, {"eigenvalues", rep.eigenvalues.size()}};
  return result;
}

RunResult run_memory(const RunConfig& cfg) {
  const TensorModel tm = io::tensor_model_from_json(cfg.model_documents.front(), cfg.tolerances);
  const BlockObservable b0(*cfg.observable, tm.m(), tm.n());
  const double horizon = cfg.horizon ? *cfg.horizon : convergence_horizon(tm, cfg.gap_multiplier, cfg.tolerances);
  MemoryOptions opts;
  opts.kappa = cfg.kappa;
  opts.step = cfg.step;
  const MemoryReport rep = b_infinity(tm, b0, horizon, opts);
  json out = io::memory_report_to_json(rep);
  out["diagnostics"]["gap_multiplier"] = cfg.horizon ? json(nullptr) : json(cfg.gap_multiplier);
  if (cfg.initial_state) {
    const DensityMatrix rho(*cfg.initial_state, cfg.tolerances);
    out["expectation"] = io::complex_to_json(memory_expectation(rho, rep.b_infinity));
  }
  if (cfg.witness) {
    const WitnessResult w = memory_witness(tm, b0, DensityMatrix(cfg.witness->rho_a, cfg.tolerances),
                                           DensityMatrix(cfg.witness->rho_b, cfg.tolerances), horizon, opts);
    out["witness"] = io::witness_to_json(w);
  }
  RunResult result;
  write(cfg.out_dir / "memory.json", dump(out), result);
  result.summary = json{{"mode", "memory"}, {"route_difference", rep.route_difference}};
  return result;
}

RunResult run_bose(const RunConfig& cfg) {
  const BoseModel model = io::bose_model_from_json(cfg.model_documents.front());
  FockOptions opts;
  opts.path = cfg.fock_path;
  opts.include_vacuum = cfg.include_vacuum;
  const ClusterCheck check = cluster_check(*cfg.observable, model, cfg.j_max, opts);
  json out = io::bose_report_to_json(check.report);
  out["residual"] = check.residual;
  out["relative_tail_bound"] = check.relative_tail_bound;
  RunResult result;
  write(cfg.out_dir / "bose.json", dump(out), result);
  result.summary = json{{"mode", "bose"}, {"residual", check.residual}};
  return result;
}

// ---- verify ----------------------------------------------------------------

struct Suite {
  json checks = json::array();
  json skipped = json::array();
  json info = json::object();
  bool pass = true;

  void check(const std::string& name, double residual, double tolerance) {
    const bool ok = std::isfinite(residual) && residual <= tolerance;
    pass = pass && ok;
    checks.push_back(json{{"name", name}, {"residual", residual}, {"tolerance", tolerance}, {"pass", ok}});
  }
  void skip(const std::string& name, const std::string& reason) {
    skipped.push_back(json{{"name", name}, {"reason", reason}});
  }
  void fail(const std::string& name, const Error& e) {
    pass = false;
    checks.push_back(json{{"name", name}, {"error", std::string(to_string(e.code()))}, {"detail", e.detail()},
                          {"pass", false}});
  }
};

double frob(const ComplexMatrix& m) { return m.norm(); }

void lindblad_suite(const LindbladModel& model, random::Engine& rng, double multiplier, const Tolerances& tol,
                    Suite& s) {
  const Index d = model.dim();
  const Superoperator heis = heisenberg_generator(model);
  const Superoperator schr = schrodinger_generator(model);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const double scale = std::max(1.0, heis.matrix.norm());

  s.check("unitality", frob(heis.apply(id)) / scale, 1e-12);
  const ComplexVector trace_row = vectorize(id).adjoint() * schr.matrix;
  s.check("trace_annihilation", trace_row.norm() / scale, 1e-12);

  const ComplexMatrix b0 = random::hermitian(d, rng).matrix();
  const ComplexMatrix rho0 = random::density(d, rng).matrix();
  s.check("generator_duality",
          std::abs(trace_product(heis.apply(b0), rho0) - trace_product(b0, schr.apply(rho0))) /
              (scale * std::max(1.0, frob(b0))),
          1e-12);

  const StationaryReport rep = stationary_report(heis, tol);
  s.info["kernel_dimension"] = rep.kernel_dimension;
  s.info["spectral_gap"] = rep.spectral_gap;
  s.info["gap_multiplier"] = multiplier;
  const double horizon = rep.spectral_gap > 0 ? multiplier / rep.spectral_gap : 0.0;
  s.info["horizon"] = rep.spectral_gap > 0 ? json(horizon) : json(nullptr);

  const double t_short = horizon > 0 ? std::min(10.0, horizon) : 10.0;
  const std::vector<double> grid = uniform_grid(t_short, 40);
  const Trajectory tb = propagate(heis, b0, grid, Method::Exponential);
  const Trajectory tr = propagate(schr, rho0, grid, Method::Exponential);
  const Trajectory tb_ode = propagate(heis, b0, grid, Method::ODE);
  double duality = 0, agreement = 0, trace_err = 0, negativity = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    duality = std::max(duality, std::abs(trace_product(tb.snapshots[k], rho0) - trace_product(b0, tr.snapshots[k])));
    agreement = std::max(agreement, frob(tb.snapshots[k] - tb_ode.snapshots[k]));
    trace_err = std::max(trace_err, std::abs(tr.snapshots[k].trace() - 1.0));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize<double>(tr.snapshots[k]), Eigen::EigenvaluesOnly);
    negativity = std::max(negativity, -es.eigenvalues()(0));
  }
  s.check("trajectory_duality", duality, 1e-9);
  s.check("method_agreement", agreement / std::max(1.0, frob(b0)), 1e-8);
  s.check("trace_preservation", trace_err, 1e-10);
  s.check("positivity", std::max(0.0, negativity), 1e-10);

  for (const double t : {0.1, 1.0, 10.0})
    s.check("complete_positivity_t" + io::format_real(t), std::max(0.0, -cp_check(schr, t)),
            1e-10 * static_cast<double>(d));

  std::optional<PositiveMatrix> w;
  try {
    w = multi_W(model, tol);
  } catch (const Error& e) {
    s.skip("conservation", std::string(to_string(e.code())) + ": " + e.detail());
    s.skip("relaxation", "no conserved weight");
    return;
  }
  if (horizon <= 0) {
    s.skip("conservation", "spectral gap is zero");
    s.skip("relaxation", "spectral gap is zero");
    return;
  }
  const Trajectory long_b = propagate(heis, b0, uniform_grid(horizon, 200), Method::Exponential);
  s.check("conservation", conservation_residual(long_b, *w, model, tol), 1e-8);

  if (rep.kernel_dimension != 1) {
    s.skip("relaxation", "kernel dimension " + std::to_string(rep.kernel_dimension));
    return;
  }
  const ComplexMatrix b_limit = asymptotic_observable(b0, *w);
  const ComplexMatrix rho_limit = normalized_distribution(*w, tol).matrix();
  s.check("relaxation_observable", frob(evolve(heis, b0, horizon) - b_limit), 1e-6);
  s.check("relaxation_state", frob(evolve(schr, rho0, horizon) - rho_limit), 1e-6);
}

void tensor_suite(const TensorModel& tm, random::Engine& rng, double multiplier, const Tolerances& tol, Suite& s) {
  const Index n = tm.n();
  const LindbladModel assembled = assemble_model(tm, tol);
  const BlockObservable b0(random::hermitian(tm.dim(), rng).matrix(), tm.m(), n);

  const PolarFactors<double> whole = polar_decompose<double>(assembled.lindblad_ops().front(), tol);
  const PolarFactors<double> site = polar_decompose<double>(tm.v_tilde(), tol);
  s.check("polar_split",
          frob(whole.unitary.matrix() - tensor_product<double>(site.unitary.matrix(), ComplexMatrix::Identity(n, n))),
          1e-11);

  const ComplexMatrix rate = memory_rate(b0, tm, kKappaI);
  s.check("rate_trace_nullity", std::abs(rate.trace()) / std::max(1.0, frob(rate)), 1e-12);
  s.check("memory_identity", memory_rate_identity_residual(tm, b0, uniform_grid(0.2, 200), kKappaI), 1e-6);

  const double horizon = convergence_horizon(tm, multiplier, tol);
  s.info["memory_horizon"] = horizon;
  const MemoryReport rep = b_infinity(tm, b0, horizon);
  s.check("memory_routes", rep.route_difference, 1e-5);

  Suite inner;
  lindblad_suite(assembled, rng, multiplier, tol, inner);
  for (auto& c : inner.checks) s.checks.push_back(c);
  for (auto& c : inner.skipped) s.skipped.push_back(c);
  for (auto& [k, v] : inner.info.items()) s.info[k] = v;
  s.pass = s.pass && inner.pass;
}

int dense_j_max(Index d) {
  int j = 0;
  double size = 1;
  while (j < 12 && size * static_cast<double>(d) <= static_cast<double>(kDefaultDenseCap)) {
    size *= static_cast<double>(d);
    ++j;
  }
  return j;
}

void bose_suite(const BoseModel& model, random::Engine& rng, Suite& s) {
  const Index d = model.dim();
  const PositiveMatrix v = model.lindblad_root();
  const PositiveMatrix geo = geometric_W_infinite(v);
  const PositiveMatrix fock = fock_bose_W(v);
  s.check("geometric_equivalence", frob(geo.matrix() - fock.matrix()) / std::max(1.0, frob(fock.matrix())), 1e-12);
  s.check("bose_operator", frob(fock.matrix() - bose_distribution(model).matrix()) / std::max(1.0, frob(fock.matrix())),
          1e-12);

  const ClusterCheck diag = cluster_check(model.hamiltonian().matrix(), model, 60);
  s.check("cluster_diagonal", diag.residual, std::max(diag.relative_tail_bound, 1e-8));

  const ComplexMatrix b = random::hermitian(d, rng).matrix();
  FockOptions opts;
  opts.path = FockPath::Dense;
  const ClusterCheck dense = cluster_check(b, model, dense_j_max(d), opts);
  s.check("cluster_dense", dense.residual, std::max(dense.relative_tail_bound, 1e-8));
  s.info["nbar"] = diag.report.nbar;
}

json verify_one(const RunConfig& cfg, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  random::Engine rng(seq);
  Suite s;
  const json& doc = cfg.model_documents[index];
  try {
    switch (cfg.model_kinds[index]) {
      case ModelKind::Lindblad:
        lindblad_suite(io::model_from_json(doc, cfg.tolerances), rng, cfg.gap_multiplier, cfg.tolerances, s);
        break;
      case ModelKind::Tensor:
        tensor_suite(io::tensor_model_from_json(doc, cfg.tolerances), rng, cfg.gap_multiplier, cfg.tolerances, s);
        break;
      case ModelKind::Bose:
        bose_suite(io::bose_model_from_json(doc), rng, s);
        break;
    }
  } catch (const Error& e) {
    s.fail("suite", e);
  }
  return json{{"model", cfg.model_names[index]},
              {"kind", std::string(kind_name(cfg.model_kinds[index]))},
              {"pass", s.pass},
              {"checks", std::move(s.checks)},
              {"skipped", std::move(s.skipped)},
              {"info", std::move(s.info)}};
}

RunResult run_verify(const RunConfig& cfg) {
  const std::size_t count = cfg.model_documents.size();
  std::vector<json> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = verify_one(cfg, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  bool pass = true;
  json models = json::array();
  for (auto& r : results) {
    pass = pass && r.at("pass").get<bool>();
    models.push_back(std::move(r));
  }
  const json out{{"seed", cfg.seed}, {"gap_multiplier", cfg.gap_multiplier}, {"pass", pass}, {"models", models}};
  RunResult result;
  write(cfg.out_dir / "verify.json", dump(out), result);
  result.exit_code = pass ? 0 : 3;
  result.summary = json{{"mode", "verify"}, {"pass", pass}};
  return result;
}

}  // namespace

RunResult run(const RunConfig& config) {
  fs::create_directories(config.out_dir);
  switch (config.mode) {
    case Mode::Evolve: return run_evolve(config);
    case Mode::Stationary: return run_stationary(config);
    case Mode::Memory: return run_memory(config);
    case Mode::Bose: return run_bose(config);
    case Mode::Spectrum: return run_spectrum(config);
    case Mode::Verify: return run_verify(config);
  }
  raise(ErrorCode::InvalidArgument, "unknown mode");
}

// ---- generate --------------------------------------------------------------

RandomModelSpec parse_random_spec(const json& doc) {
  if (!doc.is_object()) bad("model spec must be a JSON object");
  RandomModelSpec spec;
  spec.tag = text(doc, "tag");
  if (spec.tag != "irreducible_from_W" && spec.tag != "block_reducible" && spec.tag != "tensor" && spec.tag != "bose")
    bad("unknown tag \"" + spec.tag + "\"");
  if (doc.contains("dim")) spec.dim = static_cast<Index>(integer(doc, "dim", 1));
  if (doc.contains("blocks")) spec.blocks = static_cast<int>(integer(doc, "blocks", 1));
  if (doc.contains("m")) spec.m = static_cast<Index>(integer(doc, "m", 1));
  if (doc.contains("n")) spec.n = static_cast<Index>(integer(doc, "n", 1));
  if (doc.contains("beta")) spec.beta = positive_number(doc, "beta");
  if (doc.contains("seed")) spec.seed = seed_value(doc.at("seed"));
  if (spec.tag == "block_reducible" && spec.dim < spec.blocks) bad("\"dim\" must be at least \"blocks\"");
  return spec;
}

namespace {

constexpr int kGenerationAttempts = 16;

random::Engine attempt_engine(std::uint64_t seed, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt)};
  return random::Engine(seq);
}

int heisenberg_kernel(const LindbladModel& model) {
  return stationary_report(heisenberg_generator(model)).kernel_dimension;
}

}  // namespace

std::string generate(const RandomModelSpec& spec) {
  if (spec.tag == "irreducible_from_W" || spec.tag == "block_reducible") {
    const bool blocks = spec.tag == "block_reducible";
    std::vector<Index> dims;
    if (blocks)
      for (int b = 0; b < spec.blocks; ++b) dims.push_back(spec.dim / spec.blocks + (b < spec.dim % spec.blocks));
    const int target = blocks ? spec.blocks : 1;
    for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
      random::Engine rng = attempt_engine(spec.seed, attempt);
      const LindbladModel model =
          blocks ? random::block_reducible(dims, rng).model : random::irreducible_from_W(spec.dim, rng).model;
      if (heisenberg_kernel(model) == target) return dump(io::model_to_json(model));
    }
    raise(ErrorCode::GenerationFailed, "no model with kernel dimension " + std::to_string(target) + " after " +
                                           std::to_string(kGenerationAttempts) + " attempts");
  }
  random::Engine rng = attempt_engine(spec.seed, 0);
  if (spec.tag == "tensor") return dump(io::tensor_model_to_json(random::tensor(spec.m, spec.n, rng)));
  if (spec.tag == "bose") return dump(io::bose_model_to_json(random::bose(spec.dim, spec.beta, rng)));
  raise(ErrorCode::InvalidArgument, "unknown tag \"" + spec.tag + "\"");
}

}  // namespace lindblad::lab
