#include "lindbladlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lindblad::io {

namespace {

[[noreturn]] void parse_error(const std::string& detail) { raise(ErrorCode::ParseError, detail); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_error(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

Index integer_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    parse_error(std::string("field \"") + key + "\" must be a positive integer");
  return static_cast<Index>(v.get<long long>());
}

}  // namespace

json matrix_to_json(const ComplexMatrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = 0; k < m.cols(); ++k) data.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ComplexMatrix matrix_from_json(const json& j) {
  const Index rows = integer_field(j, "rows");
  const Index cols = integer_field(j, "cols");
  const json& data = field(j, "data");
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols)
    parse_error("matrix data length does not equal rows * cols");
  ComplexMatrix m(rows, cols);
  for (Index idx = 0; idx < rows * cols; ++idx) {
    const json& entry = data[static_cast<std::size_t>(idx)];
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
      parse_error("matrix entries must be [re, im] pairs");
    m(idx / cols, idx % cols) = cdouble(entry[0].get<double>(), entry[1].get<double>());
  }
  if (!all_finite(m)) parse_error("matrix has non-finite entries");
  return m;
}

json complex_to_json(cdouble z) { return json::array({z.real(), z.imag()}); }

json model_to_json(const LindbladModel& model) {
  json ops = json::array();
  for (const auto& v : model.lindblad_ops()) ops.push_back(matrix_to_json(v));
  return json{{"hamiltonian", matrix_to_json(model.hamiltonian().matrix())}, {"lindblad_ops", std::move(ops)}};
}

LindbladModel model_from_json(const json& j, const Tolerances& tol) {
  HermitianMatrix h(matrix_from_json(field(j, "hamiltonian")), tol);
  const json& ops = field(j, "lindblad_ops");
  if (!ops.is_array() || ops.empty()) parse_error("\"lindblad_ops\" must be a non-empty array");
  std::vector<ComplexMatrix> vs;
  for (const auto& v : ops) vs.push_back(matrix_from_json(v));
  return LindbladModel(std::move(h), std::move(vs), tol);
}

json tensor_model_to_json(const TensorModel& tm) {
  return json{{"v_tilde", matrix_to_json(tm.v_tilde())},
              {"h_tilde", matrix_to_json(tm.h_tilde().matrix())},
              {"h_internal", matrix_to_json(tm.h_internal().matrix())},
              {"m", tm.m()},
              {"n", tm.n()}};
}

TensorModel tensor_model_from_json(const json& j, const Tolerances& tol) {
  TensorModel tm(matrix_from_json(field(j, "v_tilde")), HermitianMatrix(matrix_from_json(field(j, "h_tilde")), tol),
                 HermitianMatrix(matrix_from_json(field(j, "h_internal")), tol), tol);
  if (integer_field(j, "m") != tm.m() || integer_field(j, "n") != tm.n())
    parse_error("\"m\"/\"n\" disagree with the matrix dimensions");
  return tm;
}

json bose_model_to_json(const BoseModel& model) {
  return json{{"hamiltonian", matrix_to_json(model.hamiltonian().matrix())}, {"beta", model.beta()}};
}

BoseModel bose_model_from_json(const json& j) {
  const json& beta = field(j, "beta");
  if (!beta.is_number()) parse_error("\"beta\" must be a number");
  return BoseModel(HermitianMatrix(matrix_from_json(field(j, "hamiltonian"))), beta.get<double>());
}

json stationary_report_to_json(const StationaryReport& report) {
  json basis = json::array();
  for (const auto& k : report.kernel_basis) basis.push_back(matrix_to_json(k));
  return json{{"picture", std::string(to_string(report.picture))},
              {"kernel_dimension", report.kernel_dimension},
              {"kernel_basis", std::move(basis)},
              {"spectral_gap", report.spectral_gap},
              {"reducible", report.reducible}};
}

json memory_report_to_json(const MemoryReport& report) {
  return json{{"b_infinity", matrix_to_json(report.b_infinity)},
              {"memory_integral_value", matrix_to_json(report.memory_integral_value)},
              {"static_term", matrix_to_json(report.static_term)},
              {"direct_b", matrix_to_json(report.direct_b)},
              {"residual_off_block", report.residual_off_block},
              {"kappa", complex_to_json(report.kappa)},
              {"diagnostics",
               {{"horizon", report.horizon},
                {"step", report.step},
                {"steps", report.steps},
                {"route_difference", report.route_difference},
                {"drift", report.drift},
                {"quadrature_error", report.quadrature_error}}}};
}

json witness_to_json(const WitnessResult& witness) {
  return json{{"delta", witness.delta},
              {"expectation_a", complex_to_json(witness.expectation_a)},
              {"expectation_b", complex_to_json(witness.expectation_b)},
              {"drift_a", witness.drift_a},
              {"drift_b", witness.drift_b},
              {"certified", witness.certified}};
}

json bose_report_to_json(const BoseReport& report) {
  json sectors = json::array();
  for (std::size_t j = 0; j < report.sector_traces.size(); ++j)
    sectors.push_back(json{{"J", j},
                           {"trace", report.sector_traces[j]},
                           {"numerator", complex_to_json(report.sector_numerators[j])}});
  return json{{"analytic_expectation", complex_to_json(report.analytic_expectation)},
              {"fock_ratio", complex_to_json(report.fock_ratio)},
              {"nbar", report.nbar},
              {"J_max", report.j_max},
              {"tail_bound", report.tail_bound},
              {"path", std::string(to_string(report.path))},
              {"sectors", std::move(sectors)}};
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out = "t, quantity, re, im\n";
  for (const auto& row : rows) {
    out += format_real(row.t);
    out += ',';
    out += row.quantity;
    out += ',';
    out += format_real(row.value.real());
    out += ',';
    out += format_real(row.value.imag());
    out += '\n';
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    if (!out) raise(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lindblad::io
