#pragma once

// File formats. Matrices are {"rows": R, "cols": C, "data": [[re, im], ...]}
// in row-major order; every model and report builds on that.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lindbladlab/bose.hpp"
#include "lindbladlab/lindblad.hpp"
#include "lindbladlab/memory.hpp"

namespace lindblad::io {

using json = nlohmann::ordered_json;

json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

json complex_to_json(cdouble z);

/// {"hamiltonian": <matrix>, "lindblad_ops": [<matrix>, ...]}
json model_to_json(const LindbladModel& model);
LindbladModel model_from_json(const json& j, const Tolerances& tol = {});

/// {"v_tilde": ..., "h_tilde": ..., "h_internal": ..., "m": int, "n": int}
json tensor_model_to_json(const TensorModel& tm);
TensorModel tensor_model_from_json(const json& j, const Tolerances& tol = {});

/// {"hamiltonian": <matrix>, "beta": real}
json bose_model_to_json(const BoseModel& model);
BoseModel bose_model_from_json(const json& j);

json stationary_report_to_json(const StationaryReport& report);
json memory_report_to_json(const MemoryReport& report);
json witness_to_json(const WitnessResult& witness);
json bose_report_to_json(const BoseReport& report);

/// Shortest form that keeps 17 significant digits, '.' decimal separator.
std::string format_real(double x);

struct TrajectoryRow {
  double t;
  std::string quantity;  // expectation | trace | conservation_residual
  cdouble value;
};

/// CSV with header "t, quantity, re, im".
std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);

json read_json_file(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace lindblad::io
