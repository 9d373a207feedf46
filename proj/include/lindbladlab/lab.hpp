#pragma once

// Configuration-driven runs behind the lindbladlab command line.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lindbladlab/io.hpp"

namespace lindblad::lab {

enum class Mode { Evolve, Stationary, Memory, Bose, Spectrum, Verify };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

inline constexpr double kDefaultGapMultiplier = 30.0;

enum class ModelKind { Lindblad, Tensor, Bose };

/// Classifies a model document by its keys; ParseError if none match.
ModelKind classify_model(const io::json& doc);

struct WitnessStates {
  ComplexMatrix rho_a;
  ComplexMatrix rho_b;
};

/// Parsed run configuration. Referenced model files are read while parsing,
/// so a RunConfig always refers to readable JSON models.
struct RunConfig {
  Mode mode = Mode::Verify;
  std::vector<std::string> model_names;  // as written in the config
  std::vector<io::json> model_documents;
  std::vector<ModelKind> model_kinds;
  Tolerances tolerances;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";

  // time grid: t_max/steps, or gap_multiplier / gap
  std::optional<double> t_max;
  std::size_t steps = 100;
  double gap_multiplier = kDefaultGapMultiplier;

  Picture picture = Picture::Heisenberg;
  Method method = Method::Exponential;
  std::optional<ComplexMatrix> observable;
  std::optional<ComplexMatrix> initial_state;
  std::vector<std::string> quantities{"expectation"};

  cdouble kappa = kKappaI;
  std::optional<double> horizon;
  double step = 0.0;
  std::optional<WitnessStates> witness;

  int j_max = 40;
  FockPath fock_path = FockPath::Auto;
  bool include_vacuum = true;
};

/// Raises ParseError on malformed configs or unreadable model files. Relative
/// model paths resolve against base_dir.
RunConfig parse_config(Mode mode, const io::json& document, const std::filesystem::path& base_dir);
RunConfig load_config(Mode mode, const std::filesystem::path& path);

struct RunResult {
  int exit_code = 0;  // 0 ok, 3 verification checks failed
  std::vector<std::filesystem::path> outputs;
  io::json summary;
};

/// Executes the run and writes its artifacts under config.out_dir. Module
/// failures propagate as lindblad::Error; nothing is written in that case.
RunResult run(const RunConfig& config);

struct RandomModelSpec {
  std::string tag;  // irreducible_from_W | block_reducible | tensor | bose
  Index dim = 2;
  int blocks = 2;
  Index m = 2;
  Index n = 2;
  double beta = 1.0;
  std::uint64_t seed = 0;
};

RandomModelSpec parse_random_spec(const io::json& document);

/// Serialized model for the spec. Deterministic in the seed; irreducible
/// models are regenerated with sub-seeds until the Heisenberg kernel is
/// one-dimensional (at most 16 attempts, then GenerationFailed).
std::string generate(const RandomModelSpec& spec);

/// Worker count for fan-out: LINDBLADLAB_THREADS if set, else hardware concurrency.
unsigned thread_budget();

}  // namespace lindblad::lab
