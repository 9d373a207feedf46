#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lindbladlab/lab.hpp"

using namespace lindblad;
using io::json;
namespace fs = std::filesystem;

namespace {

const fs::path kData = LINDBLADLAB_DATA_DIR;
const fs::path kConfigs = kData / "configs";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lindbladlab_lab_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int status;
  std::string out;
};

CliResult cli(const std::string& args) {
  const fs::path capture = fs::temp_directory_path() / "lindbladlab_lab_tests" / ("stdout_" + std::to_string(::getpid()) + ".txt");
  fs::create_directories(capture.parent_path());
  const std::string cmd = std::string("\"") + LINDBLADLAB_CLI + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(capture)};
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

lab::RunConfig shipped(lab::Mode mode, const std::string& file, const fs::path& out) {
  lab::RunConfig cfg = lab::load_config(mode, kConfigs / file);
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST(Config, ModesParseByName) {
  EXPECT_EQ(lab::parse_mode("verify"), lab::Mode::Verify);
  EXPECT_EQ(lab::parse_mode("spectrum"), lab::Mode::Spectrum);
  EXPECT_FALSE(lab::parse_mode("plot").has_value());
}

TEST(Config, ResolvesModelsRelativeToConfig) {
  const lab::RunConfig cfg = lab::load_config(lab::Mode::Verify, kConfigs / "verify.json");
  EXPECT_EQ(cfg.model_documents.size(), 4u);
  EXPECT_EQ(cfg.model_kinds[2], lab::ModelKind::Tensor);
  EXPECT_EQ(cfg.model_kinds[3], lab::ModelKind::Bose);
  EXPECT_EQ(cfg.gap_multiplier, 30.0);
}

TEST(Config, RejectsMalformedDocuments) {
  const fs::path base = kConfigs;
  auto parse = [&](const char* text, lab::Mode mode = lab::Mode::Stationary) {
    return code_of([&] { lab::parse_config(mode, json::parse(text), base); });
  };
  EXPECT_EQ(parse(R"({})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/missing.json"})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/two_level.json","models":["../models/two_level.json"]})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/bose_d2.json"})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/two_level.json","picture":"interaction"})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/two_level.json","tolerances":{"kernal":1e-9}})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/two_level.json","mode":"evolve"})"), ErrorCode::ParseError);
  EXPECT_EQ(parse(R"({"model":"../models/two_level.json"})", lab::Mode::Evolve), ErrorCode::ParseError);
}

TEST(Run, EvolveAtTimeZeroGivesInitialExpectation) {
  const fs::path out = fresh_dir("evolve0");
  lab::RunConfig cfg = shipped(lab::Mode::Evolve, "evolve.json", out);
  cfg.t_max = 0.0;
  cfg.quantities = {"expectation"};
  lab::run(cfg);
  // observable sigma_z in the state |0><0|
  EXPECT_EQ(slurp(out / "trajectory.csv"), "t, quantity, re, im\n0,expectation,1,0\n");
}

TEST(Run, EvolveConservationColumnStaysSmall) {
  const fs::path out = fresh_dir("evolve");
  lab::run(shipped(lab::Mode::Evolve, "evolve.json", out));
  std::ifstream in(out / "trajectory.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find("conservation_residual") == std::string::npos) continue;
    const auto pos = line.rfind(',');
    const auto prev = line.rfind(',', pos - 1);
    EXPECT_LT(std::abs(std::stod(line.substr(prev + 1, pos - prev - 1))), 1e-10) << line;
  }
  EXPECT_EQ(rows, 201 * 3);
}

TEST(Run, StationaryOnBlockModel) {
  const fs::path out = fresh_dir("stationary");
  lab::run(shipped(lab::Mode::Stationary, "stationary.json", out));
  const json rep = json::parse(slurp(out / "stationary.json"));
  EXPECT_EQ(rep.at("kernel_dimension"), 2);
  EXPECT_EQ(rep.at("gap_multiplier"), 30.0);
}

TEST(Run, SpectrumCsvShape) {
  const fs::path out = fresh_dir("spectrum");
  lab::run(shipped(lab::Mode::Spectrum, "spectrum.json", out));
  const std::string csv = slurp(out / "spectrum.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "re, im");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Run, MemoryWitnessAndAblation) {
  const fs::path out = fresh_dir("memory");
  lab::run(shipped(lab::Mode::Memory, "memory_witness.json", out));
  const json rep = json::parse(slurp(out / "memory.json"));
  EXPECT_GT(rep.at("witness").at("delta").get<double>(), 1e-3);
  EXPECT_TRUE(rep.at("diagnostics").contains("gap_multiplier"));
  EXPECT_LT(rep.at("diagnostics").at("route_difference").get<double>(), 1e-5);

  lab::run(shipped(lab::Mode::Memory, "memory_ablation.json", out));
  const json abl = json::parse(slurp(out / "memory.json"));
  EXPECT_LE(abl.at("witness").at("delta").get<double>(), 1e-8);
}

TEST(Run, BoseReport) {
  const fs::path out = fresh_dir("bose");
  lab::run(shipped(lab::Mode::Bose, "bose.json", out));
  const json rep = json::parse(slurp(out / "bose.json"));
  EXPECT_EQ(rep.at("path"), "dense");
  EXPECT_LE(rep.at("residual").get<double>(), std::max(rep.at("relative_tail_bound").get<double>(), 1e-8));
}

TEST(Run, VerifyShippedSetPasses) {
  const fs::path out = fresh_dir("verify");
  const lab::RunResult r = lab::run(shipped(lab::Mode::Verify, "verify.json", out));
  EXPECT_EQ(r.exit_code, 0);
  const json rep = json::parse(slurp(out / "verify.json"));
  EXPECT_TRUE(rep.at("pass").get<bool>());
}

TEST(Run, ModuleErrorsLeaveNoOutput) {
  const fs::path out = fresh_dir("error");
  lab::RunConfig cfg = shipped(lab::Mode::Evolve, "evolve.json", out);
  cfg.observable = ComplexMatrix::Identity(3, 3);
  EXPECT_EQ(code_of([&] { lab::run(cfg); }), ErrorCode::DimensionMismatch);
  EXPECT_TRUE(fs::is_empty(out));
}

TEST(Generate, DeterministicAndValid) {
  lab::RandomModelSpec spec;
  spec.tag = "irreducible_from_W";
  spec.dim = 3;
  spec.seed = 99;
  const std::string a = lab::generate(spec), b = lab::generate(spec);
  EXPECT_EQ(a, b);
  const LindbladModel m = io::model_from_json(json::parse(a));
  EXPECT_EQ(stationary_report(heisenberg_generator(m)).kernel_dimension, 1);
  spec.seed = 100;
  EXPECT_NE(lab::generate(spec), a);
}

TEST(Generate, BlockReducibleHasKernelPerBlock) {
  lab::RandomModelSpec spec;
  spec.tag = "block_reducible";
  spec.dim = 5;
  spec.blocks = 2;
  spec.seed = 3;
  const LindbladModel m = io::model_from_json(json::parse(lab::generate(spec)));
  EXPECT_EQ(stationary_report(heisenberg_generator(m)).kernel_dimension, 2);
}

TEST(Generate, TensorCommutesByConstruction) {
  lab::RandomModelSpec spec;
  spec.tag = "tensor";
  spec.m = 3;
  spec.n = 2;
  spec.seed = 4;
  const TensorModel tm = io::tensor_model_from_json(json::parse(lab::generate(spec)));
  EXPECT_LT(commutation_defect<double>(tm.w_tilde().matrix(), tm.h_tilde().matrix()), 1e-12);
}

TEST(Generate, SpecValidation) {
  EXPECT_EQ(code_of([] { lab::parse_random_spec(json::parse(R"({"tag":"chaotic"})")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { lab::parse_random_spec(json::parse(R"({"tag":"block_reducible","dim":1,"blocks":2})")); }),
            ErrorCode::ParseError);
  const lab::RandomModelSpec s = lab::parse_random_spec(json::parse(R"({"tag":"bose","dim":3,"beta":2.5,"seed":7})"));
  EXPECT_EQ(s.dim, 3);
  EXPECT_EQ(s.beta, 2.5);
  EXPECT_EQ(s.seed, 7u);
}

TEST(Threads, BudgetReadsEnvironment) {
  setenv("LINDBLADLAB_THREADS", "3", 1);
  EXPECT_EQ(lab::thread_budget(), 3u);
  setenv("LINDBLADLAB_THREADS", "zero", 1);
  EXPECT_GE(lab::thread_budget(), 1u);
  unsetenv("LINDBLADLAB_THREADS");
}

TEST(Cli, ExitCodesAndErrorObject) {
  const fs::path out = fresh_dir("cli");
  const CliResult ok = cli("stationary --config \"" + (kConfigs / "stationary.json").string() + "\" --out \"" +
                           out.string() + "\"");
  EXPECT_EQ(ok.status, 0) << ok.out;

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << "{\"model\": ";
  const CliResult parse = cli("stationary --config \"" + bad.string() + "\"");
  EXPECT_EQ(parse.status, 2);
  EXPECT_EQ(json::parse(parse.out).at("error"), "ParseError");

  const fs::path model = out / "nonhermitian.json";
  std::ofstream(model) << R"({"hamiltonian":{"rows":2,"cols":2,"data":[[0,0],[1,0],[0,0],[0,0]]},)"
                       << R"("lindblad_ops":[{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}]})";
  const fs::path cfg = out / "module_error.json";
  std::ofstream(cfg) << R"({"model":"nonhermitian.json"})";
  const CliResult module = cli("stationary --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"");
  EXPECT_EQ(module.status, 1);
  const json err = json::parse(module.out);
  EXPECT_EQ(err.at("error"), "InvariantViolation");
  EXPECT_TRUE(err.contains("detail"));
  EXPECT_FALSE(fs::exists(out / "stationary.json.tmp"));

  EXPECT_EQ(cli("").status, 2);
}

TEST(Cli, GenerateWritesIdenticalFiles) {
  const fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  const std::string cfg = (kConfigs / "generate_tensor.json").string();
  ASSERT_EQ(cli("generate --config \"" + cfg + "\" --seed 5 --out \"" + a.string() + "\"").status, 0);
  ASSERT_EQ(cli("generate --config \"" + cfg + "\" --seed 5 --out \"" + b.string() + "\"").status, 0);
  EXPECT_EQ(slurp(a / "tensor.json"), slurp(b / "tensor.json"));
}
