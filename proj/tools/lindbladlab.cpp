#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lindbladlab/lab.hpp"

namespace fs = std::filesystem;
using lindblad::Error;
using lindblad::ErrorCode;
namespace lab = lindblad::lab;
namespace io = lindblad::io;

namespace {

int report_error(const Error& e) {
  std::cout << io::json{{"error", std::string(lindblad::to_string(e.code()))}, {"detail", e.detail()}}.dump() << '\n';
  return e.code() == ErrorCode::ParseError ? 2 : 1;
}

int run_mode(lab::Mode mode, const fs::path& config_path, std::optional<std::uint64_t> seed,
             std::optional<fs::path> out) {
  lab::RunConfig cfg;
  try {
    cfg = lab::load_config(mode, config_path);
  } catch (const Error& e) {
    report_error(e);
    return 2;
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  try {
    const lab::RunResult result = lab::run(cfg);
    std::cout << result.summary.dump() << '\n';
    return result.exit_code;
  } catch (const Error& e) {
    report_error(e);
    return 1;
  }
}

int run_generate(const fs::path& config_path, std::optional<std::uint64_t> seed, std::optional<fs::path> out) {
  lab::RandomModelSpec spec;
  std::string name;
  try {
    const io::json doc = io::read_json_file(config_path);
    spec = lab::parse_random_spec(doc);
    name = doc.contains("output") && doc.at("output").is_string() ? doc.at("output").get<std::string>()
                                                                   : spec.tag + ".json";
  } catch (const Error& e) {
    report_error(e);
    return 2;
  }
  if (seed) spec.seed = *seed;
  const fs::path dir = out ? *out : fs::path(".");
  try {
    const std::string content = lab::generate(spec);
    fs::create_directories(dir);
    io::atomic_write(dir / name, content);
    std::cout << io::json{{"mode", "generate"}, {"tag", spec.tag}, {"output", (dir / name).string()}}.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    report_error(e);
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lindblad dynamics laboratory"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  const char* modes[] = {"evolve", "stationary", "memory", "bose", "spectrum", "verify", "generate"};
  for (const char* name : modes) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--seed", seed, "64-bit seed overriding the config");
    sub->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string mode = app.get_subcommands().front()->get_name();
  const std::optional<fs::path> out_dir = out ? std::optional<fs::path>(*out) : std::nullopt;
  if (mode == "generate") return run_generate(config, seed, out_dir);
  return run_mode(*lab::parse_mode(mode), config, seed, out_dir);
}
