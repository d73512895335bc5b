// rsw: command-line front end for the regime-switching ergodicity experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rsw/commands.hpp"
#include "rsw/parallel.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rsw::ConfigError("--out", 0, "cannot write " + path.string());
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodicity experiments for path-dependent SDEs with Markov switching"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = rsw::default_workers();
  std::string out_dir;
  std::string format = "json";
  app.add_option("--config", config_path, "Run configuration (YAML or JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed; overrides the config");
  app.add_option("--workers", workers, "Worker threads (default: RSW_WORKERS or hardware concurrency)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Directory for reports and tables; overrides the config");
  app.add_option("--format", format, "Standard output format")->check(CLI::IsMember({"json", "csv"}));
  for (const auto& name : rsw::command_names()) app.add_subcommand(name, "Run " + name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rsw::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  rsw::CommandResult result;
  rsw::RunConfig cfg;
  try {
    cfg = rsw::load_config(config_path);
    if (seed) cfg.seed = *seed;
    result = rsw::run_command(command, cfg, {workers});
  } catch (const rsw::Error& e) {
    result.report = rsw::error_report(command, e);
    result.exit_code = rsw::exit_code_for(e);
  }

  const std::string report = result.report.dump(2) + "\n";
  if (result.report.contains("error")) std::cerr << "rsw " << command << ": " << result.report["error"]["message"].get<std::string>() << "\n";

  const std::string dir = out_dir.empty() ? cfg.output : out_dir;
  if (!dir.empty()) {
    try {
      std::filesystem::create_directories(dir);
      write_file(std::filesystem::path(dir) / (command + ".json"), report);
      for (const auto& f : result.files) write_file(std::filesystem::path(dir) / f.name, f.content);
    } catch (const std::exception& e) {
      std::cerr << "rsw " << command << ": " << e.what() << "\n";
      return rsw::kExitConfig;
    }
  }
  if (format == "csv" && !result.table.empty()) {
    std::cout << result.table;
  } else {
    std::cout << report;
  }
  return result.exit_code;
}
