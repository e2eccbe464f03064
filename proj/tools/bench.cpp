// Batch benchmark driver: builds the configured model problems, runs every
// (size x variant x preconditioner) combination and emits the report as an
// aligned table, CSV or JSON. Exit code 0 iff every solve converged.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "symamg/bench/presets.hpp"
#include "symamg/symamg.hpp"

namespace {

symamg::BenchConfig load_config(const std::string& arg) {
  if (std::filesystem::exists(arg)) return symamg::parse_config_file(arg);
  if (const symamg::Preset* p = symamg::find_preset(arg))
    return symamg::parse_config_string(p->text);
  throw std::runtime_error("no such config file or preset: " + arg);
}

void emit(const std::vector<symamg::ReportRow>& rows, const std::string& format,
          std::ostream& os) {
  if (format == "csv")
    symamg::emit_csv(rows, os);
  else if (format == "json")
    symamg::emit_json(rows, os);
  else
    symamg::emit_table(rows, os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse preconditioner benchmarks on symmetric model problems"};
  app.require_subcommand(1);

  std::string config_arg;
  std::string format = "table";
  std::string out_path;
  int threads = 0;
  bool full = false;
  bool verbose = false;

  CLI::App* run = app.add_subcommand("run", "Run the sweep described by a config file or preset");
  run->add_option("config", config_arg, "key=value config file path, or a built-in preset name")
      ->required();
  run->add_flag("--full", full, "extend mirrored sweeps with the 64-cell axis");
  run->add_option("--threads", threads, "kernel thread count (0 keeps the runtime default)");
  run->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  run->add_option("--out", out_path, "write the report to this file instead of stdout");
  run->add_flag("--verbose,-v", verbose, "log hierarchy details to stderr");

  CLI::App* list = app.add_subcommand("list", "List the built-in presets");

  std::string export_dir = ".";
  CLI::App* exp = app.add_subcommand("export", "Write the built-in presets as config files");
  exp->add_option("--dir", export_dir, "target directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& p : symamg::builtin_presets()) std::cout << p.name << "\n";
      return 0;
    }
    if (exp->parsed()) {
      std::filesystem::create_directories(export_dir);
      for (const auto& p : symamg::builtin_presets()) {
        const auto path = std::filesystem::path(export_dir) / (std::string(p.name) + ".cfg");
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << p.text;
        std::cout << path.string() << "\n";
      }
      return 0;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    if (threads > 1) std::cerr << "built without thread support; --threads ignored\n";
#endif

    symamg::BenchConfig cfg = load_config(config_arg);
    if (full && cfg.problem == "mirrored" &&
        std::find(cfg.sizes.begin(), cfg.sizes.end(), 64) == cfg.sizes.end())
      cfg.sizes.push_back(64);

    const auto rows = symamg::run_bench(cfg, std::cerr, verbose);

    if (out_path.empty()) {
      emit(rows, format, std::cout);
    } else {
      std::ofstream f(out_path);
      if (!f) throw std::runtime_error("cannot write " + out_path);
      emit(rows, format, f);
      std::cerr << "report written to " << out_path << "\n";
    }

    const bool ok = symamg::all_converged(rows);
    std::cerr << rows.size() << " rows, " << (ok ? "all converged" : "with failures") << "\n";
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
