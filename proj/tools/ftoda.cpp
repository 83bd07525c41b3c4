#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ftoda/cli.hpp"
#include "ftoda/errors.hpp"

namespace {

constexpr const char* kConventions =
    "Derivatives follow d_minus = d/dz and d_plus = d/dzbar (the reverse of the\n"
    "usual subscript reading). Exit codes: 0 all checks passed, 1 a check failed\n"
    "or a point failed, 2 configuration error. FTODA_THREADS sets the worker count.";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frenet frames of holomorphic curves and nonabelian Toda systems"};
  app.footer(kConventions);
  std::string mode, config_path, out_path, format = "json";
  app.add_option("mode", mode, "Pipeline to run")
      ->required()
      ->check(CLI::IsMember(ftoda::cli::modes()));
  app.add_option("--config", config_path, "JSON job configuration")->required();
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  CLI11_PARSE(app, argc, argv);

  ftoda::cli::Report report;
  try {
    std::ifstream in(config_path);
    if (!in) throw ftoda::ConfigError("<file>", "cannot open " + config_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ftoda::ConfigError("<file>", e.what());
    }
    const auto config = ftoda::cli::parse_config(doc, mode);
    report = ftoda::cli::run(config, ftoda::cli::threads_from_env());
  } catch (const ftoda::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string text =
      format == "csv" ? ftoda::cli::to_csv(report) : ftoda::cli::to_json(report).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!(out << text)) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
  }
  return ftoda::cli::exit_code(report);
}
