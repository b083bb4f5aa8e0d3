// Command-line front end: spectrum, stability, critical, bifurcate, trace, sweep.
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cmc/cli.hpp"
#include "cmc/errors.hpp"
#include "cmc/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stability spectra and bifurcation branches of CMC cylinders"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format;
  int threads = 0;

  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--format", format, "table format (overrides output.format)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "sweep workers; CMC_BIFURCATE_THREADS otherwise")
      ->check(CLI::PositiveNumber);

  for (const char* name : {"spectrum", "stability", "critical", "bifurcate", "trace", "sweep"}) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  cmc::RunConfig rc;
  try {
    rc = cmc::load_run_config(config_path);
  } catch (const cmc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cmc::exit_code_for(e.code());
  }
  if (!out_dir.empty()) rc.output.dir = out_dir;
  if (!format.empty()) rc.output.format = format;

  const std::string name = app.get_subcommands().front()->get_name();
  return cmc::run_command(name, rc, rc.output.dir, rc.output.format,
                          cmc::resolve_threads(threads), std::cout, std::cerr);
}
