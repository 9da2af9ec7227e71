// ddlab command-line entry point.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "ddlab/config.hpp"
#include "ddlab/error.hpp"
#include "ddlab/io.hpp"
#include "ddlab/run.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "run configuration file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory (default: $DDLAB_OUT_DIR or ./out)");
  sub->add_option("--workers", o.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusive-dispersive regularization laboratory"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"simulate", "sweep", "verify-estimates", "riemann", "gamma"})
    add_common(app.add_subcommand(name, std::string("run the ") + name + " mode"), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  ddlab::RunContext ctx;
  if (!opt.out.empty()) {
    ctx.out_dir = opt.out;
  } else if (const char* env = std::getenv("DDLAB_OUT_DIR"); env && *env) {
    ctx.out_dir = env;
  }
  ctx.workers = opt.workers;

  try {
    ctx.config_text = ddlab::read_file(opt.config);
    const ddlab::RunConfig cfg =
        ddlab::parse_config(ctx.config_text, std::filesystem::path(opt.config).parent_path());
    if (ddlab::to_string(cfg.mode) != sub) {
      std::cerr << "error: config mode '" << ddlab::to_string(cfg.mode) << "' does not match subcommand '"
                << sub << "'\n";
      return 2;
    }
    const ddlab::RunOutcome res = ddlab::run(cfg, ctx);
    (res.status == ddlab::ExitStatus::ok ? std::cout : std::cerr) << res.message << "\n";
    return static_cast<int>(res.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
