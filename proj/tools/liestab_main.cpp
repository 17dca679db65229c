#include <liestab/errors.hpp>
#include <liestab/pipeline.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv)
{
  CLI::App app{"Lie-algebraic stability certification for switched linear systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  double step = 0.0;

  const char* verbs[] = {"decompose", "simulate", "entropy", "certify"};
  const char* help[] = {
      "compute the generated algebra and its Levi-Malcev decomposition",
      "integrate the full and factored evolution operators for one signal",
      "estimate the topological entropy of the semi-simple flow",
      "run the full certification pipeline"};
  for (int i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(verbs[i], help[i]);
    sub->add_option("--config", config_path, "configuration document (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "root seed (overrides config)");
    sub->add_option("--step", step, "integration step (overrides config)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();

  liestab::RunConfig cfg;
  try {
    cfg = liestab::RunConfig::from_file(config_path);
    if (!out_dir.empty()) cfg.outputs = out_dir;
    if (seed >= 0) cfg.signal.seed = static_cast<std::uint64_t>(seed);
    if (step > 0.0) cfg.step = step;
  } catch (const liestab::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const int code = liestab::run_command(verb, cfg);
    if (code != 0) std::cerr << "error: " << verb << " failed, see report.json\n";
    return code;
  } catch (const liestab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
