#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "mfbel/experiment.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

mfbel::RunConfig load(const std::string& path, const Overrides& o) {
  const mfbel::ParsedConfig parsed = mfbel::load_config(path);
  for (const auto& note : parsed.notes) std::cerr << "note: " << note << '\n';
  mfbel::RunConfig config = parsed.config;
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output = *o.out;
  if (o.threads) config.threads = *o.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field SDE sensitivities via Malliavin weights"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", overrides.seed, "override the config seed");
    sub->add_option("--out", overrides.out, "output directory (overrides 'output')");
    sub->add_option("--threads", overrides.threads, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "estimate deltas and write estimates.csv / trace.csv");
  add_common(run);
  CLI::App* meanfield = app.add_subcommand("meanfield", "compare analytic and particle law curves");
  add_common(meanfield);

  CLI::App* validate = app.add_subcommand("validate", "run the invariant and oracle checks");
  std::string level = "fast";
  std::string fault;
  validate->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  validate->add_option("--seed", overrides.seed, "seed for every check");
  validate->add_option("--threads", overrides.threads, "worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--inject-fault", fault, "scale one partial by 1.01, e.g. mean_vol.d1_sigma");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return mfbel::cmd_run(load(config_path, overrides), std::cout, std::cerr);
    if (*meanfield) return mfbel::cmd_meanfield(load(config_path, overrides), std::cout, std::cerr);
    mfbel::ValidationOptions options;
    options.level = mfbel::parse_validation_level(level);
    options.seed = overrides.seed.value_or(1);
    options.threads = overrides.threads.value_or(std::max(1u, std::thread::hardware_concurrency()));
    options.inject_fault = fault;
    return mfbel::cmd_validate(options, std::cout);
  } catch (const mfbel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == mfbel::ErrorCode::config_parse ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
