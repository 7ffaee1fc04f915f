// wvpath: run one scenario from a JSON config, or list the available kinds.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "wvpath/scenario.hpp"

namespace {

int print_list(bool as_json) {
  const auto kinds = wvpath::list_scenarios();
  if (as_json) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : kinds) out.push_back({{"kind", k.kind}, {"description", k.description}, {"example", k.example}});
    std::cout << out.dump(2) << '\n';
    return wvpath::exit_ok;
  }
  for (const auto& k : kinds) std::printf("%-20s %s\n", k.kind.c_str(), k.description.c_str());
  return wvpath::exit_ok;
}

int print_example(const std::string& kind) {
  for (const auto& k : wvpath::list_scenarios()) {
    if (k.kind == kind) {
      std::cout << k.example.dump(2) << '\n';
      return wvpath::exit_ok;
    }
  }
  std::cerr << "error: scenario: unknown scenario kind '" << kind << "'\n";
  return wvpath::exit_validation;
}

int run_config(const std::string& path, const wvpath::RunOverrides& overrides) {
  wvpath::ScenarioConfig config;
  try {
    config = wvpath::load_config(path, overrides);
  } catch (const wvpath::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wvpath::exit_validation;
  }
  const wvpath::RunResult r = wvpath::run(config);
  for (const auto& c : r.checks)
    std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  if (r.exit_code != wvpath::exit_ok) std::cerr << "error: " << r.message << '\n';
  std::printf("%s: %zu files in %s\n", config.kind.c_str(), r.files.size(), config.output_dir.string().c_str());
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak values, path sums and favored paths"};
  app.set_version_flag("--version", wvpath::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string format;
  auto* run = app.add_subcommand("run", "Run the scenario described by a JSON config");
  run->add_option("config", config_path, "Scenario config file")->required();
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Seed for every random draw (overrides seed)");
  auto* format_opt =
      run->add_option("--format", format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}));

  bool as_json = false;
  auto* list = app.add_subcommand("list", "List scenario kinds");
  list->add_flag("--json", as_json, "Print kinds with example configs as JSON");

  std::string kind;
  auto* example = app.add_subcommand("example", "Print the example config of a scenario kind");
  example->add_option("kind", kind, "Scenario kind")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? wvpath::exit_ok : wvpath::exit_validation;
  }

  if (*list) return print_list(as_json);
  if (*example) return print_example(kind);

  wvpath::RunOverrides overrides;
  if (*out_opt) overrides.output_dir = out_dir;
  if (*seed_opt) overrides.seed = seed;
  if (*format_opt) overrides.format = format;
  return run_config(config_path, overrides);
}
