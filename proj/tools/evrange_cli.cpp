// evrange: estimate, simulate, evaluate.
//
// Exit codes: 0 ok, 2 usage/config error, 3 input error, 4 no valid windows.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "evrange/evrange.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitNoValid = 4;

int exit_code_for(const evrange::Error& e) {
  return e.kind() == evrange::ErrorKind::Config ? kExitConfig : kExitInput;
}

evrange::EventFormat parse_format(const std::string& name, const std::filesystem::path& path) {
  if (name == "csv") return evrange::EventFormat::Csv;
  if (name == "bin") return evrange::EventFormat::Bin;
  return evrange::format_from_path(path);
}

int run_estimate(const std::string& input, const std::string& config, const std::string& output,
                 const std::string& format, bool lenient) {
  evrange::PipelineConfig cfg;
  try {
    cfg = evrange::PipelineConfig::from(evrange::KeyValueConfig::load(config));
  } catch (const evrange::Error& e) {
    std::cerr << "evrange estimate: " << e.what() << '\n';
    return kExitConfig;
  }

  std::vector<evrange::RangeEstimate> estimates;
  try {
    evrange::EventReader reader(input, parse_format(format, input), cfg.sensor,
                                lenient ? evrange::BoundsPolicy::Lenient : evrange::BoundsPolicy::Strict);
    cfg.sensor = reader.geometry();
    evrange::RangeEstimator estimator(cfg);
    std::vector<evrange::Event> batch;
    for (;;) {
      batch.clear();
      if (!reader.read_batch(batch, 1 << 18)) break;
      estimator.push(batch);
    }
    estimates = estimator.finish();
    if (reader.skipped() > 0) {
      std::cerr << "evrange estimate: skipped " << reader.skipped() << " out-of-bounds events\n";
    }
  } catch (const evrange::Error& e) {
    std::cerr << "evrange estimate: " << e.what() << '\n';
    return exit_code_for(e);
  }

  try {
    evrange::write_estimates_csv(output, estimates);
  } catch (const evrange::Error& e) {
    std::cerr << "evrange estimate: " << e.what() << '\n';
    return kExitInput;
  }

  std::size_t valid = 0;
  for (const auto& e : estimates) valid += e.valid ? 1 : 0;
  std::cerr << "evrange estimate: " << estimates.size() << " windows, " << valid << " valid\n";
  return valid == 0 ? kExitNoValid : kExitOk;
}

int run_simulate(const std::string& config, const std::string& prefix, const std::string& format) {
  evrange::ScenarioConfig scenario;
  try {
    scenario = evrange::ScenarioConfig::from(evrange::KeyValueConfig::load(config));
  } catch (const evrange::Error& e) {
    std::cerr << "evrange simulate: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const evrange::Scenario sim = evrange::generate(scenario);
    const bool csv = format == "csv";
    const std::string events_path = prefix + (csv ? ".csv" : ".bin");
    const std::string truth_path = prefix + "_truth.csv";
    evrange::write_events(sim.stream, events_path, csv ? evrange::EventFormat::Csv : evrange::EventFormat::Bin);
    evrange::write_truth_csv(truth_path, sim.truth);
    std::cerr << "evrange simulate: " << sim.stream.events.size() << " events -> " << events_path << ", "
              << sim.truth.windows.size() << " windows -> " << truth_path << '\n';
  } catch (const evrange::Error& e) {
    std::cerr << "evrange simulate: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}

int run_evaluate(const std::string& estimates_path, const std::string& truth_path, double threshold,
                 const std::string& output) {
  try {
    const auto estimates = evrange::read_estimates_csv(estimates_path);
    const auto truth = evrange::read_truth_csv(truth_path);
    const evrange::ErrorReport report = evrange::evaluate(estimates, truth, threshold);
    evrange::print_summary(std::cout, report);
    if (!output.empty()) evrange::write_report_csv(output, report);
  } catch (const evrange::Error& e) {
    std::cerr << "evrange evaluate: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera LED-bar range estimation"};
  app.require_subcommand(1);

  std::string input, config, output, format = "auto", truth;
  bool strict = false, lenient = false;
  double threshold = 0.5;

  auto* estimate = app.add_subcommand("estimate", "Estimate range per window from an event recording");
  estimate->add_option("--input,-i", input, "Event file (.bin or .csv)")->required();
  estimate->add_option("--config,-c", config, "Pipeline config (key = value)")->required();
  estimate->add_option("--output,-o", output, "Range estimate CSV")->required();
  estimate->add_option("--format", format, "Input format: auto|bin|csv")->check(CLI::IsMember({"auto", "bin", "csv"}));
  auto* strict_flag = estimate->add_flag("--strict", strict, "Reject out-of-bounds events (default)");
  estimate->add_flag("--lenient", lenient, "Skip and count out-of-bounds events")->excludes(strict_flag);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic drive-by recording and ground truth");
  simulate->add_option("--config,-c", config, "Scenario config (key = value)")->required();
  simulate->add_option("--output,-o", output, "Output prefix; writes <prefix>.bin and <prefix>_truth.csv")->required();
  simulate->add_option("--format", format, "Event format: auto|bin|csv")->check(CLI::IsMember({"auto", "bin", "csv"}));

  auto* evaluate = app.add_subcommand("evaluate", "Compare range estimates with ground truth");
  evaluate->add_option("--input,-i", input, "Range estimate CSV")->required();
  evaluate->add_option("--truth,-t", truth, "Ground-truth CSV")->required();
  evaluate->add_option("--threshold-m", threshold, "Error threshold in meters")->check(CLI::NonNegativeNumber);
  evaluate->add_option("--output,-o", output, "Per-window error table CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*estimate) return run_estimate(input, config, output, format, lenient);
  if (*simulate) return run_simulate(config, output, format);
  return run_evaluate(input, truth, threshold, output);
}
