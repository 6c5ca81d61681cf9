// Simulates a scenario, estimates range per window and prints the error
// summary, all in memory.
//
//   drive_by_sample scenarios/pass_20_60m_20kmh.cfg config/pipeline.cfg

#include <chrono>
#include <iostream>

#include "evrange/evrange.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: " << argv[0] << " <scenario.cfg> <pipeline.cfg> [report.csv]\n";
    return 2;
  }
  try {
    const auto scenario = evrange::ScenarioConfig::from(evrange::KeyValueConfig::load(argv[1]));
    const auto pipeline = evrange::PipelineConfig::from(evrange::KeyValueConfig::load(argv[2]));

    const auto t0 = std::chrono::steady_clock::now();
    const evrange::Scenario sim = evrange::generate(scenario);
    const auto t1 = std::chrono::steady_clock::now();
    const auto estimates = evrange::estimate_stream(sim.stream, pipeline);
    const auto t2 = std::chrono::steady_clock::now();

    const auto report = evrange::evaluate(estimates, sim.truth.windows, 0.5);
    std::cout << "events: " << sim.stream.events.size() << "\n"
              << "generate s: " << std::chrono::duration<double>(t1 - t0).count() << "\n"
              << "estimate s: " << std::chrono::duration<double>(t2 - t1).count() << "\n";
    evrange::print_summary(std::cout, report);
    if (argc > 3) evrange::write_report_csv(argv[3], report);
  } catch (const evrange::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
