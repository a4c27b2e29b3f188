#include <iostream>

#include "qle/errors.h"
#include "qle/experiment.h"

int main(int argc, char** argv) {
  try {
    const qle::ExperimentConfig config = qle::parse_args(argc, argv);
    const qle::Report report = qle::run_experiment(config);
    return qle::write_report(config, report);
  } catch (const qle::HelpRequested& e) {
    std::cout << e.what();
    return 0;
  } catch (const qle::ConfigError& e) {
    std::cerr << "qle_run: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qle_run: " << e.what() << "\n";
    return 3;
  }
}
