#include <iostream>

#include "fdcache/experiment.hpp"

int main(int argc, char** argv) {
  fdcache::ExperimentSpec spec;
  try {
    spec = fdcache::parse_args(argc, argv);
  } catch (const fdcache::HelpRequested& help) {
    std::cout << help.what();
    return fdcache::kExitOk;
  } catch (const fdcache::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return fdcache::kExitUsage;
  }
  return fdcache::run(spec, std::cout, std::cerr);
}
