#include "optreg/cli/app.hpp"

int main(int argc, char** argv) {
  return optreg::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
