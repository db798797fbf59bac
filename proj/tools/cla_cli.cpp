#include <string>
#include <vector>

#include "cla/cli.hpp"

int main(int argc, char** argv) {
  return cla::cli::run_command(std::vector<std::string>(argv, argv + argc));
}
