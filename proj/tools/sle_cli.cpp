#include "sle_cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sle::cli::run(std::move(args));
}
