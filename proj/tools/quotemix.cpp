#include <csignal>
#include <iostream>

#include "quotemix/cli.hpp"

namespace {

void on_interrupt(int) { quotemix::request_stop(); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  return quotemix::run_cli(argc, argv, std::cout, std::cerr);
}
