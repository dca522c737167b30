// Connects a bundled planner to a running benchmark server.
#include <CLI11.hpp>

#include <iostream>

#include "socnav/policies.hpp"
#include "socnav/server.hpp"
#include "socnav/transport.hpp"

using namespace socnav;

int main(int argc, char** argv) {
  CLI::App app{"Drive a benchmark server with a bundled planner"};
  std::string address = "127.0.0.1:6400";
  std::string planner = "baseline";
  double connect_timeout = 10.0;
  app.add_option("--connect", address, "HOST:PORT or unix:PATH");
  app.add_option("--planner", planner)->check(CLI::IsMember({"social-forces", "orca", "baseline"}));
  app.add_option("--connect-timeout", connect_timeout);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    auto policy = make_policy(planner);
    Connection conn = connect_to(parse_address(address), connect_timeout);
    ClientOptions opts;
    opts.agent = planner;
    for (const auto& o : run_policy_client(conn, *policy, opts)) {
      std::cout << o.episode << " " << to_string(o.termination.kind) << (o.termination.success ? " success" : "")
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
