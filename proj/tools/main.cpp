// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli_util.hpp"
#include "commands.hpp"

namespace {

// PANOPS_THREADS: worker count, 0 = all cores. Unset means single-threaded.
void apply_thread_env() {
  const char* env = std::getenv("PANOPS_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) throw panops::cli::UsageError("PANOPS_THREADS must be a non-negative integer");
  panops_set_num_threads(static_cast<std::size_t>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panops: deformable aggregation, salience, panorama geometry and open-vocabulary metrics"};
  app.name("panops");
  app.set_version_flag("--version", std::string(panops_version()));
  app.require_subcommand(1);
  panops::cli::register_commands(app);

  try {
    apply_thread_env();
    if (argc > 1 && argv[1][0] != '-') {
      bool known = false;
      for (const auto* sub : app.get_subcommands({})) known = known || sub->get_name() == argv[1];
      if (!known) throw panops::cli::UsageError(std::string("unknown subcommand '") + argv[1] + "'");
    }
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << panops_version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "panops: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const panops::cli::UsageError& e) {
    std::cerr << "panops: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const panops::cli::DataError& e) {
    std::cerr << "panops: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "panops: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
