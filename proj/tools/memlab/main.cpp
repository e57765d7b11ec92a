#include <iostream>

#include "common.hpp"
#include "memlab/error.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kInternalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memlab: memory-game experiments, memorability studies and boosted-tree prediction"};
  app.set_version_flag("--version", "memlab 0.1.0");
  app.set_config("--config", "", "INI file of key=value defaults; [subcommand] sections; flags win");
  app.require_subcommand(1);
  memlab::cli::register_protocol_commands(app);
  memlab::cli::register_study_commands(app);
  memlab::cli::register_model_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  } catch (const memlab::Error& e) {
    std::cerr << "memlab: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "memlab: internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return 0;
}
