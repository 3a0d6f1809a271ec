#include <CLI11.hpp>

#include "sslp/cli.hpp"
#include "sslp/core/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"self-supervised pretraining with shape priors"};
  app.set_version_flag("--version", sslp::kVersion);
  app.require_subcommand(1);

  sslp::cli::Command cmd;
  const std::vector<std::string> verbs = {"pretrain", "probe",     "eval",  "attack",
                                          "make-data", "sweep",    "report"};
  for (const std::string& verb : verbs) {
    CLI::App* sub = app.add_subcommand(verb);
    sub->add_option("--config", cmd.config_path, "run-config JSON file")->required();
    sub->add_option("--output-dir", cmd.output_dir, "artifact directory")->required();
    sub->add_option("--set", cmd.overrides, "config override key.path=value");
    if (verb == "probe" || verb == "eval" || verb == "attack" || verb == "sweep")
      sub->add_option("--checkpoint", cmd.checkpoint, "pretraining checkpoint");
    if (verb == "eval" || verb == "attack")
      sub->add_option("--probe", cmd.probe, "trained probe head file");
    if (verb == "pretrain") {
      sub->add_option("--resume", cmd.resume, "checkpoint to resume from");
      sub->add_flag("--force-resume", cmd.force_resume, "resume despite config hash mismatch");
    }
    sub->callback([&cmd, verb]() { cmd.verb = verb; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : sslp::cli::kConfigError;
  }
  return sslp::cli::run_command(cmd);
}
