#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geotact/app/commands.hpp"

namespace {

using namespace geotact;

// Exit codes: 0 success, 1 runtime failure, 2 usage/config error,
// 3 numeric failure, 4 unreadable or corrupt file.
int run(int argc, char** argv) {
  CLI::App app{"Tactile retrieval of objects buried in granular media: training, evaluation and replay"};
  app.require_subcommand(1);
  CommandOptions o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "run seed");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--set", o.overrides, "extra key=value override (repeatable)");
  };
  auto objects = [&](CLI::App* sub) {
    sub->add_option("--objects", o.objects, "comma-separated object names")->delimiter(',');
  };

  CLI::App* train = app.add_subcommand("train", "train a policy from scratch in the configured mode");
  common(train);
  objects(train);
  train->add_option("--steps", o.steps, "environment-step budget");

  CLI::App* finetune = app.add_subcommand("finetune", "continue training a checkpoint in granular mode");
  common(finetune);
  objects(finetune);
  finetune->add_option("--from", o.from_checkpoint, "checkpoint to start from")->required();
  finetune->add_option("--steps", o.steps, "environment-step budget");

  CLI::App* eval = app.add_subcommand("eval", "success table of one policy");
  common(eval);
  objects(eval);
  eval->add_option("--policy", o.policies, "checkpoint path, a2g or a2g-push")->required()->expected(1);
  eval->add_option("--trials", o.trials, "completed episodes per object");
  eval->add_option("--force-noise", o.force_noise, "force-noise halfwidth in newtons");
  eval->add_option("--log-episodes", o.log_episodes, "episode logs kept per object")->check(CLI::NonNegativeNumber);

  CLI::App* sweep = app.add_subcommand("sweep-noise", "success versus force-noise halfwidth");
  common(sweep);
  objects(sweep);
  sweep->add_option("--policy", o.policies, "checkpoint path, a2g or a2g-push (repeatable or comma-separated)")
      ->required()
      ->delimiter(',');
  sweep->add_option("--trials", o.trials, "completed episodes per object and noise level");
  sweep->add_option("--grid", o.noise_grid, "comma-separated noise halfwidths")->delimiter(',');

  CLI::App* replay = app.add_subcommand("replay", "re-simulate an episode log and render frames");
  replay->add_option("log", o.input_path, "episode log")->required();
  replay->add_option("--out", o.out_dir, "frames directory");

  CLI::App* metrics = app.add_subcommand("metrics", "summarize a training metrics file");
  metrics->add_option("metrics", o.input_path, "metrics CSV written by train or finetune")->required();
  metrics->add_option("--config", o.config_path, "config with the running-success window")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      const TrainOutcome r = cmd_train(resolve_config(o), o.out_dir, std::cout);
      std::printf("trained %ld steps, final running success %.4f\n", r.env_steps, r.metrics.final_running());
    } else if (*finetune) {
      const TrainOutcome r = cmd_finetune(o.from_checkpoint, resolve_config(o), o.out_dir, std::cout);
      std::printf("fine-tuned %ld steps, final running success %.4f\n", r.env_steps, r.metrics.final_running());
    } else if (*eval) {
      std::cout << eval_csv(cmd_eval(o.policies.front(), resolve_config(o), o.out_dir, o.log_episodes));
    } else if (*sweep) {
      std::cout << sweep_csv(cmd_sweep_noise(o.policies, resolve_config(o), o.out_dir));
    } else if (*replay) {
      const int n = cmd_replay(o.input_path, o.out_dir);
      std::printf("wrote %d frames to %s\n", n, o.out_dir.c_str());
    } else if (*metrics) {
      cmd_metrics(o.input_path, resolve_config(o), std::cout);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "geotact: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "geotact: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "geotact: %s\n", e.what());
    return 3;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "geotact: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "geotact: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
