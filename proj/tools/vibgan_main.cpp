// vibgan: 1-D vibration signal synthesis (Wasserstein GAN with gradient
// penalty) and damage-detection classifier pipeline.
//
// Subcommands mirror the workflow stages: ingest, train-gan, generate,
// eval, train-dcnn, test-dcnn, pipeline, plots.

#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vibgan/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::string case_name;
  std::optional<uint64_t> seed;
  std::optional<int64_t> seg_len;
  std::optional<bool> strict_determinism;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool wants_case) {
  cmd->add_option("--config", args.config_path, "pipeline config file (JSON)")
      ->required();
  cmd->add_option("--out", args.out_override,
                  "output directory (overrides config and " +
                      std::string(vibgan::kOutDirEnvVar) + ")");
  cmd->add_option("--seed", args.seed, "override the global seed");
  cmd->add_option("--seg-len", args.seg_len, "override the segment length");
  cmd->add_flag("--strict-determinism,!--no-strict-determinism",
                args.strict_determinism,
                "deterministic reductions and zeroed wall-clock fields");
  cmd->add_flag("--force", args.force, "re-run even when outputs are current");
  if (wants_case) {
    cmd->add_option("--case", args.case_name,
                    "case name (defaults to the only configured case)");
  }
}

vibgan::PipelineContext open_context(const CommonArgs& args) {
  auto cfg = vibgan::PipelineConfig::load(args.config_path);
  if (const char* env = std::getenv(vibgan::kOutDirEnvVar);
      env && *env != '\0') {
    cfg.out_dir = env;
  }
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;
  if (args.seed) cfg.seed = *args.seed;
  if (args.seg_len) {
    cfg.seg_len = *args.seg_len;
    cfg.gan.seg_len = *args.seg_len;
    cfg.classifier.seg_len = *args.seg_len;
  }
  if (args.strict_determinism) cfg.strict_determinism = *args.strict_determinism;
  return vibgan::PipelineContext::open(std::move(cfg), args.force);
}

const vibgan::CaseSpec& resolve_case(const vibgan::PipelineContext& ctx,
                                     const CommonArgs& args) {
  if (!args.case_name.empty()) {
    return vibgan::stages::find_case(ctx.cfg, args.case_name);
  }
  if (ctx.cfg.cases.size() == 1) return ctx.cfg.cases.front();
  throw vibgan::ConfigError(
      "--case is required when the config defines multiple cases");
}

void report(const std::string& stage, bool ran) {
  std::cout << stage << (ran ? ": done" : ": up to date, skipped") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "vibration signal synthesis (1-D WGAN-GP) and damage detection"};
  app.require_subcommand(1);

  CommonArgs args;
  int scenario = 1;
  int64_t generate_n = -1;

  auto* cmd_ingest = app.add_subcommand("ingest", "build segment pools");
  add_common(cmd_ingest, args, false);

  auto* cmd_train_gan =
      app.add_subcommand("train-gan", "train the generator/critic pair");
  add_common(cmd_train_gan, args, true);

  auto* cmd_generate =
      app.add_subcommand("generate", "sample synthetic segments");
  add_common(cmd_generate, args, true);
  cmd_generate->add_option("--n", generate_n,
                           "number of segments (overrides counts.generate_n)");

  auto* cmd_eval = app.add_subcommand(
      "eval", "FID/SSIM reports, creativity/diversity, box stats");
  add_common(cmd_eval, args, true);

  auto* cmd_train_dcnn =
      app.add_subcommand("train-dcnn", "train the damage classifier");
  add_common(cmd_train_dcnn, args, true);
  cmd_train_dcnn->add_option("--scenario", scenario, "scenario id (1 or 2)")
      ->required();

  auto* cmd_test_dcnn =
      app.add_subcommand("test-dcnn", "evaluate the damage classifier");
  add_common(cmd_test_dcnn, args, true);
  cmd_test_dcnn->add_option("--scenario", scenario, "scenario id (1 or 2)")
      ->required();

  auto* cmd_pipeline =
      app.add_subcommand("pipeline", "run every stage for all cases");
  add_common(cmd_pipeline, args, false);

  auto* cmd_plots =
      app.add_subcommand("plots", "regenerate SVG charts from CSV artifacts");
  add_common(cmd_plots, args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    auto ctx = open_context(args);

    if (cmd_ingest->parsed()) {
      report("ingest", vibgan::stages::ingest(ctx));
    } else if (cmd_train_gan->parsed()) {
      const auto& c = resolve_case(ctx, args);
      report("train-gan/" + c.name, vibgan::stages::train_gan(ctx, c));
    } else if (cmd_generate->parsed()) {
      const auto& c = resolve_case(ctx, args);
      if (generate_n > 0) ctx.cfg.counts.generate_n = generate_n;
      report("generate/" + c.name, vibgan::stages::generate(ctx, c));
    } else if (cmd_eval->parsed()) {
      const auto& c = resolve_case(ctx, args);
      report("eval/" + c.name, vibgan::stages::eval(ctx, c));
    } else if (cmd_train_dcnn->parsed()) {
      const auto& c = resolve_case(ctx, args);
      report("train-dcnn/" + c.name + "/s" + std::to_string(scenario),
             vibgan::stages::train_dcnn(ctx, c, scenario));
    } else if (cmd_test_dcnn->parsed()) {
      const auto& c = resolve_case(ctx, args);
      report("test-dcnn/" + c.name + "/s" + std::to_string(scenario),
             vibgan::stages::test_dcnn(ctx, c, scenario));
    } else if (cmd_pipeline->parsed()) {
      vibgan::stages::pipeline(ctx);
      std::cout << "pipeline: done (summary at "
                << (ctx.run_dir / "summary.csv").string() << ")\n";
    } else if (cmd_plots->parsed()) {
      vibgan::stages::plots(ctx);
      std::cout << "plots: done\n";
    }
    return kExitOk;
  } catch (const vibgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vibgan::DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const vibgan::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const vibgan::IngestionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const vibgan::AllocationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const vibgan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
