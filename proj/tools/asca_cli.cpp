#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "asca/pipeline.hpp"

namespace {

asca::RunConfig resolve(const std::string& config_path, std::uint64_t seed, bool seed_set,
                        const std::string& out_dir, const std::string& backend) {
  asca::RunConfig cfg;
  if (!config_path.empty()) cfg = asca::pipeline::load_config(config_path);
  if (seed_set) cfg.seed = seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!backend.empty()) cfg.backend_kind = backend;
  cfg.calibration.seed = cfg.seed;
  return cfg;
}

void print_artifacts(const std::map<std::string, std::string>& artifacts) {
  for (const auto& [name, path] : artifacts) std::cout << name << ": " << path << "\n";
}

// Machine-readable failure record on stderr, one JSON object per line.
void print_error(const std::string& kind, const std::exception& e,
                 const std::vector<std::string>& violations = {}) {
  nlohmann::json record{{"error", kind}, {"message", e.what()}};
  if (!violations.empty()) record["violations"] = violations;
  std::cerr << record.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic keystroke attack pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string backend;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON run configuration")->expected(1);
  app.add_option("--out", out_dir, "Output directory (overrides config)");
  app.add_option("--backend", backend, "Correction backend (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "Run seed (overrides config)");

  std::string preset = "Medium";
  double eval_eta = 0.0;
  std::string transcripts_path;
  std::string backend_name = "backend";
  std::vector<std::string> report_inputs;

  auto* seg = app.add_subcommand("segment", "Build the keystroke dataset");
  auto* feat = app.add_subcommand("featurize", "Export mel spectrogram matrices");
  auto* train = app.add_subcommand("train", "Train the keystroke classifier");
  auto* eval = app.add_subcommand("evaluate", "Measure accuracy and confusion at a noise level");
  eval->add_option("--eta", eval_eta, "Noise scale");
  auto* cal = app.add_subcommand("calibrate", "Solve noise scales for target accuracies");
  auto* atk = app.add_subcommand("attack", "Transcribe the sentence corpus");
  atk->add_option("--preset", preset, "Noise preset: Low, Medium, or High");
  auto* corr = app.add_subcommand("correct", "Run typo correction over transcripts");
  corr->add_option("--transcripts", transcripts_path, "Transcripts JSONL")->required();
  auto* score = app.add_subcommand("score", "Score transcripts against ground truth");
  score->add_option("--transcripts", transcripts_path, "Transcripts JSONL")->required();
  score->add_option("--name", backend_name, "Backend column name for the report");
  auto* rep = app.add_subcommand("report", "Render a metric table from report files");
  rep->add_option("--inputs", report_inputs, "Report JSON files")->required();
  auto* run = app.add_subcommand("run", "Full pipeline: train, attack, correct, score");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    const auto cfg = resolve(config_path, seed, seed_set, out_dir, backend);
    std::map<std::string, std::string> artifacts;
    if (seg->parsed()) artifacts = asca::pipeline::cmd_segment(cfg);
    if (feat->parsed()) artifacts = asca::pipeline::cmd_featurize(cfg);
    if (train->parsed()) artifacts = asca::pipeline::cmd_train(cfg);
    if (eval->parsed()) artifacts = asca::pipeline::cmd_evaluate(cfg, eval_eta);
    if (cal->parsed()) artifacts = asca::pipeline::cmd_calibrate(cfg);
    if (atk->parsed()) artifacts = asca::pipeline::cmd_attack(cfg, preset);
    if (corr->parsed()) artifacts = asca::pipeline::cmd_correct(cfg, transcripts_path);
    if (score->parsed()) artifacts = asca::pipeline::cmd_score(cfg, transcripts_path, backend_name);
    if (rep->parsed()) {
      std::vector<std::filesystem::path> paths(report_inputs.begin(), report_inputs.end());
      artifacts = asca::pipeline::cmd_report(cfg, paths);
    }
    if (run->parsed()) artifacts = asca::pipeline::run_full(cfg);
    print_artifacts(artifacts);
  } catch (const asca::ConfigError& e) {
    print_error("config", e, e.violations);
    return 2;
  } catch (const std::exception& e) {
    print_error("runtime", e);
    return 1;
  }
  return 0;
}
