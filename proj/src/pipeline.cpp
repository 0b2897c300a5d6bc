#include "asca/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asca/alphabet.hpp"
#include "asca/metrics.hpp"
#include "asca/rng.hpp"
#include "asca/wav.hpp"

namespace asca::pipeline {

using nlohmann::json;

namespace {

const std::vector<std::string> kPresetOrder = {"Low", "Medium", "High"};

ProfileDefaults profile_defaults(const std::string& profile) {
  if (profile == "phone") return phone_profile();
  if (profile == "phone_direct") return phone_direct_profile();
  if (profile == "zoom") return zoom_profile();
  if (profile == "zoom_direct") return zoom_direct_profile();
  if (profile == "synthetic") return synthetic_profile();
  throw std::invalid_argument("unknown profile: " + profile);
}

std::vector<std::pair<std::string, double>> default_presets(const std::string& profile) {
  if (profile == "phone" || profile == "phone_direct") {
    return {{"Low", kPhoneEtaLow}, {"Medium", kPhoneEtaMedium}, {"High", kPhoneEtaHigh}};
  }
  if (profile == "zoom" || profile == "zoom_direct") {
    return {{"Low", kZoomEtaLow}, {"Medium", kZoomEtaMedium}, {"High", kZoomEtaHigh}};
  }
  // Synthetic fixture operating points near 0.95 / 0.85 / 0.70 character
  // accuracy (re-derivable via `calibrate`).
  return {{"Low", 0.016}, {"Medium", 0.031}, {"High", 0.047}};
}

void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& allowed,
                std::vector<std::string>& problems) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      problems.push_back(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config parse failure", {e.what()});
  }

  std::vector<std::string> problems;
  check_keys(j, "config",
             {"profile", "seed", "out_dir", "paths", "corpus_selection", "split", "mel",
              "augment", "noise_presets", "backend", "scoring", "calibration"},
             problems);

  RunConfig cfg;
  cfg.profile = j.value("profile", cfg.profile);
  try {
    const auto defaults = profile_defaults(cfg.profile);
    cfg.mel = defaults.mel;
    cfg.timeshift_fraction = defaults.timeshift_fraction;
    cfg.mask = defaults.mask;
  } catch (const std::invalid_argument& e) {
    problems.push_back(e.what());
  }
  cfg.noise_presets = default_presets(j.value("profile", std::string("synthetic")));
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir.string());

  if (j.contains("paths")) {
    const auto& p = j["paths"];
    check_keys(p, "paths", {"recordings_dir", "manifest", "corpus", "wordlist"}, problems);
    cfg.recordings_dir = p.value("recordings_dir", std::string{});
    cfg.manifest = p.value("manifest", std::string{});
    cfg.corpus_path = p.value("corpus", std::string{});
    cfg.wordlist_path = p.value("wordlist", std::string{});
  }
  if (j.contains("corpus_selection")) {
    const auto& c = j["corpus_selection"];
    check_keys(c, "corpus_selection", {"n_digit", "n_plain"}, problems);
    cfg.corpus_digit = c.value("n_digit", cfg.corpus_digit);
    cfg.corpus_plain = c.value("n_plain", cfg.corpus_plain);
    if (cfg.corpus_digit < 0) problems.push_back("corpus_selection.n_digit: negative");
    if (cfg.corpus_plain < 0) problems.push_back("corpus_selection.n_plain: negative");
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    check_keys(s, "split", {"test_fraction"}, problems);
    cfg.test_fraction = s.value("test_fraction", cfg.test_fraction);
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
      problems.push_back("split.test_fraction: must be in (0, 1)");
    }
  }
  if (j.contains("mel")) {
    const auto& m = j["mel"];
    check_keys(m, "mel",
               {"n_mels", "n_fft", "hop_length", "sample_rate_hz", "fmin", "fmax",
                "target_width"},
               problems);
    cfg.mel.n_mels = m.value("n_mels", cfg.mel.n_mels);
    cfg.mel.n_fft = m.value("n_fft", cfg.mel.n_fft);
    cfg.mel.hop_length = m.value("hop_length", cfg.mel.hop_length);
    cfg.mel.sample_rate_hz = m.value("sample_rate_hz", cfg.mel.sample_rate_hz);
    cfg.mel.fmin = m.value("fmin", cfg.mel.fmin);
    cfg.mel.fmax = m.value("fmax", cfg.mel.fmax);
    cfg.mel.target_width = m.value("target_width", cfg.mel.target_width);
    try {
      cfg.mel.validate();
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("mel: ") + e.what());
    }
  }
  if (j.contains("augment")) {
    const auto& a = j["augment"];
    check_keys(a, "augment",
               {"timeshift_fraction", "mask_fraction", "masks_per_axis", "noise_eta"},
               problems);
    cfg.timeshift_fraction = a.value("timeshift_fraction", cfg.timeshift_fraction);
    cfg.mask.max_mask_fraction = a.value("mask_fraction", cfg.mask.max_mask_fraction);
    cfg.mask.masks_per_axis = a.value("masks_per_axis", cfg.mask.masks_per_axis);
    cfg.train_noise_eta = a.value("noise_eta", cfg.train_noise_eta);
    if (cfg.timeshift_fraction < 0.0 || cfg.timeshift_fraction > 1.0) {
      problems.push_back("augment.timeshift_fraction: must be in [0, 1]");
    }
    if (cfg.train_noise_eta < 0.0) problems.push_back("augment.noise_eta: negative");
    try {
      cfg.mask.validate();
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("augment: ") + e.what());
    }
  }
  if (j.contains("noise_presets")) {
    const auto& n = j["noise_presets"];
    check_keys(n, "noise_presets", kPresetOrder, problems);
    cfg.noise_presets.clear();
    for (const auto& level : kPresetOrder) {
      if (!n.contains(level)) {
        problems.push_back("noise_presets: missing level '" + level + "'");
        continue;
      }
      const double eta = n[level].get<double>();
      if (eta < 0.0) problems.push_back("noise_presets." + level + ": negative eta");
      cfg.noise_presets.emplace_back(level, eta);
    }
  }
  if (j.contains("backend")) {
    const auto& b = j["backend"];
    check_keys(b, "backend", {"kind", "fewshot_k", "remote"}, problems);
    cfg.backend_kind = b.value("kind", cfg.backend_kind);
    cfg.fewshot_k = b.value("fewshot_k", cfg.fewshot_k);
    if (cfg.fewshot_k < 0) problems.push_back("backend.fewshot_k: negative");
    static const std::vector<std::string> kinds = {"oracle", "echo", "dictionary", "remote"};
    if (std::find(kinds.begin(), kinds.end(), cfg.backend_kind) == kinds.end()) {
      problems.push_back("backend.kind: unknown '" + cfg.backend_kind + "'");
    }
    if (b.contains("remote")) {
      const auto& r = b["remote"];
      check_keys(r, "backend.remote",
                 {"base_url", "model", "auth_token_env", "endpoint_path", "temperature",
                  "timeout_s", "max_concurrent", "max_retries"},
                 problems);
      cfg.remote.base_url = r.value("base_url", cfg.remote.base_url);
      cfg.remote.model = r.value("model", cfg.remote.model);
      cfg.remote.auth_token_env = r.value("auth_token_env", cfg.remote.auth_token_env);
      cfg.remote.endpoint_path = r.value("endpoint_path", cfg.remote.endpoint_path);
      cfg.remote.temperature = r.value("temperature", cfg.remote.temperature);
      cfg.remote.timeout_s = r.value("timeout_s", cfg.remote.timeout_s);
      cfg.remote.max_concurrent = r.value("max_concurrent", cfg.remote.max_concurrent);
      cfg.remote.max_retries = r.value("max_retries", cfg.remote.max_retries);
    }
    if (cfg.backend_kind == "remote" && cfg.remote.base_url.empty()) {
      problems.push_back("backend.remote.base_url: required for remote backend");
    }
  }
  if (j.contains("scoring")) {
    const auto& s = j["scoring"];
    check_keys(s, "scoring", {"target"}, problems);
    cfg.score_target = s.value("target", cfg.score_target);
    if (cfg.score_target != "corrected" && cfg.score_target != "predicted") {
      problems.push_back("scoring.target: unknown '" + cfg.score_target +
                         "', must be 'corrected' or 'predicted'");
    }
  }
  if (j.contains("calibration")) {
    const auto& c = j["calibration"];
    check_keys(c, "calibration",
               {"tolerance", "samples_per_probe", "max_iterations", "eta_low", "eta_high",
                "probe_sentences", "targets"},
               problems);
    cfg.calibration.tolerance = c.value("tolerance", cfg.calibration.tolerance);
    cfg.calibration.samples_per_probe =
        c.value("samples_per_probe", cfg.calibration.samples_per_probe);
    cfg.calibration.max_iterations = c.value("max_iterations", cfg.calibration.max_iterations);
    cfg.eta_bounds.low = c.value("eta_low", cfg.eta_bounds.low);
    cfg.eta_bounds.high = c.value("eta_high", cfg.eta_bounds.high);
    cfg.probe_sentences = c.value("probe_sentences", cfg.probe_sentences);
    if (c.contains("targets")) cfg.calibration_targets = c["targets"].get<std::vector<double>>();
    if (cfg.calibration.tolerance <= 0.0) problems.push_back("calibration.tolerance: <= 0");
    if (cfg.probe_sentences <= 0) problems.push_back("calibration.probe_sentences: <= 0");
  }

  if (!problems.empty()) {
    std::string msg = "invalid config (" + std::to_string(problems.size()) + " problems)";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg, problems);
  }
  cfg.calibration.seed = cfg.seed;
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["profile"] = cfg.profile;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir.string();
  j["paths"] = {{"recordings_dir", cfg.recordings_dir.string()},
                {"manifest", cfg.manifest.string()},
                {"corpus", cfg.corpus_path.string()},
                {"wordlist", cfg.wordlist_path.string()}};
  j["corpus_selection"] = {{"n_digit", cfg.corpus_digit}, {"n_plain", cfg.corpus_plain}};
  j["split"] = {{"test_fraction", cfg.test_fraction}};
  j["mel"] = {{"n_mels", cfg.mel.n_mels},       {"n_fft", cfg.mel.n_fft},
              {"hop_length", cfg.mel.hop_length}, {"sample_rate_hz", cfg.mel.sample_rate_hz},
              {"fmin", cfg.mel.fmin},           {"fmax", cfg.mel.fmax},
              {"target_width", cfg.mel.target_width}};
  j["augment"] = {{"timeshift_fraction", cfg.timeshift_fraction},
                  {"mask_fraction", cfg.mask.max_mask_fraction},
                  {"masks_per_axis", cfg.mask.masks_per_axis},
                  {"noise_eta", cfg.train_noise_eta}};
  for (const auto& [level, eta] : cfg.noise_presets) j["noise_presets"][level] = eta;
  j["backend"] = {{"kind", cfg.backend_kind}, {"fewshot_k", cfg.fewshot_k}};
  j["scoring"] = {{"target", cfg.score_target}};
  j["calibration"] = {{"tolerance", cfg.calibration.tolerance},
                      {"samples_per_probe", cfg.calibration.samples_per_probe},
                      {"max_iterations", cfg.calibration.max_iterations},
                      {"eta_low", cfg.eta_bounds.low},
                      {"eta_high", cfg.eta_bounds.high},
                      {"probe_sentences", cfg.probe_sentences},
                      {"targets", cfg.calibration_targets}};
  return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

void write_run_manifest(const RunConfig& cfg,
                        const std::map<std::string, std::string>& artifacts) {
  std::filesystem::create_directories(cfg.out_dir);
  json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["config"] = json::parse(config_to_json(cfg));
  for (const auto& [name, path] : artifacts) j["artifacts"][name] = path;
  std::ofstream f(cfg.out_dir / "manifest.json");
  f << j.dump(2) << "\n";
}

KeystrokeDataset load_or_synthesize_dataset(const RunConfig& cfg) {
  if (!cfg.manifest.empty()) return load_dataset(cfg.manifest);
  const auto saved = cfg.out_dir / "dataset" / "manifest.json";
  if (std::filesystem::exists(saved)) return load_dataset(saved);
  if (cfg.profile == "synthetic") return synth_dataset(cfg.seed, 25);
  throw std::runtime_error("no dataset manifest; run `segment` first");
}

std::unique_ptr<CorrectorBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend_kind == "oracle") return make_oracle_backend();
  if (cfg.backend_kind == "echo") return make_echo_backend();
  if (cfg.backend_kind == "dictionary") {
    std::vector<std::string> words;
    if (!cfg.wordlist_path.empty()) {
      std::ifstream f(cfg.wordlist_path);
      if (!f) throw std::runtime_error("cannot open wordlist " + cfg.wordlist_path.string());
      std::string w;
      while (f >> w) words.push_back(normalize_sentence(w));
    } else if (!cfg.corpus_path.empty()) {
      // Fall back to the corpus vocabulary.
      const auto corpus =
          load_corpus(cfg.corpus_path, cfg.corpus_digit, cfg.corpus_plain,
                      Rng::derive(cfg.seed, 201));
      for (const auto& s : corpus.sentences) {
        for (const auto& t : tokenize(s)) words.push_back(t);
      }
    } else {
      throw std::runtime_error("dictionary backend needs a wordlist or corpus path");
    }
    return make_dictionary_backend(std::move(words));
  }
  if (cfg.backend_kind == "remote") return make_remote_backend(cfg.remote);
  throw std::runtime_error("unknown backend kind: " + cfg.backend_kind);
}

std::map<std::string, std::string> cmd_segment(const RunConfig& cfg) {
  KeystrokeDataset ds;
  if (cfg.profile == "synthetic") {
    ds = synth_dataset(cfg.seed, 25);
  } else {
    if (cfg.recordings_dir.empty()) {
      throw std::runtime_error("segment: paths.recordings_dir is required");
    }
    ds = load_recordings(cfg.recordings_dir, cfg.profile, default_segmentation(cfg.mel));
  }
  const auto dir = cfg.out_dir / "dataset";
  save_dataset(ds, dir);
  std::map<std::string, std::string> artifacts{
      {"dataset_manifest", (dir / "manifest.json").string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_featurize(const RunConfig& cfg) {
  const auto ds = load_or_synthesize_dataset(cfg);
  const auto dir = cfg.out_dir / "features";
  std::filesystem::create_directories(dir);
  json index;
  std::map<int, int> counter;
  for (const auto& item : ds.items) {
    const int n = counter[item.label]++;
    const std::string name = std::string(1, index_symbol(item.label)) + "_" +
                             std::to_string(n) + ".mat";
    const auto spec = mel_spectrogram(item.wave, cfg.mel);
    write_matrix(dir / name, static_cast<std::size_t>(spec.rows()),
                 static_cast<std::size_t>(spec.cols()), spec.values);
    index.push_back({{"label", std::string(1, index_symbol(item.label))},
                     {"path", "features/" + name}});
  }
  std::ofstream f(dir / "index.json");
  f << index.dump(2) << "\n";
  std::map<std::string, std::string> artifacts{
      {"features_index", (dir / "index.json").string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_train(const RunConfig& cfg) {
  const auto ds = load_or_synthesize_dataset(cfg);
  const auto split = stratified_split(ds, cfg.test_fraction, cfg.seed);
  const AugmentSpec augment{.noise_eta = cfg.train_noise_eta,
                            .timeshift_fraction = cfg.timeshift_fraction,
                            .mask = cfg.mask,
                            .seed = cfg.seed};
  const auto model = train_centroid(ds, split, cfg.mel, augment);
  save_model(model, cfg.out_dir / "model");
  std::map<std::string, std::string> artifacts{
      {"model", (cfg.out_dir / "model").string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_evaluate(const RunConfig& cfg, double eta) {
  const auto ds = load_or_synthesize_dataset(cfg);
  const auto split = stratified_split(ds, cfg.test_fraction, cfg.seed);
  const auto model = load_model(cfg.out_dir / "model");
  const auto eval = evaluate(model, ds, split, {eta, Rng::derive(cfg.seed, 11)}, cfg.mel);
  const auto cm37 = extend_with_space(eval.cm36);

  json j;
  j["eta"] = eta;
  j["accuracy"] = eval.accuracy;
  j["cm36"] = eval.cm36.p;
  j["cm37"] = cm37.p;
  const auto path = cfg.out_dir / "evaluation.json";
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream f(path);
  f << j.dump(2) << "\n";
  std::map<std::string, std::string> artifacts{{"evaluation", path.string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

namespace {

SentenceCorpus probe_corpus(const RunConfig& cfg, int n_sentences, std::uint64_t stream) {
  if (cfg.corpus_path.empty()) throw std::runtime_error("paths.corpus is required");
  const int n_digit = n_sentences / 2;
  return load_corpus(cfg.corpus_path, n_digit, n_sentences - n_digit,
                     Rng::derive(cfg.seed, stream));
}

}  // namespace

std::map<std::string, std::string> cmd_calibrate(const RunConfig& cfg) {
  const auto ds = load_or_synthesize_dataset(cfg);
  const auto model = load_model(cfg.out_dir / "model");
  const auto probe = probe_corpus(cfg, cfg.probe_sentences, 101);

  const MeasureFn measure = [&](double eta, std::uint64_t seed) {
    return measure_accuracy_audio(eta, probe, ds, model, cfg.mel, seed);
  };

  json presets;
  for (std::size_t i = 0; i < cfg.calibration_targets.size() && i < kPresetOrder.size();
       ++i) {
    const auto result =
        calibrate_eta(cfg.calibration_targets[i], cfg.eta_bounds, measure, cfg.calibration);
    presets[kPresetOrder[i]] = {{"eta", result.eta},
                                {"achieved_accuracy", result.achieved_accuracy},
                                {"target", result.target},
                                {"iterations", result.iterations},
                                {"samples_per_probe", result.samples_per_probe},
                                {"seed", result.seed},
                                {"converged", result.converged}};
  }
  const auto path = cfg.out_dir / "calibrated_presets.json";
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream f(path);
  f << presets.dump(2) << "\n";
  std::map<std::string, std::string> artifacts{{"calibrated_presets", path.string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_attack(const RunConfig& cfg,
                                              const std::string& preset) {
  const auto it = std::find_if(cfg.noise_presets.begin(), cfg.noise_presets.end(),
                               [&](const auto& p) { return p.first == preset; });
  if (it == cfg.noise_presets.end()) {
    throw std::runtime_error("attack: unknown noise preset '" + preset + "'");
  }
  const auto ds = load_or_synthesize_dataset(cfg);
  const auto model = load_model(cfg.out_dir / "model");
  const auto corpus = load_corpus(cfg.corpus_path, cfg.corpus_digit, cfg.corpus_plain,
                                  Rng::derive(cfg.seed, 201));
  const auto transcripts = attack_audio(corpus, ds, model, cfg.mel, it->second,
                                        Rng::derive(cfg.seed, 301), preset);
  const auto path = cfg.out_dir / ("transcripts_" + preset + ".jsonl");
  std::filesystem::create_directories(cfg.out_dir);
  write_transcripts_jsonl(path, transcripts);
  std::map<std::string, std::string> artifacts{{"transcripts_" + preset, path.string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_correct(const RunConfig& cfg,
                                               const std::filesystem::path& transcripts_path) {
  auto transcripts = read_transcripts_jsonl(transcripts_path);
  const auto backend = make_backend(cfg);
  correct_transcripts(*backend, transcripts, transcripts, cfg.fewshot_k,
                      Rng::derive(cfg.seed, 401));
  const auto path = cfg.out_dir / ("corrected_" + cfg.backend_kind + "_" +
                                   transcripts_path.stem().string() + ".jsonl");
  std::filesystem::create_directories(cfg.out_dir);
  write_transcripts_jsonl(path, transcripts);
  std::map<std::string, std::string> artifacts{{"corrected", path.string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_score(const RunConfig& cfg,
                                             const std::filesystem::path& transcripts_path,
                                             const std::string& backend_name) {
  const auto transcripts = read_transcripts_jsonl(transcripts_path);
  const auto target = cfg.score_target == "predicted" ? ScoreTarget::predicted
                                                      : ScoreTarget::corrected;
  const auto report = score_transcripts(transcripts, target, backend_name);
  const auto path = cfg.out_dir / ("report_" + backend_name + "_" +
                                   (report.noise_level.empty() ? "none" : report.noise_level) +
                                   ".json");
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream f(path);
  f << report_to_json(report);
  std::map<std::string, std::string> artifacts{{"report", path.string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> cmd_report(const RunConfig& cfg,
                                              const std::vector<std::filesystem::path>& reports) {
  std::vector<MetricReport> loaded;
  for (const auto& p : reports) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("report: cannot open " + p.string());
    std::stringstream buf;
    buf << f.rdbuf();
    loaded.push_back(report_from_json(buf.str()));
  }
  const auto table = render_report_table(loaded);
  const auto path = cfg.out_dir / "report_table.txt";
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream f(path);
  f << table;
  std::map<std::string, std::string> artifacts{{"report_table", path.string()}};
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

std::map<std::string, std::string> run_full(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto ds = load_or_synthesize_dataset(cfg);
  const auto split = stratified_split(ds, cfg.test_fraction, cfg.seed);
  const AugmentSpec augment{.noise_eta = cfg.train_noise_eta,
                            .timeshift_fraction = cfg.timeshift_fraction,
                            .mask = cfg.mask,
                            .seed = cfg.seed};
  const auto model = train_centroid(ds, split, cfg.mel, augment);
  save_model(model, cfg.out_dir / "model");
  const auto corpus = load_corpus(cfg.corpus_path, cfg.corpus_digit, cfg.corpus_plain,
                                  Rng::derive(cfg.seed, 201));

  std::map<std::string, std::string> artifacts{{"model", (cfg.out_dir / "model").string()}};
  std::vector<std::filesystem::path> report_paths;
  const auto backend = make_backend(cfg);
  for (std::size_t i = 0; i < cfg.noise_presets.size(); ++i) {
    const auto& [level, eta] = cfg.noise_presets[i];
    const auto eval =
        evaluate(model, ds, split, {eta, Rng::derive(cfg.seed, 11 + i)}, cfg.mel);
    const auto cm = extend_with_space(eval.cm36);
    auto transcripts = attack_channel(corpus, cm, level, Rng::derive(cfg.seed, 301 + i));

    const auto tpath = cfg.out_dir / ("transcripts_" + level + ".jsonl");
    write_transcripts_jsonl(tpath, transcripts);
    artifacts["transcripts_" + level] = tpath.string();

    // Uncorrected baseline.
    const auto base_report = score_transcripts(transcripts, ScoreTarget::predicted,
                                               "uncorrected");
    const auto bpath = cfg.out_dir / ("report_uncorrected_" + level + ".json");
    {
      std::ofstream f(bpath);
      f << report_to_json(base_report);
    }
    report_paths.push_back(bpath);
    artifacts["report_uncorrected_" + level] = bpath.string();

    correct_transcripts(*backend, transcripts, transcripts, cfg.fewshot_k,
                        Rng::derive(cfg.seed, 401 + i));
    const auto cpath = cfg.out_dir / ("corrected_" + level + ".jsonl");
    write_transcripts_jsonl(cpath, transcripts);
    artifacts["corrected_" + level] = cpath.string();

    const auto corr_report =
        score_transcripts(transcripts, ScoreTarget::corrected, cfg.backend_kind);
    const auto rpath = cfg.out_dir / ("report_" + cfg.backend_kind + "_" + level + ".json");
    {
      std::ofstream f(rpath);
      f << report_to_json(corr_report);
    }
    report_paths.push_back(rpath);
    artifacts["report_" + cfg.backend_kind + "_" + level] = rpath.string();
  }

  auto table_artifacts = cmd_report(cfg, report_paths);
  artifacts.insert(table_artifacts.begin(), table_artifacts.end());
  write_run_manifest(cfg, artifacts);
  return artifacts;
}

}  // namespace asca::pipeline
