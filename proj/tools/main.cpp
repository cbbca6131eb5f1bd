// softpool command-line tool: dataset synthesis, training, inference,
// evaluation, ablation sweeps and the verification suite.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "softpool/ablation.hpp"
#include "softpool/checkpoint.hpp"
#include "softpool/config.hpp"
#include "softpool/dataset.hpp"
#include "softpool/errors.hpp"
#include "softpool/eval.hpp"
#include "softpool/io.hpp"
#include "softpool/trainer.hpp"
#include "softpool/verify.hpp"

namespace fs = std::filesystem;
using namespace softpool;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kIo = 3 };

struct Common {
  std::string config_path;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
  bool paper_loss = false;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value run configuration file");
  cmd->add_option("--profile", c.profile, "base profile when no config names one (paper or desk)");
  cmd->add_option("--seed", c.seed, "random seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads (overrides the config)");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_flag("--paper-loss", c.paper_loss, "drop the coarse supervision term from the completion loss");
  cmd->add_option("--set", c.settings, "extra key=value override, repeatable");
}

RunConfig load_config(const Common& c) {
  RunConfig config = profile_config(c.profile.empty() ? "desk" : c.profile);
  if (!c.config_path.empty()) config = parse_config(io::read_file(c.config_path), config);
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) config.seed = *c.seed;
  if (c.threads) config.threads = *c.threads;
  if (c.paper_loss) config.paper_loss = true;
  config.validate();
  return config;
}

struct Split {
  std::vector<synth::ScanPair> train, holdout;
};

Split load_split(const RunConfig& config) {
  if (config.dataset.empty()) throw IoError("no dataset configured (set dataset = <manifest.jsonl>)");
  auto pairs = synth::load_dataset(config.dataset);
  if (config.holdout >= pairs.size()) throw ConfigError("holdout must leave at least one training pair");
  Split s;
  const std::size_t n_train = pairs.size() - config.holdout;
  s.train.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.holdout.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_train), pairs.end());
  return s;
}

SoftPoolNet load_model(const RunConfig& config, const std::string& checkpoint) {
  const std::string path = checkpoint.empty() ? config.checkpoint : checkpoint;
  return SoftPoolNet::from_parameters(config.architecture(), read_checkpoint(path));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_file_atomic(path, text);
  }
}

int cmd_synth(const Common& c, std::size_t count, const std::vector<std::string>& classes) {
  const RunConfig config = load_config(c);
  if (c.out.empty()) throw ConfigError("synth needs --out <directory>");
  synth::DatasetOptions opt;
  opt.count = count;
  opt.fine_count = config.fine_count;
  opt.partial_count = config.n_in;
  opt.seed = config.seed;
  if (!classes.empty()) {
    opt.classes.clear();
    for (const auto& name : classes) opt.classes.push_back(synth::parse_class(name));
  }
  const auto manifest = synth::write_dataset(c.out, synth::generate_pairs(opt));
  std::cout << "wrote " << count << " pairs, manifest " << manifest.string() << '\n';
  return kOk;
}

int cmd_train(const Common& c) {
  RunConfig config = load_config(c);
  const Split split = load_split(config);
  TrainOptions opt;
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    config.checkpoint = (fs::path(c.out) / "model.ckpt").string();
    opt.loss_csv = fs::path(c.out) / "losses.csv";
    io::write_file_atomic(fs::path(c.out) / "config.txt", serialize_config(config));
  } else {
    opt.loss_csv = config.checkpoint + ".losses.csv";
  }
  opt.checkpoint = config.checkpoint;
  opt.holdout_every_epoch = true;
  opt.on_epoch = [](std::size_t epoch, double ch) {
    std::printf("epoch %zu holdout chamfer x1e3 %.4f\n", epoch, ch * 1e3);
    std::fflush(stdout);
  };
  const auto train_items = make_samples(split.train, config.n_in, derive_seed(config.seed, 1));
  const auto holdout_items = make_samples(split.holdout, config.n_in, derive_seed(config.seed, 2));
  try {
    const TrainResult r = train(config, train_items, holdout_items, opt);
    std::printf("trained %zu steps, checkpoint %s\n", r.steps.size(), config.checkpoint.c_str());
  } catch (const NumericError& e) {
    std::fprintf(stderr, "training aborted: %s; last good checkpoint kept at %s\n", e.what(), config.checkpoint.c_str());
    return kFailed;
  }
  return kOk;
}

int cmd_complete(const Common& c, const std::string& input, const std::string& checkpoint,
                 const std::string& format) {
  const RunConfig config = load_config(c);
  const SoftPoolNet model = load_model(config, checkpoint);
  const PointCloud cloud = prepare_input(io::read_point_cloud(input), config.n_in, config.seed);
  const Completion out = model.complete(cloud);
  const std::string prefix = c.out.empty() ? fs::path(input).replace_extension().string() : c.out;
  io::write_point_cloud(prefix + ".coarse." + format, out.coarse);
  io::write_point_cloud(prefix + ".fine." + format, out.fine);
  // Every decoder block belongs to one region, so a point's region is its block.
  std::vector<std::size_t> regions(out.fine.size());
  const std::size_t per_region = out.fine.size() / config.n_f;
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i] = i / per_region;
  io::write_indices(prefix + ".regions.txt", regions);
  std::printf("coarse %zu points, fine %zu points -> %s.{coarse,fine}.%s\n", out.coarse.size(), out.fine.size(),
              prefix.c_str(), format.c_str());
  return kOk;
}

int cmd_metrics(const Common& c, const std::string& checkpoint) {
  const RunConfig config = load_config(c);
  const SoftPoolNet model = load_model(config, checkpoint);
  const Split split = load_split(config);
  if (split.holdout.empty()) throw ConfigError("metrics needs holdout > 0");
  eval::EvalOptions opt;
  opt.emd_points = config.emd_points;
  opt.seed = config.seed;
  opt.threads = config.threads;
  const auto report = eval::evaluate(model, split.holdout, split.train, opt);
  std::cout << report.to_text();
  if (!c.out.empty()) io::write_file_atomic(c.out, report.to_csv());
  return kOk;
}

int cmd_classify(const Common& c, const std::string& checkpoint) {
  const RunConfig config = load_config(c);
  const SoftPoolNet model = load_model(config, checkpoint);
  const Split split = load_split(config);
  if (split.holdout.empty()) throw ConfigError("classify needs holdout > 0");
  auto encode = [&](const std::vector<synth::ScanPair>& pairs, std::vector<std::vector<double>>& x,
                    std::vector<int>& y) {
    for (const auto& p : pairs) {
      x.push_back(eval::descriptor(model, p.partial));
      y.push_back(static_cast<int>(p.spec.kind));
    }
  };
  std::vector<std::vector<double>> train_x, test_x;
  std::vector<int> train_y, test_y;
  encode(split.train, train_x, train_y);
  encode(split.holdout, test_x, test_y);
  const auto result = eval::classify_descriptor(train_x, train_y, test_x, test_y, {1e-3, 200, config.seed});
  TextTable t;
  t.header = {"Method", "Train", "Test", "Accuracy"};
  t.rows.push_back({"SoftPoolNet + linear SVM", std::to_string(train_x.size()), std::to_string(test_x.size()),
                    fixed(100.0 * result.accuracy, 2) + "%"});
  std::cout << t.to_text();
  if (!c.out.empty()) io::write_file_atomic(c.out, t.to_csv());
  return kOk;
}

int cmd_ablate(const Common& c, const std::string& sweep_name) {
  const auto sweep = ablation::parse_sweep(sweep_name);
  const RunConfig config = load_config(c);
  const Split split = load_split(config);
  if (split.holdout.empty()) throw ConfigError("ablate needs holdout > 0");
  const auto train_items = make_samples(split.train, config.n_in, derive_seed(config.seed, 1));
  const auto test_items = make_samples(split.holdout, config.n_in, derive_seed(config.seed, 2));
  const auto result = ablation::run(sweep, config, train_items, test_items, [](const ablation::CellResult& r) {
    std::printf("%s %s: chamfer x1e3 %.4f, L_inter %.4f\n", r.cell.row.c_str(), r.cell.column.c_str(),
                r.chamfer * 1e3, r.inter);
    std::fflush(stdout);
  });
  const TextTable t = result.table();
  std::cout << '\n' << t.to_text();
  if (!c.out.empty()) io::write_file_atomic(c.out, fs::path(c.out).extension() == ".csv" ? t.to_csv() : t.to_text());
  return kOk;
}

int cmd_check(const Common& c, bool inject) {
  const RunConfig config = load_config(c);
  verify::Options opt;
  opt.seed = config.seed;
  opt.threads = c.threads.value_or(4);
  opt.inject_intra_sign_error = inject;
  bool ok = true;
  std::string report;
  for (const auto& r : verify::run_checks(opt)) {
    ok = ok && r.passed;
    report += std::string(r.passed ? "PASS " : "FAIL ") + r.name + "  " + r.detail + '\n';
  }
  std::cout << report << (ok ? "all checks passed\n" : "verification FAILED\n");
  if (!c.out.empty()) io::write_file_atomic(c.out, report);
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SoftPool point-cloud completion: train, complete, evaluate, ablate and verify"};
  app.require_subcommand(1);

  Common common;
  std::size_t count = 200;
  std::vector<std::string> classes;
  std::string input, checkpoint, format = "ply", sweep;
  bool inject = false;

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scan-pair dataset");
  add_common(synth_cmd, common);
  synth_cmd->add_option("--count", count, "number of pairs");
  synth_cmd->add_option("--classes", classes, "shape classes (plane-slab box sphere cylinder two-leg-table four-leg-table)")
      ->delimiter(',');

  auto* train_cmd = app.add_subcommand("train", "train a model on the configured dataset");
  add_common(train_cmd, common);

  auto* complete_cmd = app.add_subcommand("complete", "complete one partial point cloud");
  add_common(complete_cmd, common);
  complete_cmd->add_option("input", input, "input .xyz or .ply")->required();
  complete_cmd->add_option("--checkpoint", checkpoint, "checkpoint (defaults to the config's)");
  complete_cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"ply", "xyz"}));

  auto* metrics_cmd = app.add_subcommand("metrics", "Chamfer, EMD, fidelity, MMD and consistency on the holdout");
  add_common(metrics_cmd, common);
  metrics_cmd->add_option("--checkpoint", checkpoint, "checkpoint (defaults to the config's)");

  auto* classify_cmd = app.add_subcommand("classify", "linear classifier on soft-pool descriptors");
  add_common(classify_cmd, common);
  classify_cmd->add_option("--checkpoint", checkpoint, "checkpoint (defaults to the config's)");

  auto* ablate_cmd = app.add_subcommand("ablate", "run an ablation sweep");
  add_common(ablate_cmd, common);
  ablate_cmd->add_option("--sweep", sweep, "tau, regions, boundary-weight or row-range")->required();

  auto* check_cmd = app.add_subcommand("check-grad", "run the verification suite");
  check_cmd->alias("check");
  add_common(check_cmd, common);
  check_cmd->add_flag("--inject-intra-sign-error", inject, "flip the intra-entropy gradient (mutation test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(common, count, classes);
    if (*train_cmd) return cmd_train(common);
    if (*complete_cmd) return cmd_complete(common, input, checkpoint, format);
    if (*metrics_cmd) return cmd_metrics(common, checkpoint);
    if (*classify_cmd) return cmd_classify(common, checkpoint);
    if (*ablate_cmd) return cmd_ablate(common, sweep);
    if (*check_cmd) return cmd_check(common, inject);
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailed;
  }
  return kUsage;
}
