// Copyright 2026 The MS-UNIQUE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "msunique/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "msunique/colorspace.hpp"
#include "msunique/error.hpp"
#include "msunique/evaluation.hpp"
#include "msunique/filterbank.hpp"
#include "msunique/imageio.hpp"
#include "msunique/patchpipe.hpp"
#include "msunique/scoring.hpp"

namespace msunique {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string images;
  int num_images = 0;
  int patches_per_image = 100;
  int patch_side = 8;
  std::string sizes = "81,121,169,400,625";
  int epochs = 400;
  double rho = 0.035;
  double beta = 5.0;
  double lambda = 0.003;
  double epsilon = kDefaultWhiteningEpsilon;
  double tau = kDefaultSuppressionTau;
  std::string loss_scale = "mean";
  std::int64_t seed = 0;
  std::string bank;
  std::string ref;
  std::string dist;
  std::string batch;
  std::string scores;
  std::string manifest;
  int bins = kDefaultHistogramBins;
  std::string out;
  std::string kind = "all";
};

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v < 1) {
      throw CLI::ValidationError("--sizes", "expected comma-separated positive integers");
    }
    sizes.push_back(v);
  }
  if (sizes.empty()) throw CLI::ValidationError("--sizes", "empty list");
  return sizes;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = lower(e.path().extension().string());
    if (ext == ".ppm" || ext == ".pnm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

FilterBank open_bank(const std::string& path) {
  try {
    return load_bank(path);
  } catch (const DataError& e) {
    throw CorruptArtifact(std::string("unreadable model bank: ") + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> config_echo(const FilterBank& bank) {
  return {
      {"patch_side", std::to_string(bank.patch_side)},
      {"epsilon", format_double(bank.whitening.epsilon)},
      {"rho", format_double(bank.config.rho)},
      {"beta", format_double(bank.config.beta)},
      {"lambda", format_double(bank.config.lambda)},
      {"epochs", std::to_string(bank.config.epochs)},
      {"seed", std::to_string(bank.config.seed)},
      {"tau", format_double(bank.suppression_tau)},
      {"sizes",
       [&] {
         std::string s;
         for (const auto& m : bank.models) {
           if (!s.empty()) s += ',';
           s += std::to_string(m.hidden());
         }
         return s;
       }()},
  };
}

struct KindCounts {
  int edge = 0, color = 0, neutral = 0;
};

KindCounts count_kinds(const std::vector<FilterLabel>& labels) {
  KindCounts c;
  for (const auto& l : labels) {
    if (l.kind == FilterKind::kEdge) ++c.edge;
    else if (l.kind == FilterKind::kColor) ++c.color;
    else ++c.neutral;
  }
  return c;
}

int cmd_train(const Flags& f, std::ostream& out) {
  TrainingConfig cfg;
  cfg.rho = f.rho;
  cfg.beta = f.beta;
  cfg.lambda = f.lambda;
  cfg.epochs = f.epochs;
  cfg.seed = f.seed;
  cfg.loss_scale = f.loss_scale == "sum" ? LossScale::kSum : LossScale::kMean;
  const std::vector<int> sizes = parse_sizes(f.sizes);

  std::vector<fs::path> files = list_images(f.images);
  if (files.empty()) throw DataError("empty corpus: no .ppm images in " + f.images);
  Rng rng(static_cast<std::uint64_t>(f.seed));
  if (f.num_images > 0 && std::size_t(f.num_images) < files.size()) {
    // Partial Fisher-Yates: the first num_images slots are the sample.
    for (std::size_t i = 0; i < std::size_t(f.num_images); ++i) {
      const std::size_t j = i + rng.index(files.size() - i);
      std::swap(files[i], files[j]);
    }
    files.resize(std::size_t(f.num_images));
  }

  const Eigen::Index dim = 3 * Eigen::Index(f.patch_side) * f.patch_side;
  PatchMatrix patches(dim, Eigen::Index(files.size()) * f.patches_per_image);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const YgcrImage img = to_ygcr(load_image(files[i]));
    patches.middleCols(Eigen::Index(i) * f.patches_per_image, f.patches_per_image) =
        extract_random_patches(img, f.patches_per_image, f.patch_side, rng);
  }
  out << "images=" << files.size() << " patches=" << patches.cols()
      << " dim=" << dim << '\n';

  BankTrainingOptions opt;
  opt.epsilon = f.epsilon;
  opt.suppression_tau = f.tau;
  std::vector<std::vector<double>> traces;
  const FilterBank bank = train_bank(patches, sizes, cfg, opt, &traces);
  save_bank(bank, f.out);

  for (const auto& [k, v] : config_echo(bank)) out << "config." << k << '=' << v << '\n';
  out << "config.loss_scale=" << f.loss_scale << '\n';
  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    const KindCounts c = count_kinds(bank.labels[i]);
    out << "model h=" << bank.models[i].hidden()
        << " initial_J=" << format_double(traces[i].front())
        << " final_J=" << format_double(traces[i].back())
        << " iterations=" << traces[i].size() - 1 << " edge=" << c.edge
        << " color=" << c.color << " neutral=" << c.neutral << '\n';
  }
  out << "wrote " << f.out << '\n';
  return kExitOk;
}

int cmd_score(const Flags& f, std::ostream& out) {
  const FilterBank bank = open_bank(f.bank);
  if (!f.batch.empty()) {
    if (f.out.empty()) throw CLI::ValidationError("--out", "required with --batch");
    const auto entries = parse_manifest(f.batch);
    std::vector<ScorePair> pairs;
    for (const auto& e : entries) pairs.push_back({e.distorted_path, e.reference_path});
    const auto records = score_batch(bank, pairs);
    write_scores_csv(records, f.out);
    out << "scored " << records.size() << " pairs, wrote " << f.out << '\n';
    return kExitOk;
  }
  if (f.ref.empty() || f.dist.empty()) {
    throw CLI::ValidationError("score", "needs --ref and --dist, or --batch");
  }
  const QualityRecord rec = quality_score(bank, load_image(f.ref), load_image(f.dist));
  out << "rho=" << format_double(rec.spearman_rho)
      << " score=" << format_double(rec.score) << '\n';
  return kExitOk;
}

// Score CSV joined to the manifest by row order.
Eigen::VectorXd read_scores(const fs::path& path,
                            const std::vector<SubjectiveEntry>& entries) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty scores file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : int(it - header.begin());
  };
  const int score_col = col("score");
  const int dist_col = col("dist_path");
  if (score_col < 0) throw DataError("scores file has no 'score' column");

  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (int(cells.size()) <= score_col) throw DataError("wrong column count in scores file");
    const std::size_t row = values.size();
    if (row >= entries.size()) throw DataError("scores file has more rows than the manifest");
    if (dist_col >= 0 && dist_col < int(cells.size()) &&
        fs::path(cells[std::size_t(dist_col)]).filename() !=
            entries[row].distorted_path.filename()) {
      throw DataError("scores file does not match manifest at row " +
                      std::to_string(row + 1));
    }
    double v = 0.0;
    const std::string& s = cells[std::size_t(score_col)];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DataError("non-numeric score in scores file");
    }
    values.push_back(v);
  }
  if (values.size() != entries.size()) {
    throw DataError("scores file has fewer rows than the manifest");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
}

int cmd_evaluate(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.bank.empty() == f.scores.empty()) {
    throw CLI::ValidationError("evaluate", "needs exactly one of --bank or --scores");
  }
  const auto entries = parse_manifest(f.manifest);
  Eigen::VectorXd objective;
  std::vector<std::pair<std::string, std::string>> config;
  if (!f.bank.empty()) {
    const FilterBank bank = open_bank(f.bank);
    std::vector<ScorePair> pairs;
    for (const auto& e : entries) pairs.push_back({e.distorted_path, e.reference_path});
    const auto records = score_batch(bank, pairs);
    objective.resize(Eigen::Index(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) objective(Eigen::Index(i)) = records[i].score;
    config = config_echo(bank);
  } else {
    objective = read_scores(f.scores, entries);
    config = {{"scores", f.scores}};
  }
  config.emplace_back("bins", std::to_string(f.bins));

  const EvaluationReport report = evaluate(objective, entries, f.bins);
  if (!report.outlier_ratio) {
    err << "notice: outlier ratio omitted (manifest lacks subjective std)\n";
  }
  const std::string text = format_report_text(report, config);
  out << text;
  if (!f.out.empty()) {
    auto write = [](const fs::path& p, const std::string& s) {
      std::ofstream o(p);
      if (!o) throw DataError("cannot write file: " + p.string());
      o << s;
    };
    write(f.out, text);
    write(f.out + ".csv", format_report_csv(report));
    Eigen::VectorXd subjective(Eigen::Index(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
      subjective(Eigen::Index(i)) = entries[i].subjective_score;
    }
    export_scatter(objective, report.fit.regressed, subjective, f.out + ".scatter.csv");
  }
  return kExitOk;
}

int cmd_inspect(const Flags& f, std::ostream& out) {
  const FilterBank bank = open_bank(f.bank);
  for (const auto& [k, v] : config_echo(bank)) out << "config." << k << '=' << v << '\n';
  out << "config.loss_scale=not recorded\n";
  out << "models=" << bank.models.size() << '\n';
  out << "filters=" << bank.total_filters() << '\n';
  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    const KindCounts c = count_kinds(bank.labels[i]);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& l : bank.labels[i]) {
      lo = std::min(lo, l.kurtosis);
      hi = std::max(hi, l.kurtosis);
    }
    out << "model index=" << i << " h=" << bank.models[i].hidden()
        << " edge=" << c.edge << " color=" << c.color << " neutral=" << c.neutral
        << " kurtosis_min=" << format_double(lo)
        << " kurtosis_max=" << format_double(hi) << '\n';
  }
  return kExitOk;
}

int cmd_export_filters(const Flags& f, std::ostream& out) {
  const FilterBank bank = open_bank(f.bank);
  MosaicSelection sel = MosaicSelection::kAll;
  if (f.kind == "edge") sel = MosaicSelection::kEdge;
  if (f.kind == "color") sel = MosaicSelection::kColor;
  const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    const fs::path path = dir / ("filters_h" + std::to_string(bank.models[i].hidden()) +
                                 "_" + f.kind + ".ppm");
    const MosaicLayout layout = export_filter_mosaic(bank, i, path, sel);
    out << "model h=" << bank.models[i].hidden() << " tiles=" << layout.tiles
        << " grid=" << layout.columns << "x" << layout.rows << " wrote " << path.string()
        << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"MS-UNIQUE full-reference image quality estimator"};
  app.require_subcommand(1);
  Flags f;

  auto* train = app.add_subcommand("train", "Train a multi-model filter bank");
  train->add_option("--images", f.images, "Directory of .ppm training images")->required();
  train->add_option("--num-images", f.num_images, "Random subset size (0 = all)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--patches-per-image", f.patches_per_image)
      ->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--patch-side", f.patch_side)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--sizes", f.sizes, "Hidden widths, comma-separated")->capture_default_str();
  train->add_option("--epochs", f.epochs)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--rho", f.rho)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  train->add_option("--beta", f.beta)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--lambda", f.lambda)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--epsilon", f.epsilon)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--tau", f.tau)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--loss-scale", f.loss_scale)
      ->check(CLI::IsMember({"mean", "sum"}))->capture_default_str();
  train->add_option("--seed", f.seed)->capture_default_str();
  train->add_option("--out", f.out, "Output bank file")->required();

  auto* score = app.add_subcommand("score", "Score a distorted image against its reference");
  score->add_option("--bank", f.bank)->required();
  score->add_option("--ref", f.ref);
  score->add_option("--dist", f.dist);
  score->add_option("--batch", f.batch, "Manifest CSV to score in bulk");
  score->add_option("--out", f.out, "Scores CSV (with --batch)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the validation protocol");
  evaluate_cmd->add_option("--manifest", f.manifest)->required();
  evaluate_cmd->add_option("--bank", f.bank);
  evaluate_cmd->add_option("--scores", f.scores, "Precomputed objective scores CSV");
  evaluate_cmd->add_option("--bins", f.bins)->check(CLI::PositiveNumber)->capture_default_str();
  evaluate_cmd->add_option("--out", f.out, "Report path (also writes .csv and .scatter.csv)");

  auto* inspect = app.add_subcommand("inspect", "Summarize a bank file");
  inspect->add_option("--bank", f.bank)->required();

  auto* export_cmd = app.add_subcommand("export-filters", "Write filter mosaics as PPM");
  export_cmd->add_option("--bank", f.bank)->required();
  export_cmd->add_option("--out", f.out, "Output directory");
  export_cmd->add_option("--kind", f.kind)
      ->check(CLI::IsMember({"edge", "color", "all"}))->capture_default_str();

  std::vector<const char*> argv{"msunique"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
    if (train->parsed()) return cmd_train(f, out);
    if (score->parsed()) return cmd_score(f, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(f, out, err);
    if (inspect->parsed()) return cmd_inspect(f, out);
    if (export_cmd->parsed()) return cmd_export_filters(f, out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const CorruptArtifact& e) {
    err << "error: " << e.what() << '\n';
    return kExitCorruptArtifact;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}

}  // namespace msunique
