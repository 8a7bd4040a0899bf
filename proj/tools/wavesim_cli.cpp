// Command-line front end: one subcommand per analysis, a JSON config file and
// one --<dotted.key> flag per config key (flags win over the file).

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "wavesim/config.hpp"
#include "wavesim/errors.hpp"
#include "wavesim/graph.hpp"
#include "wavesim/matrix_io.hpp"
#include "wavesim/parallel.hpp"
#include "wavesim/pipeline.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Invocation {
  std::string config_file;
  std::map<std::string, CLI::Option*> overrides;
  std::map<std::string, std::string> values;
};

struct Context {
  wavesim::RunConfig config;
  fs::path out;
  std::string stage = "config";
};

std::string default_text(const wavesim::ConfigKey& key) {
  if (key.default_value.is_null()) return "null";
  if (key.default_value.is_string()) return key.default_value.get<std::string>();
  return key.default_value.dump();
}

fs::path output_dir(const wavesim::RunConfig& config) {
  if (!config.is_null("output_dir")) return config.str("output_dir");
  if (const char* env = std::getenv("WAVESIM_OUTPUT_DIR"); env && *env) return env;
  return "wavesim_out";
}

Json dataset_echo(const wavesim::LabeledDataset& data, const wavesim::RunConfig& config) {
  Json j = {{"format", config.str("dataset.format")}, {"images", data.size()}};
  if (!config.is_null("dataset.class_filter") && !data.empty()) {
    const int label = data.labels.front();
    j["class"] = {{"index", label}, {"name", data.class_names[static_cast<std::size_t>(label)]}, {"size", data.size()}};
  }
  if (!data.empty()) {
    const auto& img = data.images.front();
    j["shape"] = {img.height, img.width, img.channels};
  }
  return j;
}

void write_json(const fs::path& path, const Json& j) { wavesim::write_text(path, j.dump(2) + "\n"); }

void write_report(Context& ctx, const wavesim::AnalysisReport& report, const wavesim::LabeledDataset& data) {
  ctx.stage = "output";
  Json j = wavesim::to_json(report);
  j["dataset"] = dataset_echo(data, ctx.config);
  j["config"] = ctx.config.to_json();
  j["digest"] = wavesim::report_digest(report);
  write_json(ctx.out / "report.json", j);
  wavesim::write_text(ctx.out / "kept_ids.csv", wavesim::kept_ids_csv(report));
  wavesim::write_text(ctx.out / "groups.csv", wavesim::groups_csv(report));
  std::printf("%s: %zu images, %zu kept, %zu redundant groups, %zu influential groups (digest %s)\n",
              report.procedure.c_str(), data.size(), report.kept_ids.size(), report.redundant_groups.size(),
              report.influential_groups.size(), j["digest"].get<std::string>().c_str());
}

void write_similarity(const fs::path& stem, const wavesim::SimilarityMatrix& s) {
  wavesim::save(fs::path(stem.string() + ".bin"), s);
  wavesim::write_matrix_csv(fs::path(stem.string() + ".csv"), s.values);
}

wavesim::LabeledDataset load(Context& ctx, bool test = false) {
  ctx.stage = test ? "ingest (test)" : "ingest";
  return wavesim::load_dataset(ctx.config, test);
}

int cmd_stats(Context& ctx) {
  const auto data = load(ctx);
  ctx.stage = "wavelet";
  const auto coeffs = wavesim::decompose_dataset(data, wavesim::parse_basis(ctx.config.str("wavelet.basis")),
                                                 static_cast<int>(ctx.config.integer("wavelet.levels")));
  ctx.stage = "conditioning";
  const std::string mode_text = ctx.config.str("selection.condition");
  const auto mode = mode_text == "exact" ? wavesim::ConditionMode::exact
                    : mode_text == "fast" ? wavesim::ConditionMode::fast
                                          : wavesim::ConditionMode::automatic;
  const auto stats = wavesim::coefficient_stats(coeffs, ctx.config.number("selection.tau"), mode);
  ctx.stage = "output";
  Json j = wavesim::to_json(stats);
  j["basis"] = wavesim::to_string(coeffs.basis);
  j["levels_used"] = coeffs.levels;
  j["dataset"] = dataset_echo(data, ctx.config);
  j["config"] = ctx.config.to_json();
  write_json(ctx.out / "coeff_stats.json", j);
  std::printf("stats: %lldx%lld, %zu zero columns, condition %s\n", static_cast<long long>(stats.rows),
              static_cast<long long>(stats.cols), stats.zero_columns.size(), j["condition"]["value"].dump().c_str());
  return 0;
}

int cmd_alg1(Context& ctx) {
  const auto data = load(ctx);
  ctx.stage = "algorithm1";
  const auto options = wavesim::algorithm1_options(ctx.config);
  const auto report = ctx.config.flag("clustering.per_class")
                          ? wavesim::per_class(data, [&](const wavesim::LabeledDataset& part) { return wavesim::algorithm1(part, options); })
                          : wavesim::algorithm1(data, options);
  write_report(ctx, report, data);
  return 0;
}

int cmd_alg2(Context& ctx) {
  const auto data = load(ctx);
  ctx.stage = "algorithm2";
  const auto result = wavesim::algorithm2(data, wavesim::algorithm2_options(ctx.config));
  write_report(ctx, result.report, data);
  write_similarity(ctx.out / "similarity", result.similarity);
  std::string spectrum = "index,eigenvalue\n";
  char line[64];
  for (Eigen::Index i = 0; i < result.spectrum.eigenvalues.size(); ++i) {
    std::snprintf(line, sizeof(line), "%lld,%.17g\n", static_cast<long long>(i), result.spectrum.eigenvalues(i));
    spectrum += line;
  }
  wavesim::write_text(ctx.out / "spectrum.csv", spectrum);
  wavesim::write_text(ctx.out / "n_c.txt", std::to_string(result.n_c) + "\n");
  std::printf("n_c = %d\n", result.n_c);
  return 0;
}

int cmd_cross(Context& ctx) {
  const auto test = load(ctx, true);
  wavesim::RunConfig train_config = ctx.config;
  train_config.set_text("dataset.split", "train");
  ctx.stage = "ingest";
  const auto train = wavesim::load_dataset(train_config, false);
  ctx.stage = "similarity";
  const auto cross = wavesim::cross_similarity(train, test, wavesim::similarity_options(ctx.config));
  ctx.stage = "report";
  const auto report = wavesim::cross_set_report(cross, train.labels, test.labels, ctx.config.number("thresholds.near_identical"));
  ctx.stage = "output";
  Json j = wavesim::to_json(report);
  j["train"] = dataset_echo(train, ctx.config);
  j["test"] = dataset_echo(test, ctx.config);
  j["config"] = ctx.config.to_json();
  j["digest"] = wavesim::fnv1a_hex(wavesim::to_json(report).dump());
  write_json(ctx.out / "cross_report.json", j);
  write_similarity(ctx.out / "cross_matrix", cross);
  std::printf("cross: %zu test x %zu train, near-identical fraction %.4f at %.4g\n", test.size(), train.size(),
              report.near_identical_fraction, report.near_identical_threshold);
  return 0;
}

int cmd_dedupe(Context& ctx) {
  const auto data = load(ctx);
  ctx.stage = "similarity";
  const auto s = wavesim::similarity_matrix(data, wavesim::similarity_options(ctx.config));
  ctx.stage = "dedupe";
  auto report = wavesim::dedupe_by_threshold(s, data.labels, ctx.config.number("thresholds.dedupe"));
  report.warnings.insert(report.warnings.begin(), data.warnings.begin(), data.warnings.end());
  write_report(ctx, report, data);
  write_similarity(ctx.out / "similarity", s);
  return 0;
}

int cmd_graph(Context& ctx) {
  const auto data = load(ctx);
  ctx.stage = "similarity";
  const auto s = wavesim::similarity_matrix(data, wavesim::similarity_options(ctx.config));
  ctx.stage = "graph";
  const std::string dot = wavesim::export_dot(s, ctx.config.number("graph.edge_threshold"));
  const auto isolation = wavesim::isolation_scores(s);
  ctx.stage = "output";
  wavesim::write_text(ctx.out / "graph.dot", dot);
  std::string csv = "rank,source_id,score\n";
  char score[32];
  for (std::size_t r = 0; r < isolation.ranking.size(); ++r) {
    const std::size_t i = isolation.ranking[r];
    std::snprintf(score, sizeof(score), "%.6g", isolation.score[i]);
    csv += std::to_string(r) + "," + s.row_ids[i] + "," + score + "\n";
  }
  wavesim::write_text(ctx.out / "isolation.csv", csv);
  write_similarity(ctx.out / "similarity", s);
  std::printf("graph: %zu nodes, most isolated %s (digest %s)\n", data.size(), s.row_ids[isolation.ranking.front()].c_str(),
              wavesim::fnv1a_hex(dot).c_str());
  return 0;
}

std::string key_listing() {
  std::string out = "Config keys (JSON file or --<key> flag, flags win):\n";
  for (const auto& key : wavesim::config_keys()) {
    out += "  " + key.path + " = " + default_text(key) + "  (" + key.help + ")\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Similarity analysis of image-classification datasets"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(key_listing() + "\nExit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.");
  std::size_t workers = wavesim::worker_count();
  app.add_option("--workers", workers, "worker threads (results do not depend on it)")->default_val(workers);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const Command commands[] = {
      {"alg1", "wavelet coefficients, column selection, clustering", cmd_alg1},
      {"alg2", "similarity matrix, Laplacian eigen-gaps, spectral clustering", cmd_alg2},
      {"cross", "train-vs-test similarity report", cmd_cross},
      {"dedupe", "threshold deduplication on the similarity matrix", cmd_dedupe},
      {"graph", "DOT graph and isolation scores", cmd_graph},
      {"stats", "coefficient-matrix shape, zero columns and conditioning", cmd_stats},
  };
  std::map<std::string, Invocation> invocations;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    Invocation& inv = invocations[cmd.name];
    sub->add_option("-c,--config", inv.config_file, "JSON config file");
    for (const auto& key : wavesim::config_keys()) {
      inv.overrides[key.path] = sub->add_option("--" + key.path, inv.values[key.path], key.help)->default_str(default_text(key));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const auto& cmd : commands) {
    CLI::App* sub = app.get_subcommand(cmd.name);
    if (!sub->parsed()) continue;
    Invocation& inv = invocations[cmd.name];
    Context ctx;
    try {
      if (workers < 1) throw wavesim::UsageError("--workers must be at least 1");
      wavesim::set_worker_count(workers);
      if (!inv.config_file.empty()) ctx.config.merge_file(inv.config_file);
      for (const auto& [path, option] : inv.overrides) {
        if (option->count() > 0) ctx.config.set_text(path, inv.values[path]);
      }
      ctx.config.validate();
      ctx.out = output_dir(ctx.config);
      return cmd.run(ctx);
    } catch (const wavesim::Error& e) {
      std::fprintf(stderr, "wavesim %s: %s: %s\n", cmd.name, ctx.stage.c_str(), e.what());
      return wavesim::exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
      std::fprintf(stderr, "wavesim %s: %s: %s\n", cmd.name, ctx.stage.c_str(), e.what());
      return 3;
    } catch (const fs::filesystem_error& e) {
      std::fprintf(stderr, "wavesim %s: %s: %s\n", cmd.name, ctx.stage.c_str(), e.what());
      return 3;
    } catch (const std::bad_alloc&) {
      std::fprintf(stderr, "wavesim %s: %s: out of memory\n", cmd.name, ctx.stage.c_str());
      return 4;
    }
  }
  return 2;
}
