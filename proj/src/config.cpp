#include "wavesim/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "wavesim/errors.hpp"
#include "wavesim/ingest.hpp"

namespace wavesim {

namespace {

using Json = nlohmann::ordered_json;

const ConfigKey* find_key(const std::string& path) {
  for (const auto& key : config_keys()) {
    if (key.path == path) return &key;
  }
  return nullptr;
}

const char* kind_name(ValueKind kind) {
  switch (kind) {
    case ValueKind::string: return "a string";
    case ValueKind::integer: return "an integer";
    case ValueKind::number: return "a number";
    case ValueKind::boolean: return "a boolean";
    case ValueKind::label: return "a class name or index";
  }
  return "a value";
}

bool accepts(ValueKind kind, const nlohmann::json& v) {
  switch (kind) {
    case ValueKind::string: return v.is_string();
    case ValueKind::integer: return v.is_number_integer();
    case ValueKind::number: return v.is_number();
    case ValueKind::boolean: return v.is_boolean();
    case ValueKind::label: return v.is_string() || v.is_number_integer();
  }
  return false;
}

void flatten(const nlohmann::json& node, const std::string& prefix, Json& values) {
  if (!node.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [name, value] : node.items()) {
    const std::string path = prefix.empty() ? name : prefix + "." + name;
    const ConfigKey* key = find_key(path);
    if (value.is_object()) {
      if (key) throw UsageError("config key '" + path + "' expects " + kind_name(key->kind) + ", got an object");
      bool is_section = false;
      for (const auto& k : config_keys()) is_section = is_section || k.path.rfind(path + ".", 0) == 0;
      if (!is_section) throw UsageError("unknown config key '" + path + "'");
      flatten(value, path, values);
      continue;
    }
    if (!key) throw UsageError("unknown config key '" + path + "'");
    if (!value.is_null() && !accepts(key->kind, value)) {
      throw UsageError("config key '" + path + "' expects " + kind_name(key->kind));
    }
    values[path] = value;
  }
}

long long parse_integer(const std::string& path, const std::string& text) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw UsageError("config key '" + path + "' expects an integer, got '" + text + "'");
  }
  return v;
}

std::filesystem::path dataset_path(const RunConfig& config, bool test) {
  if (test && !config.is_null("dataset.test_path")) return config.str("dataset.test_path");
  return config.str("dataset.path");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"dataset.format", ValueKind::string, "mnist", "cifar10 | cifar100 | mnist | image_dir"},
      {"dataset.path", ValueKind::string, "", "dataset directory"},
      {"dataset.test_path", ValueKind::string, nullptr, "directory of the test set (default: dataset.path)"},
      {"dataset.test_format", ValueKind::string, nullptr, "format of the test set (default: dataset.format)"},
      {"dataset.split", ValueKind::string, "train", "train | test"},
      {"dataset.class_filter", ValueKind::label, nullptr, "keep one class, by name or index"},
      {"dataset.label_mode", ValueKind::string, "fine", "CIFAR-100 labels: fine | coarse"},
      {"dataset.height", ValueKind::integer, 512, "image_dir target height"},
      {"dataset.width", ValueKind::integer, 662, "image_dir target width"},
      {"dataset.limit", ValueKind::integer, nullptr, "keep only the first N images after filtering"},
      {"wavelet.basis", ValueKind::string, "db2", "haar | db2"},
      {"wavelet.levels", ValueKind::integer, 1, "decomposition depth"},
      {"selection.tau", ValueKind::number, 1e5, "condition ceiling for column selection when n > d"},
      {"selection.stop_ratio", ValueKind::number, 0.0, "rank tolerance for column selection when n <= d (0 = off)"},
      {"selection.condition", ValueKind::string, "auto", "condition number mode: auto | exact | fast"},
      {"clustering.method", ValueKind::string, "kmeans", "kmeans | agglomerative | spectral"},
      {"clustering.n_c", ValueKind::integer, nullptr, "cluster count (default: eigen-gap rule)"},
      {"clustering.seed", ValueKind::integer, 0, "seed for every random choice"},
      {"clustering.restarts", ValueKind::integer, 10, "k-means restarts"},
      {"clustering.distance_cutoff", ValueKind::number, 0.0, "agglomerative linkage distance"},
      {"clustering.per_class", ValueKind::boolean, false, "cluster each class separately"},
      {"similarity.measure", ValueKind::string, "ssim", "ssim | cosine | gaussian"},
      {"similarity.sigma", ValueKind::number, nullptr, "Gaussian kernel width (default: median distance)"},
      {"similarity.ssim.k1", ValueKind::number, 0.01, "SSIM luminance constant"},
      {"similarity.ssim.k2", ValueKind::number, 0.03, "SSIM contrast constant"},
      {"similarity.ssim.dynamic_range", ValueKind::number, 1.0, "SSIM dynamic range L"},
      {"similarity.ssim.window_size", ValueKind::integer, 11, "SSIM Gaussian window, odd"},
      {"similarity.ssim.window_sigma", ValueKind::number, 1.5, "SSIM Gaussian window sigma"},
      {"similarity.ssim.alpha", ValueKind::number, 1.0, "SSIM luminance exponent"},
      {"similarity.ssim.beta", ValueKind::number, 1.0, "SSIM contrast exponent"},
      {"similarity.ssim.gamma", ValueKind::number, 1.0, "SSIM structure exponent"},
      {"graph.gamma", ValueKind::number, 0.4, "eigen-gap threshold"},
      {"graph.laplacian", ValueKind::string, "unnormalized", "unnormalized | normalized"},
      {"graph.edge_threshold", ValueKind::number, 0.5, "DOT edge threshold in [-1, 1]"},
      {"thresholds.near_identical", ValueKind::number, 0.9, "cross-set near-identical similarity"},
      {"thresholds.dedupe", ValueKind::number, 0.95, "dedupe similarity threshold"},
      {"output_dir", ValueKind::string, nullptr, "output directory (default: $WAVESIM_OUTPUT_DIR or wavesim_out)"},
  };
  return keys;
}

RunConfig::RunConfig() : values_(Json::object()) {
  for (const auto& key : config_keys()) values_[key.path] = key.default_value;
}

void RunConfig::merge(const nlohmann::json& document) { flatten(document, "", values_); }

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config file not found: " + path.string());
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  merge(document);
}

void RunConfig::set_text(const std::string& path, const std::string& text) {
  const ConfigKey* key = find_key(path);
  if (!key) throw UsageError("unknown config key '" + path + "'");
  if (text == "null") {
    values_[path] = nullptr;
    return;
  }
  switch (key->kind) {
    case ValueKind::string: values_[path] = text; break;
    case ValueKind::integer: values_[path] = parse_integer(path, text); break;
    case ValueKind::number: {
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (text.empty() || *end != '\0' || errno == ERANGE) {
        throw UsageError("config key '" + path + "' expects a number, got '" + text + "'");
      }
      values_[path] = v;
      break;
    }
    case ValueKind::boolean:
      if (text == "true" || text == "1") {
        values_[path] = true;
      } else if (text == "false" || text == "0") {
        values_[path] = false;
      } else {
        throw UsageError("config key '" + path + "' expects true or false, got '" + text + "'");
      }
      break;
    case ValueKind::label: {
      const bool digits = !text.empty() && text.find_first_not_of("0123456789") == std::string::npos;
      values_[path] = digits ? Json(parse_integer(path, text)) : Json(text);
      break;
    }
  }
}

const nlohmann::ordered_json& RunConfig::get(const std::string& path) const {
  if (!values_.contains(path)) throw UsageError("unknown config key '" + path + "'");
  return values_.at(path);
}

std::string RunConfig::str(const std::string& path) const {
  const auto& v = get(path);
  if (!v.is_string()) throw UsageError("config key '" + path + "' is not set");
  return v.get<std::string>();
}

long long RunConfig::integer(const std::string& path) const {
  const auto& v = get(path);
  if (!v.is_number_integer()) throw UsageError("config key '" + path + "' is not set");
  return v.get<long long>();
}

double RunConfig::number(const std::string& path) const {
  const auto& v = get(path);
  if (!v.is_number()) throw UsageError("config key '" + path + "' is not set");
  return v.get<double>();
}

bool RunConfig::flag(const std::string& path) const {
  const auto& v = get(path);
  if (!v.is_boolean()) throw UsageError("config key '" + path + "' is not set");
  return v.get<bool>();
}

void RunConfig::validate() const {
  const auto one_of = [&](const std::string& path, std::initializer_list<const char*> allowed) {
    const std::string v = str(path);
    for (const char* a : allowed) {
      if (v == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    throw UsageError("config key '" + path + "' must be one of " + list + "; got '" + v + "'");
  };
  const auto require = [](bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
  };
  one_of("dataset.format", {"cifar10", "cifar100", "mnist", "image_dir"});
  if (!is_null("dataset.test_format")) one_of("dataset.test_format", {"cifar10", "cifar100", "mnist", "image_dir"});
  one_of("dataset.split", {"train", "test"});
  one_of("dataset.label_mode", {"fine", "coarse"});
  one_of("wavelet.basis", {"haar", "db2"});
  one_of("selection.condition", {"auto", "exact", "fast"});
  one_of("clustering.method", {"kmeans", "agglomerative", "spectral"});
  one_of("similarity.measure", {"ssim", "cosine", "gaussian"});
  one_of("graph.laplacian", {"unnormalized", "normalized"});
  require(integer("dataset.height") > 0 && integer("dataset.width") > 0, "dataset.height and dataset.width must be positive");
  require(is_null("dataset.limit") || integer("dataset.limit") > 0, "dataset.limit must be positive");
  require(integer("wavelet.levels") >= 1, "wavelet.levels must be at least 1");
  require(number("selection.tau") > 1.0, "selection.tau must exceed 1");
  require(number("selection.stop_ratio") >= 0.0 && number("selection.stop_ratio") <= 1.0, "selection.stop_ratio must lie in [0, 1]");
  require(is_null("clustering.n_c") || integer("clustering.n_c") >= 1, "clustering.n_c must be at least 1");
  require(integer("clustering.seed") >= 0, "clustering.seed must be nonnegative");
  require(integer("clustering.restarts") >= 1, "clustering.restarts must be at least 1");
  require(number("clustering.distance_cutoff") >= 0.0, "clustering.distance_cutoff must be nonnegative");
  require(is_null("similarity.sigma") || number("similarity.sigma") > 0.0, "similarity.sigma must be positive");
  similarity_options(*this).ssim.validate();
  require(number("graph.gamma") > 0.0, "graph.gamma must be positive");
  const double edge = number("graph.edge_threshold");
  require(edge >= -1.0 && edge <= 1.0, "graph.edge_threshold must lie in [-1, 1]");
  const double dedupe = number("thresholds.dedupe");
  require(dedupe > -1.0 && dedupe <= 1.0, "thresholds.dedupe must lie in (-1, 1]");
}

nlohmann::ordered_json RunConfig::to_json() const {
  Json out = Json::object();
  for (const auto& key : config_keys()) {
    Json* node = &out;
    std::string rest = key.path;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      node = &(*node)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = values_.at(key.path);
  }
  return out;
}

LabeledDataset load_dataset(const RunConfig& config, bool test) {
  const bool own_format = test && !config.is_null("dataset.test_format");
  const std::string format = config.str(own_format ? "dataset.test_format" : "dataset.format");
  const std::filesystem::path path = dataset_path(config, test);
  if (path.empty()) throw UsageError("dataset not found: dataset.path is empty");
  const Split split = test ? Split::test : (config.str("dataset.split") == "test" ? Split::test : Split::train);

  LabeledDataset data;
  if (format == "mnist") {
    data = load_mnist_dir(path, split);
  } else if (format == "cifar10") {
    data = load_cifar10(path, split);
  } else if (format == "cifar100") {
    data = load_cifar100(path, split, config.str("dataset.label_mode") == "coarse" ? LabelMode::coarse : LabelMode::fine);
  } else {
    data = load_image_dir(path, static_cast<int>(config.integer("dataset.height")), static_cast<int>(config.integer("dataset.width")));
  }

  const auto& filter = config.get("dataset.class_filter");
  if (!filter.is_null()) {
    int label = -1;
    if (filter.is_string()) {
      label = data.class_index(filter.get<std::string>());
      if (label < 0) throw UsageError("unknown class '" + filter.get<std::string>() + "'");
    } else {
      label = filter.get<int>();
      if (label < 0 || static_cast<std::size_t>(label) >= data.class_names.size()) {
        throw UsageError("class index " + std::to_string(label) + " out of range");
      }
    }
    data = data.filter_label(label);
    if (data.empty()) throw DataError("class '" + data.class_names[static_cast<std::size_t>(label)] + "' has no images");
  }
  if (!config.is_null("dataset.limit")) {
    const auto limit = static_cast<std::size_t>(config.integer("dataset.limit"));
    if (limit < data.size()) {
      std::vector<std::size_t> first(limit);
      for (std::size_t i = 0; i < limit; ++i) first[i] = i;
      data = data.subset(first);
    }
  }
  if (data.empty()) throw DataError("dataset " + path.string() + " holds no images");
  return data;
}

SimilarityOptions similarity_options(const RunConfig& config) {
  SimilarityOptions o;
  o.measure = parse_measure(config.str("similarity.measure"));
  o.ssim.k1 = config.number("similarity.ssim.k1");
  o.ssim.k2 = config.number("similarity.ssim.k2");
  o.ssim.dynamic_range = config.number("similarity.ssim.dynamic_range");
  o.ssim.window_size = static_cast<int>(config.integer("similarity.ssim.window_size"));
  o.ssim.window_sigma = config.number("similarity.ssim.window_sigma");
  o.ssim.alpha = config.number("similarity.ssim.alpha");
  o.ssim.beta = config.number("similarity.ssim.beta");
  o.ssim.gamma = config.number("similarity.ssim.gamma");
  o.basis = parse_basis(config.str("wavelet.basis"));
  o.levels = static_cast<int>(config.integer("wavelet.levels"));
  if (!config.is_null("similarity.sigma")) o.sigma = config.number("similarity.sigma");
  return o;
}

Algorithm1Options algorithm1_options(const RunConfig& config) {
  Algorithm1Options o;
  o.basis = parse_basis(config.str("wavelet.basis"));
  o.levels = static_cast<int>(config.integer("wavelet.levels"));
  o.tau = config.number("selection.tau");
  o.stop_ratio = config.number("selection.stop_ratio");
  o.method = parse_clustering_method(config.str("clustering.method"));
  if (!config.is_null("clustering.n_c")) o.n_c = static_cast<int>(config.integer("clustering.n_c"));
  o.gamma = config.number("graph.gamma");
  o.laplacian = parse_laplacian_kind(config.str("graph.laplacian"));
  o.distance_cutoff = config.number("clustering.distance_cutoff");
  o.seed = static_cast<std::uint64_t>(config.integer("clustering.seed"));
  o.restarts = static_cast<int>(config.integer("clustering.restarts"));
  return o;
}

Algorithm2Options algorithm2_options(const RunConfig& config) {
  Algorithm2Options o;
  o.similarity = similarity_options(config);
  o.gamma = config.number("graph.gamma");
  if (!config.is_null("clustering.n_c")) o.n_c = static_cast<int>(config.integer("clustering.n_c"));
  o.laplacian = parse_laplacian_kind(config.str("graph.laplacian"));
  o.seed = static_cast<std::uint64_t>(config.integer("clustering.seed"));
  o.restarts = static_cast<int>(config.integer("clustering.restarts"));
  return o;
}

}  // namespace wavesim
