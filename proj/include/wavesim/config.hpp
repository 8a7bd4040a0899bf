#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "wavesim/image.hpp"
#include "wavesim/pipeline.hpp"

namespace wavesim {

enum class ValueKind { string, integer, number, boolean, label };  // label: class name or index

struct ConfigKey {
  std::string path;  // dotted, e.g. "clustering.n_c"
  ValueKind kind;
  nlohmann::ordered_json default_value;  // null means "unset / automatic"
  std::string help;
};

/// Every recognised key, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Flat dotted-key configuration. JSON files are nested objects whose leaves
/// must all be known keys; flag overrides use the dotted names.
class RunConfig {
 public:
  RunConfig();

  /// Merges a nested JSON document. Unknown keys and type mismatches throw
  /// UsageError naming the key.
  void merge(const nlohmann::json& document);
  void merge_file(const std::filesystem::path& path);
  /// Parses `text` according to the key's kind ("null" clears nullable keys).
  void set_text(const std::string& path, const std::string& text);

  const nlohmann::ordered_json& get(const std::string& path) const;
  bool is_null(const std::string& path) const { return get(path).is_null(); }
  std::string str(const std::string& path) const;
  long long integer(const std::string& path) const;
  double number(const std::string& path) const;
  bool flag(const std::string& path) const;

  /// Semantic checks beyond types (ranges, enumerations).
  void validate() const;

  /// Nested echo of every key with its effective value.
  nlohmann::ordered_json to_json() const;

 private:
  nlohmann::ordered_json values_;  // flat: dotted path -> value
};

/// Loads the configured dataset, applying class filter and limit. `test`
/// selects the evaluation split (dataset.test_path when set).
LabeledDataset load_dataset(const RunConfig& config, bool test = false);

Algorithm1Options algorithm1_options(const RunConfig& config);
Algorithm2Options algorithm2_options(const RunConfig& config);
SimilarityOptions similarity_options(const RunConfig& config);

}  // namespace wavesim
