#pragma once

#include <filesystem>
#include <string>

#include "skan/experiments.hpp"
#include "skan/report.hpp"

namespace skan {

// Raised for unknown keys or ill-typed values; `key` is the dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what) : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// JSON or TOML, chosen by extension (.json, .toml).
Json load_config_file(const std::filesystem::path& path);

// Recursive merge: objects merge key by key, anything else is replaced.
void merge_config(Json& base, const Json& overlay);

// Applies a "params" object onto existing parameters. `where` prefixes key
// names in error messages.
void apply_params(NeuronParams& params, const Json& j, const std::string& where = "params");

// Each builder starts from the named preset (or the defaults), then applies
// every key of `j`. Unknown keys raise ConfigError.
SimulationConfig simulation_config_from_json(const Json& j);
NormErrorConfig norm_config_from_json(const Json& j);
SweepConfig sweep_config_from_json(const Json& j);
RecognitionConfig recognition_config_from_json(const Json& j);
MnistConfig mnist_config_from_json(const Json& j);

// Fully resolved configs, as recorded in the run manifest.
Json to_json(const SimulationConfig& c);
Json to_json(const NormErrorConfig& c);
Json to_json(const SweepConfig& c);
Json to_json(const RecognitionConfig& c);
Json to_json(const MnistConfig& c);

}  // namespace skan
