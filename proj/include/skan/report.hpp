#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "skan/experiments.hpp"

namespace skan {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV. Doubles use shortest round-trip formatting so reruns are byte-stable.

std::string format_double(double x);

std::string norm_error_csv(const std::vector<NormErrorRow>& rows);
// Long format: one row per (point, synapse).
std::string sweep_csv(const SweepResult& result);
// Seed-0 weight traces: point, presentation, synapse, weight.
std::string sweep_trace_csv(const SweepResult& result);
std::string recognition_csv(const std::vector<RecognitionReport>& reports);
std::string recognition_summary_csv(const std::vector<RecognitionSummary>& rows);
std::string presentations_csv(const SimulationTrace& trace);
std::string grid_csv(std::span<const double> values, std::size_t rows, std::size_t cols);

// ---------------------------------------------------------------------------
// JSON.

Json to_json(const NeuronParams& p);
Json to_json(const SynapseState& s);
Json to_json(const NeuronState& s);
Json to_json(const PatternSpec& p);
Json to_json(const NoiseSpec& n);
Json to_json(const ProgramSpec& p);
Json to_json(const SimulationTrace& trace);
Json to_json(const MnistReport& report);

// ---------------------------------------------------------------------------
// Images and plots.

// Binary P5, linearly rescaled from [min, max] to [0, 255].
std::string pgm(std::span<const double> values, std::size_t rows, std::size_t cols);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec);
std::string heatmap_svg(std::span<const double> values, std::size_t rows, std::size_t cols,
                        const std::string& title);

// ---------------------------------------------------------------------------
// Run manifest and output.

// sha1 over "blob <size>\0<bytes>", as git hashes file contents.
std::string git_blob_hash(std::string_view bytes);

struct RunManifest {
  std::string tool_version;
  std::string command;
  Json config;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> input_checksums;
  std::string start_time;
  std::string end_time;
  std::vector<std::string> outputs;

  Json to_json() const;
};

// UTC ISO-8601. Honors SOURCE_DATE_EPOCH so reproducible runs can pin it.
std::string timestamp_now();

// Writes files under one directory and remembers their names in order.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);

  const std::filesystem::path& path() const { return dir_; }
  void write(const std::string& name, std::string_view bytes);
  void write_json(const std::string& name, const Json& value);
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

}  // namespace skan
