#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cnnscope/introspection.hpp"
#include "cnnscope/report.hpp"

namespace cnnscope::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitIo = 3;

int exit_code_for(ErrorKind kind);

std::shared_ptr<const ModelBundle> load_model_path(const std::filesystem::path& manifest);
InferenceSession classify_files(const std::filesystem::path& model,
                                const std::filesystem::path& image);

void cmd_classify(const std::filesystem::path& model, const std::filesystem::path& image,
                  std::ostream& out);

/// Canonical text of the dump: compact JSON, sorted keys, trailing newline.
std::string dump_text(const InferenceSession& session, const DumpOptions& options);
void cmd_dump(const std::filesystem::path& model, const std::filesystem::path& image,
              const std::filesystem::path& out_path, const DumpOptions& options);

/// Writes <out_dir>/<layer>_cNN.png per channel; returns the written paths.
std::vector<std::filesystem::path> cmd_render(const std::filesystem::path& model,
                                              const std::filesystem::path& image,
                                              const std::string& layer,
                                              const std::filesystem::path& out_dir,
                                              ColorScope scope, int scale);

struct BenchStats {
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
  std::size_t samples = 0;
};

BenchStats summarize(std::vector<double> samples_ms);

struct BenchReport {
  BenchStats forward;                // OpenMP kernels, activations retained
  BenchStats forward_serial;         // serial kernels
  BenchStats forward_introspection;  // forward + one query of each kind
  std::vector<std::string> layer_names;
  std::vector<double> layer_mean_ms;  // per-layer share of the OpenMP forward pass
  double layer_sum_ratio = 0;         // sum(layer_mean_ms) / forward.mean_ms
  std::vector<float> probabilities;   // of the benchmarked input (determinism check)
};

/// Times `iterations` forward passes. Without an image the deterministic
/// sample image (seed 0) is used.
BenchReport run_bench(const ModelBundle& model, const Tensor3& input, int iterations);
void print_bench(const BenchReport& report, std::ostream& out);

/// Writes a fixture bundle (manifest + weights next to it).
void cmd_make_fixture(std::uint32_t seed, bool zero, const std::filesystem::path& manifest_out);

/// Reads one JSON request per line from `in`, writes one response per line.
void cmd_bridge(std::istream& in, std::ostream& out);

}  // namespace cnnscope::cli
