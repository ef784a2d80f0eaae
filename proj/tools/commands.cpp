#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "cnnscope/bridge.hpp"
#include "cnnscope/model_io.hpp"

namespace cnnscope::cli {

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::Io ? kExitIo : kExitData; }

std::shared_ptr<const ModelBundle> load_model_path(const std::filesystem::path& manifest) {
  return std::make_shared<const ModelBundle>(load_model_files(manifest));
}

InferenceSession classify_files(const std::filesystem::path& model,
                                const std::filesystem::path& image) {
  auto bundle = load_model_path(model);
  const Bytes bytes = read_file(image);
  const InputImage img = ingest_image(bytes, bundle->descriptor.input_shape);
  return run_forward(bundle, img.pixels);
}

void cmd_classify(const std::filesystem::path& model, const std::filesystem::path& image,
                  std::ostream& out) {
  out << classification_table(classify_files(model, image));
}

std::string dump_text(const InferenceSession& session, const DumpOptions& options) {
  return activation_dump(session, options).dump() + "\n";
}

void cmd_dump(const std::filesystem::path& model, const std::filesystem::path& image,
              const std::filesystem::path& out_path, const DumpOptions& options) {
  write_text_file(out_path, dump_text(classify_files(model, image), options));
}

std::vector<std::filesystem::path> cmd_render(const std::filesystem::path& model,
                                              const std::filesystem::path& image,
                                              const std::string& layer,
                                              const std::filesystem::path& out_dir,
                                              ColorScope scope, int scale) {
  const InferenceSession session = classify_files(model, image);
  const std::size_t idx = session.model->descriptor.require_layer(layer);
  const ColorScale color = color_scale_for_layer(session, scope, idx);
  const Tensor3& t = session.activations[idx];
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (int c = 0; c < t.channels(); ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "_c%02d.png", c);
    const auto path = out_dir / (layer + name);
    write_file(path, encode_png(upscale(render_heatmap(t, c, color), scale)));
    written.push_back(path);
  }
  return written;
}

BenchStats summarize(std::vector<double> samples_ms) {
  BenchStats s;
  s.samples = samples_ms.size();
  if (samples_ms.empty()) return s;
  std::sort(samples_ms.begin(), samples_ms.end());
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
              static_cast<double>(samples_ms.size());
  const std::size_t n = samples_ms.size();
  s.median_ms = n % 2 ? samples_ms[n / 2] : 0.5 * (samples_ms[n / 2 - 1] + samples_ms[n / 2]);
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = samples_ms[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// One query of each introspection kind against every eligible layer.
void run_queries(const InferenceSession& s) {
  const auto& layers = s.model->descriptor.layers;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const Tensor3& out = s.activations[i];
    if (l.kind == LayerKind::Conv) decompose_conv_neuron(s, l.name, 0);
    if (l.kind == LayerKind::Conv || l.kind == LayerKind::ReLU || l.kind == LayerKind::MaxPool)
      trace_window(s, l.name, 0, out.height() / 2, out.width() / 2);
  }
  flatten_wiring(s, static_cast<int>(s.predicted_class()));
  color_scales(s, ColorScope::Global);
}

}  // namespace

BenchReport run_bench(const ModelBundle& model, const Tensor3& input, int iterations) {
  if (iterations < 1) throw Error(ErrorKind::Validation, "iterations must be >= 1");
  auto shared = std::make_shared<const ModelBundle>(model);
  BenchReport r;
  for (const auto& l : model.descriptor.layers) r.layer_names.push_back(l.name);
  r.layer_mean_ms.assign(r.layer_names.size(), 0.0);

  std::vector<double> fwd, ser, intro;
  std::vector<double> layer_seconds;
  for (int it = 0; it < iterations; ++it) {
    ForwardOptions opts;
    opts.layer_seconds = &layer_seconds;
    auto start = Clock::now();
    const InferenceSession s = run_forward(shared, input, opts);
    fwd.push_back(ms_since(start));
    for (std::size_t i = 0; i < layer_seconds.size(); ++i)
      r.layer_mean_ms[i] += layer_seconds[i] * 1e3 / iterations;
    if (it == 0) r.probabilities = s.probabilities;

    start = Clock::now();
    run_forward(shared, input, {ExecutionMode::Serial, nullptr});
    ser.push_back(ms_since(start));

    start = Clock::now();
    run_queries(run_forward(shared, input));
    intro.push_back(ms_since(start));
  }
  r.forward = summarize(fwd);
  r.forward_serial = summarize(ser);
  r.forward_introspection = summarize(intro);
  const double layer_sum = std::accumulate(r.layer_mean_ms.begin(), r.layer_mean_ms.end(), 0.0);
  r.layer_sum_ratio = r.forward.mean_ms > 0 ? layer_sum / r.forward.mean_ms : 1.0;
  return r;
}

void print_bench(const BenchReport& r, std::ostream& out) {
  char line[160];
  const auto row = [&](const char* label, const BenchStats& s) {
    std::snprintf(line, sizeof line, "%-28s %10.3f %10.3f %10.3f %8zu\n", label, s.mean_ms,
                  s.median_ms, s.p95_ms, s.samples);
    out << line;
  };
  std::snprintf(line, sizeof line, "%-28s %10s %10s %10s %8s\n", "pass (ms)", "mean", "median",
                "p95", "samples");
  out << line;
  row("forward (openmp)", r.forward);
  row("forward (serial)", r.forward_serial);
  row("forward + introspection", r.forward_introspection);
  out << "\nper-layer mean (openmp forward)\n";
  for (std::size_t i = 0; i < r.layer_names.size(); ++i) {
    std::snprintf(line, sizeof line, "  %-20s %10.4f ms\n", r.layer_names[i].c_str(),
                  r.layer_mean_ms[i]);
    out << line;
  }
  std::snprintf(line, sizeof line, "  layer sum / forward mean = %.4f\n", r.layer_sum_ratio);
  out << line;
}

void cmd_make_fixture(std::uint32_t seed, bool zero, const std::filesystem::path& manifest_out) {
  const auto desc = tiny_vgg_descriptor();
  ModelBundle b = zero ? make_zero_model(desc) : make_fixture_model(seed, desc);
  save_model_files(b, manifest_out);
}

void cmd_bridge(std::istream& in, std::ostream& out) {
  Bridge bridge;
  const SessionHandle h = bridge.open_session();
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out << bridge.handle_request_text(h, line) << "\n" << std::flush;
  }
}

}  // namespace cnnscope::cli
