// cnnscope: classify images, dump activations, render heatmaps, benchmark.

#include <iostream>

#include <CLI11.hpp>

#include "cnnscope/model_io.hpp"
#include "commands.hpp"

using namespace cnnscope;

int main(int argc, char** argv) {
  CLI::App app{"Introspectable CNN inference: classify, dump, render, bench"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string model_path, image_path, out_path, scope_name = "layer";
  std::uint32_t seed = 42;
  int scale = 1;
  app.add_option("--model", model_path, "Model manifest (JSON)");
  app.add_option("--image", image_path, "Input image (PNG or raw RGB8)");
  app.add_option("--out", out_path, "Output file or directory");
  app.add_option("--seed", seed, "Fixture seed")->capture_default_str();
  app.add_option("--scale", scale, "Integer nearest-neighbour upscale for rendered PNGs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--scope", scope_name, "Colormap scope")
      ->check(CLI::IsMember({"layer", "unit", "module", "global"}))
      ->capture_default_str();

  auto* classify = app.add_subcommand("classify", "Print class probabilities, descending");

  auto* dump = app.add_subcommand("dump", "Write every layer's activations as JSON");
  std::vector<std::string> dump_layers;
  bool include_intermediates = false;
  dump->add_option("--layers", dump_layers, "Only these layers")->delimiter(',');
  dump->add_flag("--include-intermediates", include_intermediates,
                 "Append conv decompositions and flatten wirings");

  auto* render = app.add_subcommand("render", "Write one heatmap PNG per channel of a layer");
  std::string layer;
  render->add_option("--layer", layer, "Layer name")->required();

  auto* bench = app.add_subcommand("bench", "Time forward passes");
  int iterations = 50;
  bench->add_option("--iterations", iterations, "Number of timed passes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* fixture = app.add_subcommand("make-fixture", "Write a deterministic Tiny VGG fixture");
  bool zero = false;
  std::string sample_image;
  fixture->add_flag("--zero", zero, "All-zero weights");
  fixture->add_option("--sample-image", sample_image,
                      "Also write the deterministic sample image (seeded by --seed) as PNG");

  app.add_subcommand("bridge", "Serve bridge requests as JSON lines on stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  const auto require = [&](const std::string& value, const char* flag) {
    if (value.empty()) throw CLI::RequiredError(flag);
  };

  try {
    const ColorScope scope = *color_scope_from_string(scope_name);
    if (*classify) {
      require(model_path, "--model");
      require(image_path, "--image");
      cli::cmd_classify(model_path, image_path, std::cout);
    } else if (*dump) {
      require(model_path, "--model");
      require(image_path, "--image");
      require(out_path, "--out");
      DumpOptions opts;
      opts.layers = dump_layers;
      opts.include_intermediates = include_intermediates;
      opts.scope = scope;
      cli::cmd_dump(model_path, image_path, out_path, opts);
    } else if (*render) {
      require(model_path, "--model");
      require(image_path, "--image");
      require(out_path, "--out");
      for (const auto& p : cli::cmd_render(model_path, image_path, layer, out_path, scope, scale))
        std::cout << p.string() << "\n";
    } else if (*bench) {
      std::shared_ptr<const ModelBundle> model =
          model_path.empty()
              ? std::make_shared<const ModelBundle>(make_fixture_model(seed, tiny_vgg_descriptor()))
              : cli::load_model_path(model_path);
      const Tensor3 input =
          image_path.empty()
              ? make_sample_image(0, model->descriptor.input_shape)
              : ingest_image(read_file(image_path), model->descriptor.input_shape).pixels;
      cli::print_bench(cli::run_bench(*model, input, iterations), std::cout);
    } else if (*fixture) {
      require(out_path, "--out");
      cli::cmd_make_fixture(seed, zero, out_path);
      if (!sample_image.empty()) {
        const Tensor3 img = make_sample_image(seed, tiny_vgg_descriptor().input_shape);
        write_file(sample_image, encode_png(tensor_to_rgb8(img)));
      }
    } else {
      cli::cmd_bridge(std::cin, std::cout);
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
    return cli::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitData;
  }
  return cli::kExitOk;
}
