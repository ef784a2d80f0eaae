#include <gtest/gtest.h>
#include <png.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <random>

#include "cnnscope/image.hpp"
#include "cnnscope/json.hpp"
#include "cnnscope/model_io.hpp"
#include "test_util.hpp"

using namespace cnnscope;

namespace {

ModelBundle random_bundle(std::mt19937& gen, int trial) {
  ModelBundle b = make_fixture_model(static_cast<std::uint32_t>(gen()), testutil::random_descriptor(gen));
  b.metadata.name = "random-" + std::to_string(trial);
  b.metadata.version = std::to_string(trial % 3) + ".0";
  b.metadata.weights_file = b.metadata.name + ".bin";
  return b;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cnnscope_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

Bytes encode_rgba_png(const Rgb8Image& rgb, const std::function<std::uint8_t(std::size_t)>& alpha) {
  Bytes rgba;
  const std::size_t n = static_cast<std::size_t>(rgb.height) * rgb.width;
  for (std::size_t i = 0; i < n; ++i) {
    rgba.insert(rgba.end(), rgb.pixels.begin() + static_cast<std::ptrdiff_t>(i * 3),
                rgb.pixels.begin() + static_cast<std::ptrdiff_t>(i * 3 + 3));
    rgba.push_back(alpha(i));
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(rgb.width);
  img.height = static_cast<png_uint_32>(rgb.height);
  img.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  png_image_write_to_memory(&img, nullptr, &size, 0, rgba.data(), 0, nullptr);
  Bytes out(size);
  png_image_write_to_memory(&img, out.data(), &size, 0, rgba.data(), 0, nullptr);
  out.resize(size);
  return out;
}

}  // namespace

TEST(ModelIo, RoundTripIsByteIdentical) {
  std::mt19937 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelBundle b = random_bundle(gen, trial);
    const SavedModel first = save_model(b);
    const ModelBundle loaded = load_model(first.manifest, first.weights);
    const SavedModel second = save_model(loaded);
    ASSERT_EQ(first.manifest, second.manifest);
    ASSERT_EQ(first.weights, second.weights);
    ASSERT_EQ(loaded.descriptor.layers.size(), b.descriptor.layers.size());
    for (std::size_t i = 0; i < b.weights.layers.size(); ++i) {
      ASSERT_TRUE(testutil::bit_equal(loaded.weights.layers[i].weights, b.weights.layers[i].weights));
      ASSERT_TRUE(testutil::bit_equal(loaded.weights.layers[i].bias, b.weights.layers[i].bias));
    }

    const Tensor3 in = testutil::random_tensor(gen, b.descriptor.input_shape, 0.0f, 1.0f);
    const auto s1 = run_forward(testutil::shared(b), in);
    const auto s2 = run_forward(testutil::shared(loaded), in);
    ASSERT_TRUE(testutil::bit_equal(s1.logits, s2.logits));
  }
}

TEST(ModelIo, FilesRoundTrip) {
  const auto dir = temp_dir("files");
  const ModelBundle b = make_fixture_model(5, tiny_vgg_descriptor());
  save_model_files(b, dir / "m.json");
  EXPECT_TRUE(std::filesystem::exists(dir / b.metadata.weights_file));
  EXPECT_EQ(std::filesystem::file_size(dir / b.metadata.weights_file), 19920u * 4u);
  const ModelBundle loaded = load_model_files(dir / "m.json");
  EXPECT_EQ(save_model(loaded).weights, save_model(b).weights);
  EXPECT_EQ(loaded.metadata.name, "fixture-seed5");
  std::filesystem::remove_all(dir);
}

TEST(ModelIo, ManifestFields) {
  const SavedModel s = save_model(make_fixture_model(1, tiny_vgg_descriptor()));
  const Json m = Json::parse(s.manifest);
  EXPECT_EQ(m["formatVersion"], 1);
  EXPECT_EQ(m["dtype"], "f32le");
  EXPECT_EQ(m["totalParams"], 19920);
  EXPECT_EQ(m["inputShape"], Json::parse("[64,64,3]"));
  EXPECT_EQ(m["layers"].size(), 12u);
  EXPECT_EQ(m["layers"][0]["kind"], "conv");
  EXPECT_EQ(m["layers"][0]["hyper"]["kernelSize"], 3);
  EXPECT_EQ(m["layers"][9]["name"], "max_pool_2");
  EXPECT_EQ(m["layers"][9]["groupTag"]["unit"], 3);
  EXPECT_EQ(m["classLabels"][9], "sport car");
  EXPECT_EQ(s.manifest.back(), '\n');
  EXPECT_EQ(s.weights.size(), 19920u * 4u);
}

TEST(ModelIo, WeightBlobIsLittleEndianInLayerOrder) {
  const ModelBundle b = make_fixture_model(2, tiny_vgg_descriptor());
  const SavedModel s = save_model(b);
  const auto& conv = b.weights.layers[0];
  std::uint32_t bits;
  std::memcpy(&bits, &conv.weights[1], 4);
  EXPECT_EQ(s.weights[4], bits & 0xff);
  EXPECT_EQ(s.weights[7], bits >> 24);
  // conv_1_1 biases follow its 270 kernel weights
  float first_bias;
  const std::uint8_t* p = s.weights.data() + 270 * 4;
  bits = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  std::memcpy(&first_bias, &bits, 4);
  EXPECT_EQ(first_bias, conv.bias[0]);
}

TEST(ModelIo, ParameterCountMatchesEnumeration) {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = testutil::random_descriptor(gen);
    ASSERT_EQ(parameter_count(d), oracle::enumerate_params(d));
    ASSERT_EQ(save_model(make_zero_model(d)).weights.size(), parameter_count(d) * 4);
  }
}

TEST(ModelIo, TruncatedBlobIsCorrupt) {
  SavedModel s = save_model(make_fixture_model(3, tiny_vgg_descriptor()));
  s.weights.resize(s.weights.size() - 4);
  try {
    load_model(s.manifest, s.weights);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Corrupt);
    EXPECT_NE(std::string(e.what()).find("79676"), std::string::npos);
  }
  s.weights.resize(s.weights.size() + 8);
  EXPECT_EQ(kind_of([&] { load_model(s.manifest, s.weights); }), ErrorKind::Corrupt);
}

TEST(ModelIo, NonFiniteWeightIsValidationError) {
  SavedModel s = save_model(make_fixture_model(3, tiny_vgg_descriptor()));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  // first weight of conv_1_2: after conv_1_1's 280 parameters, offset 7
  std::memcpy(s.weights.data() + (280 + 7) * 4, &nan, 4);
  try {
    load_model(s.manifest, s.weights);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("conv_1_2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("offset 7"), std::string::npos) << msg;
  }
}

TEST(ModelIo, MalformedManifestsAreParseErrors) {
  const SavedModel s = save_model(make_fixture_model(3, tiny_vgg_descriptor()));
  EXPECT_EQ(kind_of([&] { load_model("{not json", s.weights); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_model("[]", s.weights); }), ErrorKind::Parse);

  Json m = Json::parse(s.manifest);
  auto with = [&](auto edit) {
    Json c = m;
    edit(c);
    return c.dump();
  };
  EXPECT_EQ(kind_of([&] { load_model(with([](Json& c) { c.erase("layers"); }), s.weights); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_model(with([](Json& c) { c["formatVersion"] = 2; }), s.weights); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_model(with([](Json& c) { c["layers"][0]["kind"] = "lstm"; }), s.weights); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_model(with([](Json& c) { c["dtype"] = "f16"; }), s.weights); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_model(with([](Json& c) { c["totalParams"] = 19860; }), s.weights); }),
            ErrorKind::Validation);
  // a wrong hyper-parameter changes the computed count, which then disagrees with totalParams
  EXPECT_EQ(kind_of([&] {
              load_model(with([](Json& c) { c["layers"][0]["hyper"]["outChannels"] = 11; }), s.weights);
            }),
            ErrorKind::Validation);
}

TEST(ModelIo, MissingFilesAreIoErrors) {
  const auto dir = temp_dir("missing");
  try {
    load_model_files(dir / "absent.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("absent.json"), std::string::npos);
  }
  save_model_files(make_zero_model(tiny_vgg_descriptor()), dir / "z.json");
  std::filesystem::remove(dir / "zero.weights.bin");
  EXPECT_EQ(kind_of([&] { load_model_files(dir / "z.json"); }), ErrorKind::Io);
  std::filesystem::remove_all(dir);
}

TEST(Fixture, DeterministicPerSeed) {
  const auto a = save_model(make_fixture_model(42, tiny_vgg_descriptor()));
  const auto b = save_model(make_fixture_model(42, tiny_vgg_descriptor()));
  const auto c = save_model(make_fixture_model(43, tiny_vgg_descriptor()));
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_NE(a.weights, c.weights);
  EXPECT_TRUE(testutil::bit_equal(make_sample_image(7, {64, 64, 3}).data(),
                                  make_sample_image(7, {64, 64, 3}).data()));
}

TEST(Fixture, CommittedGoldenMatchesGenerator) {
  const auto dir = testutil::golden_dir();
  const ModelBundle committed = load_model_files(dir / "fixture_seed42.json");
  EXPECT_EQ(save_model(committed).weights, save_model(make_fixture_model(42, tiny_vgg_descriptor())).weights);
}

TEST(Image, SolidPngs) {
  Rgb8Image white{64, 64, Bytes(64 * 64 * 3, 255)};
  Rgb8Image black{64, 64, Bytes(64 * 64 * 3, 0)};
  const auto w = ingest_image(encode_png(white), {64, 64, 3});
  const auto b = ingest_image(encode_png(black), {64, 64, 3});
  for (float v : w.pixels.data()) ASSERT_EQ(v, 1.0f);
  for (float v : b.pixels.data()) ASSERT_EQ(v, 0.0f);
}

TEST(Image, WrongSizeIsDimensionError) {
  Rgb8Image small{32, 32, Bytes(32 * 32 * 3, 9)};
  try {
    ingest_image(encode_png(small), {64, 64, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("64"), std::string::npos);
    EXPECT_NE(msg.find("32"), std::string::npos);
  }
}

TEST(Image, GarbageIsFormatError) {
  const Bytes junk = {1, 2, 3, 4, 5};
  EXPECT_EQ(kind_of([&] { ingest_image(junk, {64, 64, 3}); }), ErrorKind::Format);
  Bytes broken_png = encode_png({4, 4, Bytes(48, 1)});
  broken_png.resize(20);
  EXPECT_EQ(kind_of([&] { ingest_image(broken_png, {4, 4, 3}); }), ErrorKind::Format);
}

TEST(Image, RawRgb8AndPngAgree) {
  std::mt19937 gen(17);
  Rgb8Image img{64, 64, Bytes(64 * 64 * 3)};
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(gen());
  const auto raw = ingest_image(img.pixels, {64, 64, 3});
  const auto png = ingest_image(encode_png(img), {64, 64, 3});
  EXPECT_TRUE(testutil::bit_equal(raw.pixels.data(), png.pixels.data()));
  EXPECT_EQ(tensor_digest(raw.pixels), tensor_digest(png.pixels));
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    ASSERT_EQ(raw.pixels.data()[i], static_cast<float>(img.pixels[i]) / 255.0f);
  EXPECT_EQ(tensor_to_rgb8(raw.pixels).pixels, img.pixels);
}

TEST(Image, RgbaAlphaIsIgnored) {
  std::mt19937 gen(18);
  Rgb8Image rgb{8, 8, Bytes(8 * 8 * 3)};
  for (auto& p : rgb.pixels) p = static_cast<std::uint8_t>(gen());
  const Bytes rgba_png = encode_rgba_png(rgb, [&](std::size_t i) {
    return static_cast<std::uint8_t>(i * 37);
  });
  const auto a = ingest_image(rgba_png, {8, 8, 3});
  const auto b = ingest_image(rgb.pixels, {8, 8, 3});
  EXPECT_TRUE(testutil::bit_equal(a.pixels.data(), b.pixels.data()));
}

TEST(Image, UpscaleIsNearestNeighbour) {
  Rgb8Image img{2, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}};
  const auto up = upscale(img, 3);
  EXPECT_EQ(up.height, 6);
  EXPECT_EQ(up.width, 6);
  EXPECT_EQ(up.pixels[0], 1);
  EXPECT_EQ(up.pixels[(2 * 6 + 2) * 3], 1);
  EXPECT_EQ(up.pixels[(2 * 6 + 3) * 3], 4);
  EXPECT_EQ(up.pixels[(5 * 6 + 5) * 3 + 2], 12);
  const auto back = decode_png(encode_png(up));
  EXPECT_EQ(back.pixels, up.pixels);
}

TEST(Io, Base64AndDigest) {
  const Bytes data = {'f', 'o', 'o', 'b', 'a', 'r'};
  EXPECT_EQ(base64_encode(data), "Zm9vYmFy");
  EXPECT_EQ(base64_decode("Zm9vYmE="), (Bytes{'f', 'o', 'o', 'b', 'a'}));
  EXPECT_EQ(base64_encode(Bytes{}), "");
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(base64_decode("@@@"), Error);
  std::mt19937 gen(4);
  for (int i = 0; i < 50; ++i) {
    Bytes b(static_cast<std::size_t>(testutil::rand_int(gen, 0, 40)));
    for (auto& x : b) x = static_cast<std::uint8_t>(gen());
    ASSERT_EQ(base64_decode(base64_encode(b)), b);
  }
}
