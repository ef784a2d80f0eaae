#include "cnnscope/bridge.hpp"

#include <optional>

#include "cnnscope/engine.hpp"
#include "cnnscope/image.hpp"
#include "cnnscope/model_io.hpp"
#include "cnnscope/report.hpp"

namespace cnnscope {

struct Bridge::Session {
  std::mutex mutex;
  std::shared_ptr<const ModelBundle> model;
  std::optional<InferenceSession> inference;
};

namespace {

// Failure with a wire error code.
struct BridgeFailure {
  std::string code;
  std::string message;
};

[[noreturn]] void fail(std::string code, std::string message) {
  throw BridgeFailure{std::move(code), std::move(message)};
}

std::string code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Bounds: return "BOUNDS";
    case ErrorKind::Io: return "IO";
    default: return "VALIDATION";
  }
}

const Json& arg(const Json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end()) fail("VALIDATION", std::string("missing argument '") + key + "'");
  return *it;
}

int int_arg(const Json& args, const char* key) {
  const Json& v = arg(args, key);
  if (!v.is_number_integer()) fail("VALIDATION", std::string("argument '") + key + "' must be an integer");
  return v.get<int>();
}

std::string string_arg(const Json& args, const char* key) {
  const Json& v = arg(args, key);
  if (!v.is_string()) fail("VALIDATION", std::string("argument '") + key + "' must be a string");
  return v.get<std::string>();
}

ColorScope scope_arg(const Json& args) {
  if (!args.contains("scope")) return ColorScope::Layer;
  const auto s = color_scope_from_string(string_arg(args, "scope"));
  if (!s) fail("VALIDATION", "scope must be one of layer, unit, module, global");
  return *s;
}

TensorEncoding encoding_arg(const Json& args) {
  if (!args.contains("encoding")) return TensorEncoding::Nested;
  const std::string e = string_arg(args, "encoding");
  if (e == "nested") return TensorEncoding::Nested;
  if (e == "base64") return TensorEncoding::Base64;
  fail("VALIDATION", "encoding must be 'nested' or 'base64'");
}

Json model_summary(const ModelBundle& m) {
  const auto& d = m.descriptor;
  const auto chain = shape_chain(d);
  Json layers = Json::array();
  for (std::size_t i = 0; i < d.layers.size(); ++i) {
    layers.push_back({{"name", d.layers[i].name},
                      {"kind", std::string(to_string(d.layers[i].kind))},
                      {"outputShape", shape_json(chain[i + 1])},
                      {"groupTag", {{"unit", d.layers[i].group.unit},
                                    {"module", d.layers[i].group.module}}}});
  }
  return {{"name", m.metadata.name},
          {"inputShape", shape_json(d.input_shape)},
          {"layers", std::move(layers)},
          {"classLabels", d.class_labels},
          {"totalParams", parameter_count(d)}};
}

Json probabilities_json(const InferenceSession& s) {
  Json probs = Json::object();
  const auto& labels = s.model->descriptor.class_labels;
  for (std::size_t i = 0; i < labels.size(); ++i) probs[labels[i]] = s.probabilities[i];
  return probs;
}

}  // namespace

Bridge::Bridge() = default;
Bridge::~Bridge() = default;

SessionHandle Bridge::open_session() {
  std::lock_guard lock(mutex_);
  SessionHandle h{next_id_++};
  sessions_.emplace(h, std::make_shared<Session>());
  return h;
}

void Bridge::close_session(SessionHandle handle) {
  std::lock_guard lock(mutex_);
  sessions_.erase(handle);
}

std::shared_ptr<Bridge::Session> Bridge::find(SessionHandle handle) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(handle);
  return it == sessions_.end() ? nullptr : it->second;
}

Json Bridge::handle_request(SessionHandle handle, const Json& request) {
  Json response;
  response["bridgeVersion"] = kBridgeVersion;
  if (request.is_object() && request.contains("id")) response["id"] = request["id"];

  try {
    auto session = find(handle);
    if (!session) fail("BAD_HANDLE", "unknown session handle " + std::to_string(handle.id));
    if (!request.is_object() || !request.contains("op") || !request["op"].is_string())
      fail("BAD_OP", "request must be an object with a string 'op'");
    const std::string op = request["op"].get<std::string>();
    const Json args = request.contains("args") ? request["args"] : Json::object();
    if (!args.is_object()) fail("BAD_OP", "'args' must be an object");

    std::lock_guard lock(session->mutex);
    const auto need_model = [&]() -> const ModelBundle& {
      if (!session->model) fail("NO_MODEL", op + " needs a loaded model");
      return *session->model;
    };
    const auto need_input = [&]() -> const InferenceSession& {
      need_model();
      if (!session->inference) fail("NO_INPUT", op + " needs an input; call set_input first");
      return *session->inference;
    };

    Json payload;
    if (op == "load_model") {
      ModelBundle bundle;
      if (args.contains("manifestPath")) {
        bundle = load_model_files(string_arg(args, "manifestPath"));
      } else {
        const std::string manifest = string_arg(args, "manifest");
        bundle = load_model(manifest, base64_decode(string_arg(args, "weightsBase64")));
      }
      session->model = std::make_shared<const ModelBundle>(std::move(bundle));
      session->inference.reset();
      payload = model_summary(*session->model);
    } else if (op == "set_input") {
      const auto& model = need_model();
      const Bytes bytes = args.contains("imagePath") ? read_file(string_arg(args, "imagePath"))
                                                     : base64_decode(string_arg(args, "imageBase64"));
      const InputImage img = ingest_image(bytes, model.descriptor.input_shape);
      session->inference = run_forward(session->model, img.pixels);
      const auto& s = *session->inference;
      payload = {{"inputDigest", tensor_digest(s.input)},
                 {"classProbabilities", probabilities_json(s)},
                 {"predictedClass", model.descriptor.class_labels[s.predicted_class()]}};
    } else if (op == "get_overview") {
      const auto& s = need_input();
      DumpOptions opts;
      opts.scope = scope_arg(args);
      opts.encoding = encoding_arg(args);
      if (args.contains("layers")) {
        for (const auto& l : arg(args, "layers")) {
          if (!l.is_string()) fail("VALIDATION", "'layers' must be a list of names");
          opts.layers.push_back(l.get<std::string>());
        }
      }
      payload = activation_dump(s, opts);
    } else if (op == "get_conv_decomposition") {
      const auto& s = need_input();
      payload = conv_decomposition_json(
          decompose_conv_neuron(s, string_arg(args, "layer"), int_arg(args, "channel")),
          encoding_arg(args));
    } else if (op == "get_flatten_wiring") {
      const auto& s = need_input();
      int index = -1;
      if (args.contains("classLabel")) {
        const std::string label = string_arg(args, "classLabel");
        const auto& labels = s.model->descriptor.class_labels;
        for (std::size_t i = 0; i < labels.size(); ++i)
          if (labels[i] == label) index = static_cast<int>(i);
        if (index < 0) fail("BOUNDS", "unknown class label '" + label + "'");
      } else {
        index = int_arg(args, "classIndex");
      }
      payload = flatten_wiring_json(flatten_wiring(s, index), s.model->descriptor);
    } else if (op == "get_window_trace") {
      const auto& s = need_input();
      const int in_channel = args.contains("inChannel") ? int_arg(args, "inChannel") : 0;
      payload = window_trace_json(trace_window(s, string_arg(args, "layer"),
                                               int_arg(args, "channel"), int_arg(args, "row"),
                                               int_arg(args, "col"), in_channel));
    } else if (op == "get_color_scales") {
      payload = color_scales_json(color_scales(need_input(), scope_arg(args)));
    } else if (op == "get_topology") {
      payload = topology_json(edge_topology(need_model()));
    } else {
      fail("BAD_OP", "unknown op '" + op + "'");
    }
    response["ok"] = std::move(payload);
  } catch (const BridgeFailure& f) {
    response["err"] = {{"code", f.code}, {"message", f.message}};
  } catch (const Error& e) {
    response["err"] = {{"code", code_for(e.kind())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    response["err"] = {{"code", "VALIDATION"}, {"message", e.what()}};
  }
  return response;
}

std::string Bridge::handle_request_text(SessionHandle handle, std::string_view request) {
  Json parsed;
  try {
    parsed = Json::parse(request);
  } catch (const Json::parse_error& e) {
    Json response;
    response["bridgeVersion"] = kBridgeVersion;
    response["err"] = {{"code", "BAD_OP"}, {"message", std::string("malformed request: ") + e.what()}};
    return response.dump();
  }
  return handle_request(handle, parsed).dump();
}

}  // namespace cnnscope
