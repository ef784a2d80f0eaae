#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "cnnscope/json.hpp"

namespace cnnscope {

inline constexpr int kBridgeVersion = 1;

struct SessionHandle {
  std::uint64_t id = 0;
  friend auto operator<=>(const SessionHandle&, const SessionHandle&) = default;
};

/// Request/response boundary between a host (the web UI, the CLI's `bridge`
/// subcommand, the C API) and the engine.
///
/// Request:  {"op": <name>, "args": {...}, "id": <optional, echoed back>}
/// Response: {"bridgeVersion": 1, "ok": <payload>}
///        or {"bridgeVersion": 1, "err": {"code": <code>, "message": <text>}}
///
/// Ops: load_model, set_input, get_overview, get_conv_decomposition,
/// get_flatten_wiring, get_window_trace, get_color_scales, get_topology.
/// Error codes: BAD_OP, BAD_HANDLE, NO_MODEL, NO_INPUT, BOUNDS, VALIDATION, IO.
///
/// Each session owns one model and one input. Requests on one session are
/// serialized; different sessions run independently.
class Bridge {
 public:
  Bridge();
  ~Bridge();
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  SessionHandle open_session();
  void close_session(SessionHandle handle);

  Json handle_request(SessionHandle handle, const Json& request);
  /// Text form of handle_request; malformed JSON yields a BAD_OP response.
  std::string handle_request_text(SessionHandle handle, std::string_view request);

 private:
  struct Session;
  std::shared_ptr<Session> find(SessionHandle handle);

  std::mutex mutex_;
  std::uint64_t next_id_ = 1;
  std::map<SessionHandle, std::shared_ptr<Session>> sessions_;
};

}  // namespace cnnscope
