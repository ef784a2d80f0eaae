#include "cnnscope/bridge_c.h"

#include <cstdlib>
#include <cstring>

#include "cnnscope/bridge.hpp"

namespace {

cnnscope::Bridge& global_bridge() {
  static cnnscope::Bridge bridge;
  return bridge;
}

}  // namespace

extern "C" {

uint64_t cnnscope_open_session(void) { return global_bridge().open_session().id; }

void cnnscope_close_session(uint64_t handle) {
  global_bridge().close_session(cnnscope::SessionHandle{handle});
}

char* cnnscope_request(uint64_t handle, const char* request_json) {
  const std::string response = global_bridge().handle_request_text(
      cnnscope::SessionHandle{handle}, request_json ? request_json : "");
  char* out = static_cast<char*>(std::malloc(response.size() + 1));
  if (out) std::memcpy(out, response.c_str(), response.size() + 1);
  return out;
}

void cnnscope_free_string(char* s) { std::free(s); }

}
