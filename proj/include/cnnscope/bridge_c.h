/* C entry points for embedding the bridge (e.g. a WebAssembly build driven
 * from JavaScript). Strings are UTF-8 JSON; returned strings must be released
 * with cnnscope_free_string. */
#ifndef CNNSCOPE_BRIDGE_C_H
#define CNNSCOPE_BRIDGE_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

uint64_t cnnscope_open_session(void);
void cnnscope_close_session(uint64_t handle);
char* cnnscope_request(uint64_t handle, const char* request_json);
void cnnscope_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif
