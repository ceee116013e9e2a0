// Adapter entry point for {{name}}: serves the legacy handler
// through the generic function interface without modifying it.
#include <gfaas/gfaas.hpp>

// Point this include at your existing handler, then fill in the two
// mapping functions below. The legacy code itself stays untouched.

static std::string map_request(const gfaas::XRequest& request) {
    return request.body;
}

static gfaas::XResponse map_response(const std::string& result) {
    gfaas::XResponse response;
    response.status_code = 200;
    response.body = result;
    return response;
}

gfaas::XResponse handle(const gfaas::XRequest& request) {
    // auto result = legacy_handler(map_request(request));
    std::string result = "Hello world!";
    return map_response(result);
}

int main() {
    gfaas::serve(handle);
    return 0;
}
