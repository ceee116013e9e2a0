// {{name}}: a generic gFaaS function.
#include <gfaas/gfaas.hpp>

gfaas::XResponse handle(const gfaas::XRequest& request) {
    gfaas::XResponse response;
    response.status_code = 200;
    response.body = "Hello world!";
    return response;
}

int main() {
    gfaas::serve(handle, gfaas::serve_options{.grpc_enabled = true});
    return 0;
}
