"""Adapter entry point for {{name}}: serves the legacy handler
through the generic function interface without modifying it."""

from gfaas import XRequest, XResponse, serve

# Point this import at your existing handler module, then fill in the two
# mapping functions below. The legacy code itself stays untouched.
# from legacy import handler as legacy_handler


def map_request(request: XRequest):
    """Translate the generic request into your handler's input."""
    return request.body


def map_response(result) -> XResponse:
    """Translate your handler's output into a generic response."""
    response = XResponse()
    response.status_code = 200
    response.body = result if isinstance(result, (str, bytes)) else str(result)
    return response


def handle(request: XRequest) -> XResponse:
    # result = legacy_handler(map_request(request))
    result = "Hello world!"
    return map_response(result)


if __name__ == "__main__":
    server = serve(handle)
    server.wait()
