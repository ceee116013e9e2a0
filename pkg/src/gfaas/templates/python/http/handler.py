"""{{name}}: a generic gFaaS function."""

from gfaas import XRequest, XResponse, serve


def handle(request: XRequest) -> XResponse:
    response = XResponse()
    response.status_code = 200
    response.body = "Hello world!"
    return response


if __name__ == "__main__":
    server = serve(handle)
    server.wait()
