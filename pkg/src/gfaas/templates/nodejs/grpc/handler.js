// {{name}}: a generic gFaaS function.
const { serve, XResponse } = require("gfaas");

function handle(xRequest) {
  const xResponse = new XResponse();
  xResponse.statusCode = 200;
  xResponse.body = "Hello world!";
  return xResponse;
}

serve(handle, { grpcEnabled: true });
