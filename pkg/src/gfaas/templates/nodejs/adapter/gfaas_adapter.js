// Adapter entry point for {{name}}: serves the legacy handler
// through the generic function interface without modifying it.
const { serve, XResponse } = require("gfaas");

// Point this require at your existing handler, then fill in the two
// mapping functions below. The legacy code itself stays untouched.
// const legacyHandler = require("./legacy");

function mapRequest(xRequest) {
  return xRequest.body;
}

function mapResponse(result) {
  const xResponse = new XResponse();
  xResponse.statusCode = 200;
  xResponse.body = String(result);
  return xResponse;
}

function handle(xRequest) {
  // const result = legacyHandler(mapRequest(xRequest));
  const result = "Hello world!";
  return mapResponse(result);
}

serve(handle, {});
