// Adapter entry point for {{name}}: serves the legacy handler
// through the generic function interface without modifying it.
package main

import "github.com/gfaas/gfaas-go"

// Point this at your existing handler, then fill in the two mapping
// functions below. The legacy code itself stays untouched.

func mapRequest(xRequest *gfaas.XRequest) []byte {
	return xRequest.Body
}

func mapResponse(result []byte) *gfaas.XResponse {
	xResponse := gfaas.NewXResponse()
	xResponse.StatusCode = 200
	xResponse.Body = result
	return xResponse
}

func handle(xRequest *gfaas.XRequest) *gfaas.XResponse {
	// result := legacyHandler(mapRequest(xRequest))
	result := []byte("Hello world!")
	return mapResponse(result)
}

func main() {
	gfaas.Serve(handle)
}
