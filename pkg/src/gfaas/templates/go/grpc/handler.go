// {{name}}: a generic gFaaS function.
package main

import "github.com/gfaas/gfaas-go"

func handle(xRequest *gfaas.XRequest) *gfaas.XResponse {
	xResponse := gfaas.NewXResponse()
	xResponse.StatusCode = 200
	xResponse.Body = []byte("Hello world!")
	return xResponse
}

func main() {
	gfaas.Serve(handle, gfaas.WithGrpc())
}
