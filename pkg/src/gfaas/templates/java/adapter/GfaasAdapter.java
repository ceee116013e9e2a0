import gfaas.XFunction;
import gfaas.XRequest;
import gfaas.XResponse;

/**
 * Adapter entry point for {{name}}: serves the legacy handler through the
 * generic function interface without modifying it. Point the marked line
 * at your existing handler and fill in the two mapping methods.
 */
public class GfaasAdapter extends XFunction {

    private Object mapRequest(XRequest xRequest) {
        return xRequest.getBody();
    }

    private XResponse mapResponse(Object result) {
        XResponse xResponse = new XResponse();
        xResponse.setStatusCode(200);
        xResponse.setBody(String.valueOf(result));
        return xResponse;
    }

    @Override
    public XResponse call(XRequest xRequest) {
        // Object result = LegacyHandler.handle(mapRequest(xRequest));
        Object result = "Hello world!";
        return mapResponse(result);
    }

    public static void main(String[] args) {
        new GfaasAdapter().serve();
    }
}
