import gfaas.XFunction;
import gfaas.XRequest;
import gfaas.XResponse;
// {{name}}: a generic gFaaS function.
public class Handler extends XFunction {

    @Override
    public XResponse call(XRequest xRequest) {
        XResponse xResponse = new XResponse();
        xResponse.setStatusCode(200);
        xResponse.setBody("Hello world!");
        return xResponse;
    }

    public static void main(String[] args) {
        new Handler().serve();
    }
}
