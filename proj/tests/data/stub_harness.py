"""Protocol stub: echoes its decoded invocation back inside well-formed records."""
import base64
import json
import sys
import time

args = sys.argv[1:]
behave = "ok"
if args and args[0].startswith("--behave="):
    behave = args.pop(0).split("=", 1)[1]

if behave == "crash":
    sys.stderr.write("stub crashed\n")
    sys.exit(3)
if behave == "garbage":
    print("this is not a record")
    sys.exit(0)
if behave == "sleep":
    time.sleep(60)


def b64(s):
    return base64.b64decode(s).decode("utf-8")


mode = args[0]
if mode == "probe":
    root, location, expr, command, timeout = args[1:6]
    print(json.dumps({"record": "probe", "hit_count": 5, "values": [root, location, b64(expr), b64(command), timeout],
                      "eval_error": None}))
    print(json.dumps({"record": "test", "test_status": "fail", "exception_type": "AssertionError",
                      "exception_message": "from stub"}))
elif mode == "run":
    root, command, timeout = args[1:4]
    if behave == "extra":
        print(json.dumps({"record": "probe", "hit_count": 0, "values": [], "eval_error": None}))
    print(json.dumps({"record": "test", "test_status": "pass", "exception_type": "",
                      "exception_message": root + "|" + b64(command) + "|" + timeout}))
else:
    sys.exit(2)
