import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from roboforge.llm import (
    ClientError,
    HttpChatClient,
    MockChatClient,
    TranscriptStore,
    client_from_spec,
    request_key,
)

MESSAGES = [{"role": "system", "content": "s"}, {"role": "user", "content": "u"}]


def test_request_key_is_stable_and_content_sensitive():
    a = request_key("m", MESSAGES)
    b = request_key("m", [dict(m) for m in MESSAGES])
    assert a == b and len(a) == 16
    assert request_key("m", MESSAGES) != request_key("m2", MESSAGES)
    assert a != request_key("m", MESSAGES[:1])


def test_mock_records_and_replays(tmp_path):
    client = MockChatClient(tmp_path)
    first = client.complete(MESSAGES)
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    record = json.loads(files[0].read_text())
    assert record["response"]["content"] == first
    assert record["request"]["messages"] == MESSAGES

    # Replay wins even over a changed responder
    replayer = MockChatClient(tmp_path, responder=lambda m: "DIFFERENT")
    assert replayer.complete(MESSAGES) == first
    assert replayer.complete([{"role": "user", "content": "other"}]) == "DIFFERENT"


def test_mock_without_dir_is_pure():
    a = MockChatClient().complete(MESSAGES)
    b = MockChatClient().complete(MESSAGES)
    assert a == b


def test_transcript_store_refuses_overwrite(tmp_path):
    store = TranscriptStore(tmp_path)
    store.save("k", "m", MESSAGES, "one")
    store.save("k", "m", MESSAGES, "two")
    assert store.load("k") == "one"


class _FlakyEndpoint(BaseHTTPRequestHandler):
    failures = 2
    seen_auth: list = []

    def log_message(self, *args):
        pass

    def do_POST(self):
        cls = type(self)
        cls.seen_auth.append(self.headers.get("Authorization"))
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        if cls.failures > 0:
            cls.failures -= 1
            self.send_response(503)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        body = json.dumps(
            {"choices": [{"message": {"content": "pong"}}]}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def flaky_server():
    _FlakyEndpoint.failures = 2
    _FlakyEndpoint.seen_auth = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _FlakyEndpoint)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_http_client_retries_5xx(flaky_server, tmp_path, monkeypatch):
    monkeypatch.setenv("TEST_LLM_KEY", "sekret")
    client = HttpChatClient(
        base_url=flaky_server, model="m", retries=3,
        api_key_env="TEST_LLM_KEY",
        transcripts=TranscriptStore(tmp_path),
    )
    assert client.complete(MESSAGES) == "pong"
    assert _FlakyEndpoint.seen_auth[-1] == "Bearer sekret"
    assert len(list(tmp_path.glob("*.json"))) == 1


def test_http_client_gives_up_after_budget(flaky_server):
    _FlakyEndpoint.failures = 99
    client = HttpChatClient(base_url=flaky_server, model="m", retries=2)
    with pytest.raises(ClientError) as info:
        client.complete(MESSAGES)
    assert info.value.retryable


class _RejectingEndpoint(_FlakyEndpoint):
    def do_POST(self):
        body = b'{"error": "bad key"}'
        self.send_response(401)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def test_http_client_4xx_not_retryable():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _RejectingEndpoint)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        client = HttpChatClient(
            base_url=f"http://127.0.0.1:{server.server_address[1]}",
            model="m", retries=3,
        )
        with pytest.raises(ClientError) as info:
            client.complete(MESSAGES)
        assert not info.value.retryable
    finally:
        server.shutdown()


def test_client_from_spec(tmp_path, monkeypatch):
    monkeypatch.delenv("ROSLM_BASE_URL", raising=False)
    mock = client_from_spec(f"mock:{tmp_path}")
    assert isinstance(mock, MockChatClient)
    assert isinstance(client_from_spec("mock"), MockChatClient)
    live = client_from_spec("live", base_url="http://example.invalid")
    assert isinstance(live, HttpChatClient)
    with pytest.raises(ValueError):
        client_from_spec("telepathy")
    with pytest.raises(ClientError):
        client_from_spec("live")  # no base URL anywhere
