"""Synthesizer mock/remote behavior, code-block extraction, templates."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from downhill.errors import (
    ModelRefusal,
    NoCodeBlock,
    RateLimited,
    ScriptExhausted,
    TemplateError,
    TransportError,
)
from downhill.synth import (
    Prompt,
    RemoteSynthesizer,
    ScriptedSynthesizer,
    SynthesizerConfig,
    extract_candidate,
    render_template,
)

PROMPT = Prompt(messages=({"role": "user", "content": "write code"},))


# ---------------------------------------------------------------------------
# scripted mock

def test_scripted_replay_and_exhaustion():
    synth = ScriptedSynthesizer(["A", "B"])
    assert synth.complete(PROMPT) == "A"
    assert synth.complete(PROMPT) == "B"
    with pytest.raises(ScriptExhausted):
        synth.complete(PROMPT)


def test_scripted_deterministic_across_runs():
    script = ["first", "second"]
    runs = [[ScriptedSynthesizer(script).complete(PROMPT) for _ in range(2)]
            for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


# ---------------------------------------------------------------------------
# extraction

def test_extract_single_block():
    source = extract_candidate("here:\n```python\ndef h(s, c):\n    return 0\n```\n")
    assert source.code == "def h(s, c):\n    return 0\n"
    assert source.language_tag == "python"


def test_extract_last_block_wins():
    text = ("draft:\n```python\nbad = True\n```\nfinal version:\n"
            "```python\ngood = True\n```\n")
    assert extract_candidate(text).code == "good = True\n"


def test_extract_no_block():
    with pytest.raises(NoCodeBlock):
        extract_candidate("pure prose, no code at all")


def test_extract_language_tag_default():
    assert extract_candidate("```\nx = 1\n```").language_tag == "python"
    assert extract_candidate("```js\nx = 1\n```").language_tag == "js"


# ---------------------------------------------------------------------------
# templates

def test_render_template_fills_slots():
    assert render_template("a $x b $y", x="1", y="2") == "a 1 b 2"


def test_render_template_missing_slot():
    with pytest.raises(TemplateError) as exc:
        render_template("a $x $missing", x="1")
    assert exc.value.slot == "missing"


# ---------------------------------------------------------------------------
# remote client against a local fake endpoint

class _Fake(BaseHTTPRequestHandler):
    behavior = "ok"
    last_body: dict | None = None
    last_headers: dict | None = None

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        _Fake.last_body = json.loads(self.rfile.read(length))
        _Fake.last_headers = dict(self.headers)
        if _Fake.behavior == "unauthorized":
            self._reply(401, {"error": "bad key"})
        elif _Fake.behavior == "context-overflow":
            self._reply(400, {"error": "maximum context length exceeded"})
        elif _Fake.behavior == "rate-limited":
            self.send_response(429)
            self.send_header("Retry-After", "7")
            self.end_headers()
        elif _Fake.behavior == "empty":
            self._reply(200, {"choices": [{"message": {"content": ""}}]})
        elif _Fake.behavior == "flaky-then-ok":
            _Fake.behavior = "ok"
            self._reply(500, {"error": "transient"})
        else:
            self._reply(200, {"choices": [{"message": {"content": "the reply"}}]})

    def _reply(self, status, doc):
        body = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def fake_endpoint():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Fake)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    server.shutdown()


def _config(endpoint, **kwargs):
    return SynthesizerConfig(endpoint=endpoint, model="test-model",
                             api_key_env="DOWNHILL_TEST_KEY", backoff=0.01,
                             request_timeout=5.0, **kwargs)


def test_remote_success(fake_endpoint, monkeypatch):
    monkeypatch.setenv("DOWNHILL_TEST_KEY", "sk-secret-value")
    _Fake.behavior = "ok"
    synth = RemoteSynthesizer(_config(fake_endpoint, decoding={"temperature": 0.7}))
    assert synth.complete(PROMPT) == "the reply"
    assert _Fake.last_body["model"] == "test-model"
    assert _Fake.last_body["temperature"] == 0.7
    assert _Fake.last_headers["Authorization"] == "Bearer sk-secret-value"


def test_remote_invalid_key(fake_endpoint, monkeypatch):
    monkeypatch.setenv("DOWNHILL_TEST_KEY", "wrong")
    _Fake.behavior = "unauthorized"
    with pytest.raises(TransportError) as exc:
        RemoteSynthesizer(_config(fake_endpoint)).complete(PROMPT)
    assert exc.value.status == 401


def test_remote_context_overflow_surfaces(fake_endpoint, monkeypatch):
    """An oversized prompt fails loudly instead of being truncated."""
    monkeypatch.setenv("DOWNHILL_TEST_KEY", "k")
    _Fake.behavior = "context-overflow"
    huge = Prompt(messages=({"role": "user", "content": "x" * 50000},))
    with pytest.raises(TransportError) as exc:
        RemoteSynthesizer(_config(fake_endpoint)).complete(huge)
    assert exc.value.status == 400
    assert len(_Fake.last_body["messages"][0]["content"]) == 50000  # sent whole


def test_remote_rate_limited(fake_endpoint, monkeypatch):
    monkeypatch.setenv("DOWNHILL_TEST_KEY", "k")
    _Fake.behavior = "rate-limited"
    with pytest.raises(RateLimited) as exc:
        RemoteSynthesizer(_config(fake_endpoint)).complete(PROMPT)
    assert exc.value.retry_after == 7.0


def test_remote_refusal_on_empty(fake_endpoint, monkeypatch):
    monkeypatch.setenv("DOWNHILL_TEST_KEY", "k")
    _Fake.behavior = "empty"
    with pytest.raises(ModelRefusal):
        RemoteSynthesizer(_config(fake_endpoint)).complete(PROMPT)


def test_remote_retries_transient_errors(fake_endpoint, monkeypatch):
    monkeypatch.setenv("DOWNHILL_TEST_KEY", "k")
    _Fake.behavior = "flaky-then-ok"
    assert RemoteSynthesizer(_config(fake_endpoint)).complete(PROMPT) == "the reply"


def test_remote_unreachable_endpoint():
    synth = RemoteSynthesizer(_config("http://127.0.0.1:1/nope", max_retries=0))
    with pytest.raises(TransportError):
        synth.complete(PROMPT)


def test_prompt_size():
    assert PROMPT.size == len("write code")


def test_secret_never_reaches_transcripts(fake_endpoint, monkeypatch, tmp_path):
    """End to end: the API key appears nowhere in the persisted transcript."""
    from downhill import fixtures as corpus
    from downhill.candidates import InProcessRunner
    from downhill.repair import RepairConfig, load_training_tasks, run_repair

    secret = "sk-very-secret-value-12345"
    monkeypatch.setenv("DOWNHILL_TEST_KEY", secret)
    _Fake.behavior = "ok"  # replies with prose only, so no candidate extracts

    domain_text = corpus.read_fixture_file("pddl/ferry/domain.pddl")
    tasks = load_training_tasks(domain_text, {
        "ferry-1": corpus.read_fixture_file("pddl/ferry/task1.pddl")})
    config = RepairConfig(training_tasks=tasks, max_iterations=2,
                          per_task_validation_limit=5.0, out_dir=tmp_path)
    synth = RemoteSynthesizer(_config(fake_endpoint))
    result = run_repair(config, synth, InProcessRunner())
    assert not result.converged  # the fake endpoint never returns code

    transcript = (tmp_path / "transcript.jsonl").read_text()
    assert transcript  # something was persisted
    assert secret not in transcript
