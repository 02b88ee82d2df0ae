"""Candidate synthesizers: a chat-completions client and a scripted mock.

The mock replays a fixed list of responses, which makes repair-loop tests
bit-reproducible.  The remote client talks to any chat-completions-style
HTTPS endpoint; the API key is read from an environment variable at
request time and never written to logs or transcripts.
"""

from __future__ import annotations

import os
import re
import string
import time
from dataclasses import dataclass, field

import requests

from .candidates import CandidateSource
from .errors import (
    ModelRefusal,
    NoCodeBlock,
    RateLimited,
    ScriptExhausted,
    TemplateError,
    TransportError,
)


@dataclass(frozen=True)
class Prompt:
    """Role-tagged message list, rendered from templates."""

    messages: tuple[dict, ...]

    @property
    def size(self) -> int:
        return sum(len(m.get("content", "")) for m in self.messages)

    def text(self) -> str:
        return "\n\n".join(m.get("content", "") for m in self.messages)

    def to_json_list(self) -> list[dict]:
        return [dict(m) for m in self.messages]


def render_template(template_text: str, **slots: str) -> str:
    """Fill ``$slot`` placeholders; a missing slot raises TemplateError."""
    try:
        return string.Template(template_text).substitute(**slots)
    except KeyError as exc:
        raise TemplateError(exc.args[0]) from exc
    except ValueError as exc:
        raise TemplateError(str(exc)) from exc


@dataclass
class SynthesizerConfig:
    endpoint: str
    model: str
    api_key_env: str = "DOWNHILL_API_KEY"
    request_timeout: float = 120.0
    max_retries: int = 2
    backoff: float = 1.0
    decoding: dict = field(default_factory=dict)  # temperature etc., passed through


class ScriptedSynthesizer:
    """Deterministic mock: returns the scripted responses in order."""

    def __init__(self, script):
        self.script = list(script)
        self.calls = 0

    def complete(self, prompt: Prompt) -> str:
        if self.calls >= len(self.script):
            raise ScriptExhausted(
                f"scripted synthesizer exhausted after {len(self.script)} calls"
            )
        response = self.script[self.calls]
        self.calls += 1
        return response


class RemoteSynthesizer:
    """Chat-completions client with retry/backoff on transient failures."""

    def __init__(self, config: SynthesizerConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()
        self.calls = 0

    def complete(self, prompt: Prompt) -> str:
        config = self.config
        api_key = os.environ.get(config.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {"model": config.model, "messages": prompt.to_json_list()}
        body.update(config.decoding)

        last_error: Exception | None = None
        for attempt in range(config.max_retries + 1):
            if attempt:
                time.sleep(config.backoff * attempt)
            try:
                response = self.session.post(config.endpoint, json=body,
                                             headers=headers,
                                             timeout=config.request_timeout)
            except requests.RequestException as exc:
                last_error = TransportError(f"request failed: {exc}")
                continue
            self.calls += 1
            if response.status_code == 429:
                retry_after = response.headers.get("Retry-After")
                raise RateLimited(float(retry_after) if retry_after else None)
            if response.status_code >= 500:
                last_error = TransportError(
                    f"server error {response.status_code}", status=response.status_code)
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"endpoint returned {response.status_code}: {response.text[:200]}",
                    status=response.status_code)
            return _extract_text(response)
        raise last_error or TransportError("no response")


def _extract_text(response) -> str:
    try:
        data = response.json()
        text = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed completion payload: {exc}") from exc
    if not text:
        raise ModelRefusal("model returned an empty or blocked response")
    return text


_FENCE_RE = re.compile(r"```([^\n`]*)\n(.*?)```", re.DOTALL)


def extract_candidate(response_text: str, origin: str = "initial",
                      iteration: int = 0) -> CandidateSource:
    """Last fenced code block in the response; drafts before it are ignored."""
    blocks = _FENCE_RE.findall(response_text)
    if not blocks:
        raise NoCodeBlock("response contains no fenced code block")
    language, code = blocks[-1]
    code = code.strip("\n") + "\n"
    return CandidateSource(code=code, language_tag=language.strip() or "python",
                           origin=origin, iteration=iteration)
