"""Shared test helpers: deterministic embeddings, provider stores, and a
loopback chat endpoint. Everything here is seed- or hash-deterministic so
the suite never needs the network.
"""
from __future__ import annotations

import hashlib
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
import pytest

from paraeval.semantic import EmbeddingMatrix, TextRejected

FIXTURES = Path(__file__).parent / "fixtures"


def _hash_vector(token: str, dim: int, salt: str) -> np.ndarray:
    digest = hashlib.sha256(f"{salt}:{token}".encode()).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.uniform(-1.0, 1.0, size=dim)


class HashProvider:
    """Deterministic per-token embeddings derived from a hash.

    Identical texts always embed to identical matrices, which makes the
    identity cases of the matching math exact.
    """

    def __init__(self, dim: int = 32, model: str = "hash-v1"):
        self.dim = dim
        self.model = model

    @property
    def identity(self) -> str:
        return f"test:{self.model}"

    def embed(self, text: str) -> EmbeddingMatrix:
        if not text:
            raise TextRejected("empty text")
        tokens = tuple(text.split())
        if not tokens:
            raise TextRejected("whitespace-only text")
        vectors = np.stack([_hash_vector(t, self.dim, self.model) for t in tokens])
        return EmbeddingMatrix(tokens=tokens, vectors=vectors)


def write_provider_store(texts, path, dim: int = 32, model: str = "hash-v1") -> None:
    """Write a FileProvider store whose entries match HashProvider output."""
    provider = HashProvider(dim=dim, model=model)
    with open(path, "w", encoding="utf-8") as f:
        for text in dict.fromkeys(texts):  # preserve order, drop dups
            matrix = provider.embed(text)
            f.write(
                json.dumps(
                    {
                        "text": text,
                        "model": model,
                        "dim": dim,
                        "tokens": list(matrix.tokens),
                        "vectors": matrix.vectors.tolist(),
                    }
                )
                + "\n"
            )


@pytest.fixture
def hash_provider():
    return HashProvider()


_SENT_RE = re.compile(r"Sentence: (.*?) Paraphras", re.DOTALL)
_PRIOR_RE = re.compile(r"^\d+\. (.*)$", re.MULTILINE)

VARIANT_LEADS = ["Honestly", "Frankly", "Clearly", "Surely", "Naturally"]


def make_variants(sentence: str, k: int) -> list[str]:
    base = sentence.rstrip(".")
    return [f"{VARIANT_LEADS[i % len(VARIANT_LEADS)]} speaking {base} as stated." for i in range(k)][:k]


class MockChatHandler(BaseHTTPRequestHandler):
    """OpenAI-compatible /v1/chat/completions endpoint with deterministic
    paraphrases; behavior switches on the requested model name."""

    def log_message(self, *args):  # keep test output quiet
        pass

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        request = json.loads(self.rfile.read(length))
        self.server.requests.append(request)
        model = request.get("model", "")
        user_text = request["messages"][1]["content"]
        match = _SENT_RE.search(user_text)
        sentence = match.group(1) if match else "missing sentence"

        if model == "mock-broken":
            self.send_response(500)
            self.end_headers()
            return

        sequential = re.search(r"rephrases a given sentence in (\d+) ways", user_text)
        if sequential:
            k = int(sequential.group(1))
            if model == "mock-short":
                lines = make_variants(sentence, max(1, k - 1))
            else:
                lines = make_variants(sentence, k)
            numbered = [f"{i + 1}. {line}" for i, line in enumerate(lines)]
            content = "Here are the paraphrases:\n" + "\n".join(numbered)
        else:
            priors = _PRIOR_RE.findall(user_text)
            candidates = make_variants(sentence, 5)
            fresh = next((c for c in candidates if c not in priors), candidates[0])
            content = fresh

        body = json.dumps(
            {"choices": [{"message": {"role": "assistant", "content": content}}]}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def mock_chat_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), MockChatHandler)
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        thread.join()


def chat_endpoint(server) -> str:
    return f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
