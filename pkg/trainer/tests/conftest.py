from __future__ import annotations

import json
import os
import random
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest
import requests

PRIMARY_SRC = Path(__file__).resolve().parents[2] / "src"
sys.path.insert(0, str(PRIMARY_SRC))  # mock templates for fixture data only


def _make_rows(n: int, seed: int = 5) -> list[dict]:
    from roboforge.mockllm import TEMPLATES, actions_to_code, compile_instruction

    rng = random.Random(seed)
    simple = [t for t in TEMPLATES if t.complexity == "simple"]
    rows: list[dict] = []
    seen: set[str] = set()
    while len(rows) < n:
        template = rng.choice(simple)
        text = template.render(rng)
        if text in seen:
            continue
        seen.add(text)
        code = actions_to_code(compile_instruction(text))
        rows.append({
            "id": f"t{len(rows):03d}",
            "instruction": text,
            "code": code,
            "source": "original",
            "base_task_id": f"t{len(rows):03d}",
            "split": "train",
            "provenance": {"generator": "mock", "grounder": "mock",
                           "grounding": "auto", "rounds": 1},
        })
    return rows


def _write_jsonl(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


@pytest.fixture(scope="session")
def train_file_50(tmp_path_factory) -> Path:
    tmp = tmp_path_factory.mktemp("data")
    return _write_jsonl(tmp / "train50.jsonl", _make_rows(50))


@pytest.fixture(scope="session")
def train_file_492(tmp_path_factory) -> Path:
    tmp = tmp_path_factory.mktemp("data492")
    return _write_jsonl(tmp / "train492.jsonl", _make_rows(492, seed=9))


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def reward_service_url():
    """The primary's reward service, spawned through its public CLI."""
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "roboforge", "serve-reward",
         "--host", "127.0.0.1", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.PIPE,
        env={**os.environ, "PYTHONPATH": str(PRIMARY_SRC)},
    )
    url = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if requests.get(f"{url}/health", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                time.sleep(0.1)
        else:
            raise RuntimeError(f"reward service did not start: {proc.stderr.read()}")
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)
