from __future__ import annotations

import json
from pathlib import Path

import pytest

from roboforge.sim import Simulator, ground_profile, uav_profile

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def uav():
    return Simulator(uav_profile())


@pytest.fixture
def ground():
    return Simulator(ground_profile())


@pytest.fixture(scope="session")
def golden_tasks():
    rows = []
    with open(DATA_DIR / "golden_basic.jsonl", encoding="utf-8") as fh:
        for line in fh:
            rows.append(json.loads(line))
    return rows


class StubClient:
    """Chat client with a scripted list of replies."""

    model = "stub"

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests: list[list[dict]] = []

    def complete(self, messages):
        self.requests.append([dict(m) for m in messages])
        if not self.replies:
            raise AssertionError("stub client ran out of replies")
        reply = self.replies.pop(0)
        if isinstance(reply, Exception):
            raise reply
        return reply


@pytest.fixture
def stub_client_factory():
    return StubClient
