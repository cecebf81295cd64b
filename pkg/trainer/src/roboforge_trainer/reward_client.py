"""HTTP client for the reward service; the only bridge to the primary."""

from __future__ import annotations

import hashlib
import json
import time

import requests


class RewardServiceError(Exception):
    """The reward service is unreachable or persistently failing."""


class RewardClient:
    def __init__(self, base_url: str, retries: int = 3, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self._session = requests.Session()

    def check_health(self) -> dict:
        try:
            resp = self._session.get(f"{self.base_url}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise RewardServiceError(
                f"reward service unreachable at {self.base_url}: {exc}"
            ) from exc
        if resp.status_code != 200:
            raise RewardServiceError(
                f"reward service health check failed: {resp.status_code}"
            )
        return resp.json()

    def reward_batch(self, items: list[dict]) -> tuple[list[dict], str]:
        """POST /v1/reward/batch with bounded retries.

        Returns (responses, request_sha) so every consumed reward can be
        tied back to the exact request in the audit log.
        """
        body = json.dumps(items).encode("utf-8")
        request_sha = hashlib.sha256(body).hexdigest()[:16]
        last = None
        for attempt in range(self.retries):
            try:
                resp = self._session.post(
                    f"{self.base_url}/v1/reward/batch",
                    data=body,
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last = str(exc)
                time.sleep(0.5 * 2**attempt)
                continue
            if resp.status_code == 200:
                rewards = resp.json()
                if len(rewards) != len(items):
                    raise RewardServiceError(
                        f"batch length mismatch: sent {len(items)}, "
                        f"got {len(rewards)}"
                    )
                return rewards, request_sha
            last = f"HTTP {resp.status_code}: {resp.text[:200]}"
            if 400 <= resp.status_code < 500:
                break  # our request is wrong; retrying cannot help
            time.sleep(0.5 * 2**attempt)
        raise RewardServiceError(
            f"reward batch failed after {self.retries} attempt(s): {last}"
        )
