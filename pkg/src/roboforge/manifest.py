"""Run manifests: one JSON document next to every pipeline command's outputs.

Timestamps honor SOURCE_DATE_EPOCH so reproducible runs can emit
byte-identical manifests.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def build_manifest(
    command: str,
    config: dict,
    inputs: list[str],
    outputs: list[str],
    seed: int | None = None,
    model_ids: list[str] | None = None,
    template_hashes: dict[str, str] | None = None,
    extra: dict | None = None,
) -> dict:
    manifest = {
        "command": command,
        "config": config,
        "inputs": sorted(str(p) for p in inputs),
        "outputs": sorted(str(p) for p in outputs),
        "seed": seed,
        "model_ids": sorted(model_ids or []),
        "prompt_template_hashes": template_hashes or {},
        "timestamp": _timestamp(),
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(outdir: str | Path, manifest: dict) -> Path:
    path = Path(outdir) / f"{manifest['command']}.manifest.json"
    path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path
