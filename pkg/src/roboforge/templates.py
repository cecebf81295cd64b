"""Access to the shipped prompt template files."""

from __future__ import annotations

import hashlib
from importlib import resources


def load_template(name: str) -> str:
    path = resources.files("roboforge") / "prompts" / f"{name}.txt"
    return path.read_text(encoding="utf-8")


def template_hash(name: str) -> str:
    content = load_template(name).encode("utf-8")
    return hashlib.sha256(content).hexdigest()[:16]


def template_hashes(names=("instructions_simple", "instructions_complex",
                           "codegen", "judge", "augment")) -> dict[str, str]:
    return {name: template_hash(name) for name in names}
