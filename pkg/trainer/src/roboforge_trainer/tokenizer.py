"""Self-contained byte-level tokenizer: no vocabulary downloads."""

from __future__ import annotations

PAD = 0
BOS = 1
EOS = 2
_OFFSET = 3

VOCAB_SIZE = 256 + _OFFSET

PROMPT_HEADER = "### Instruction:\n"
RESPONSE_HEADER = "\n### Response:\n"


def encode(text: str) -> list[int]:
    return [b + _OFFSET for b in text.encode("utf-8")]


def decode(ids: list[int]) -> str:
    data = bytes(i - _OFFSET for i in ids if i >= _OFFSET)
    return data.decode("utf-8", errors="replace")


def encode_prompt(instruction: str) -> list[int]:
    return [BOS] + encode(PROMPT_HEADER + instruction + RESPONSE_HEADER)


def encode_pair(instruction: str, code: str, max_len: int) -> tuple[list[int], list[int]]:
    """Token ids and labels for one instruction->code pair.

    Prompt tokens are masked out of the loss with -100; the code and the
    trailing EOS are supervised.
    """
    prompt = encode_prompt(instruction)
    completion = encode(code) + [EOS]
    ids = (prompt + completion)[:max_len]
    labels = ([-100] * len(prompt) + completion)[:max_len]
    return ids, labels
