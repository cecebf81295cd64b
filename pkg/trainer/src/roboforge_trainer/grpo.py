"""Group-relative policy optimization against the live reward service.

Per step: sample a group of completions for one prompt, score them with
POST /v1/reward/batch, normalize rewards into group-relative advantages,
and apply a clipped policy-gradient update. Rewards are consumed exactly
as returned and logged per completion with the request hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import torch

from .config import TrainConfig
from .data import load_dataset
from .model import sequence_logprobs, trainable_parameters
from .reward_client import RewardClient, RewardServiceError
from .sft import TrainingError, load_checkpoint, save_checkpoint
from .tokenizer import EOS, PAD, decode, encode_prompt

log = logging.getLogger(__name__)


def group_advantages(rewards: torch.Tensor) -> torch.Tensor:
    """Centered, std-normalized rewards; all-equal groups give all zeros."""
    centered = rewards - rewards.mean()
    std = centered.std(unbiased=False)
    if std <= 1e-8:
        return torch.zeros_like(rewards)
    return centered / std


def _completion_batch(prompt_ids: list[int], completions: torch.Tensor):
    """Stack prompt + completions into padded ids plus a completion mask."""
    group, _ = completions.shape
    rows = []
    masks = []
    for i in range(group):
        completion = completions[i].tolist()
        if EOS in completion:
            completion = completion[: completion.index(EOS) + 1]
        rows.append(prompt_ids + completion)
        masks.append([False] * len(prompt_ids) + [True] * len(completion))
    width = max(len(r) for r in rows)
    ids = torch.full((group, width), PAD, dtype=torch.long)
    mask = torch.zeros((group, width), dtype=torch.bool)
    for i, (row, m) in enumerate(zip(rows, masks)):
        ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
        mask[i, : len(m)] = torch.tensor(m, dtype=torch.bool)
    return ids, mask


def grpo_train(
    cfg: TrainConfig,
    checkpoint: str | Path,
    train_file: str | Path,
    outdir: str | Path,
    steps: int,
) -> dict:
    """Run ``steps`` GRPO updates; returns a summary dict."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    pairs = load_dataset(train_file)

    client = RewardClient(cfg.reward_url, retries=cfg.reward_retries)
    health = client.check_health()
    if cfg.robot_profile not in health.get("profiles", []):
        raise TrainingError(
            f"reward service does not know profile {cfg.robot_profile!r}"
        )

    model, _ = load_checkpoint(checkpoint)
    model.train()
    optimizer = torch.optim.AdamW(
        trainable_parameters(model), lr=cfg.grpo_learning_rate, weight_decay=0.0
    )
    sampler = torch.Generator().manual_seed(cfg.seed)

    out_checkpoint = outdir / "grpo_checkpoint.pt"
    reward_log_path = outdir / "grpo_rewards.jsonl"
    mean_rewards = []

    with open(reward_log_path, "w", encoding="utf-8") as reward_log:
        for step in range(1, steps + 1):
            pair = pairs[int(torch.randint(len(pairs), (1,), generator=sampler))]
            prompt_ids = encode_prompt(pair.instruction)[-cfg.max_seq_len // 2:]
            prompt = torch.tensor([prompt_ids] * cfg.group_size, dtype=torch.long)

            completions = model.generate(
                prompt, cfg.max_new_tokens, cfg.temperature, EOS,
                generator=sampler,
            )
            ids, mask = _completion_batch(prompt_ids, completions)
            with torch.no_grad():
                old_logprobs = sequence_logprobs(model(ids), ids, mask)

            texts = [decode([t for t in completions[i].tolist() if t != EOS])
                     for i in range(cfg.group_size)]
            request_items = []
            slots = []  # index into the service batch, or None for empty text
            for text in texts:
                if text.strip():
                    slots.append(len(request_items))
                    request_items.append({
                        "candidate_code": text,
                        "reference_code": pair.code,
                        "robot_profile": cfg.robot_profile,
                        "mode": "deterministic",
                    })
                else:
                    slots.append(None)

            request_sha = ""
            responses = []
            if request_items:
                try:
                    responses, request_sha = client.reward_batch(request_items)
                except RewardServiceError as exc:
                    save_checkpoint(model, cfg, out_checkpoint, step)
                    raise TrainingError(
                        f"reward service failed at step {step}; checkpoint "
                        f"saved to {out_checkpoint}: {exc}"
                    ) from exc

            rewards = []
            for i, slot in enumerate(slots):
                if slot is None:
                    rewards.append(0.0)
                    source = "empty_completion"
                    reason = "empty completion; not scorable"
                else:
                    rewards.append(float(responses[slot]["reward"]))
                    source = "service"
                    reason = responses[slot]["reason"]
                reward_log.write(json.dumps({
                    "step": step,
                    "task_id": pair.id,
                    "completion_index": i,
                    "completion_sha": hashlib.sha256(
                        texts[i].encode("utf-8")).hexdigest()[:16],
                    "reward": rewards[i],
                    "source": source,
                    "reason": reason,
                    "request_sha": request_sha,
                }) + "\n")

            reward_tensor = torch.tensor(rewards)
            advantages = group_advantages(reward_tensor)
            mean_rewards.append(float(reward_tensor.mean()))

            new_logprobs = sequence_logprobs(model(ids), ids, mask)
            ratio = torch.exp(new_logprobs - old_logprobs)
            clipped = torch.clamp(ratio, 1 - cfg.clip_eps, 1 + cfg.clip_eps)
            objective = torch.minimum(ratio * advantages, clipped * advantages)
            loss = -objective.mean()
            if cfg.kl_coef > 0:
                loss = loss + cfg.kl_coef * (new_logprobs - old_logprobs).pow(2).mean()

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            reward_log.write(json.dumps({
                "step": step,
                "task_id": pair.id,
                "mean_reward": mean_rewards[-1],
                "loss": round(float(loss.detach()), 6),
            }) + "\n")
            log.info("step %d: mean reward %.3f", step, mean_rewards[-1])

    save_checkpoint(model, cfg, out_checkpoint, steps)
    return {
        "steps": steps,
        "mean_rewards": mean_rewards,
        "checkpoint": str(out_checkpoint),
        "reward_log": str(reward_log_path),
    }
