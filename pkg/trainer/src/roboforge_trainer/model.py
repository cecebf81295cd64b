"""Tiny causal transformer with LoRA adapters, built for CPU smoke runs.

The toy profile trains from random initialization; LoRA wraps every linear
projection (attention, MLP, and the LM head) so the adapters carry all of
the learning while the base stays frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from .tokenizer import VOCAB_SIZE


@dataclass
class ModelConfig:
    vocab_size: int = VOCAB_SIZE
    n_embd: int = 64
    n_head: int = 2
    n_layer: int = 2
    max_seq_len: int = 512

    def validate(self):
        if self.n_embd % self.n_head:
            raise ValueError("n_embd must be divisible by n_head")


class Block(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.ln1 = nn.LayerNorm(cfg.n_embd)
        self.qkv = nn.Linear(cfg.n_embd, 3 * cfg.n_embd)
        self.proj = nn.Linear(cfg.n_embd, cfg.n_embd)
        self.ln2 = nn.LayerNorm(cfg.n_embd)
        self.fc_up = nn.Linear(cfg.n_embd, 4 * cfg.n_embd)
        self.fc_down = nn.Linear(4 * cfg.n_embd, cfg.n_embd)
        self.n_head = cfg.n_head

    def forward(self, x):
        b, t, c = x.shape
        q, k, v = self.qkv(self.ln1(x)).chunk(3, dim=-1)
        heads = self.n_head
        q = q.view(b, t, heads, c // heads).transpose(1, 2)
        k = k.view(b, t, heads, c // heads).transpose(1, 2)
        v = v.view(b, t, heads, c // heads).transpose(1, 2)
        attn = F.scaled_dot_product_attention(q, k, v, is_causal=True)
        attn = attn.transpose(1, 2).reshape(b, t, c)
        x = x + self.proj(attn)
        x = x + self.fc_down(F.gelu(self.fc_up(self.ln2(x))))
        return x


class TinyCausalLM(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        self.tok_emb = nn.Embedding(cfg.vocab_size, cfg.n_embd)
        self.pos_emb = nn.Embedding(cfg.max_seq_len, cfg.n_embd)
        self.blocks = nn.ModuleList(Block(cfg) for _ in range(cfg.n_layer))
        self.ln_f = nn.LayerNorm(cfg.n_embd)
        self.lm_head = nn.Linear(cfg.n_embd, cfg.vocab_size, bias=False)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        b, t = ids.shape
        if t > self.cfg.max_seq_len:
            raise ValueError(f"sequence length {t} > max_seq_len {self.cfg.max_seq_len}")
        pos = torch.arange(t, device=ids.device)
        x = self.tok_emb(ids) + self.pos_emb(pos)[None]
        for block in self.blocks:
            x = block(x)
        return self.lm_head(self.ln_f(x))

    @torch.no_grad()
    def generate(
        self,
        prompts: torch.Tensor,
        max_new_tokens: int,
        temperature: float,
        eos_id: int,
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Batched sampling; returns only the generated continuation."""
        ids = prompts
        out = []
        finished = torch.zeros(ids.shape[0], dtype=torch.bool)
        for _ in range(max_new_tokens):
            if ids.shape[1] >= self.cfg.max_seq_len:
                break
            logits = self(ids)[:, -1, :]
            if temperature <= 0:
                nxt = logits.argmax(dim=-1, keepdim=True)
            else:
                probs = F.softmax(logits / temperature, dim=-1)
                nxt = torch.multinomial(probs, 1, generator=generator)
            nxt[finished] = eos_id
            out.append(nxt)
            finished |= nxt.squeeze(1) == eos_id
            ids = torch.cat([ids, nxt], dim=1)
            if bool(finished.all()):
                break
        if not out:
            return torch.empty((ids.shape[0], 0), dtype=torch.long)
        return torch.cat(out, dim=1)


class LoRALinear(nn.Module):
    """Frozen linear plus a trainable low-rank update (B @ A, scaled)."""

    def __init__(self, base: nn.Linear, rank: int, alpha: float):
        super().__init__()
        self.base = base
        for p in self.base.parameters():
            p.requires_grad_(False)
        self.lora_a = nn.Parameter(torch.empty(rank, base.in_features))
        self.lora_b = nn.Parameter(torch.zeros(base.out_features, rank))
        nn.init.kaiming_uniform_(self.lora_a, a=math.sqrt(5))
        self.scaling = alpha / rank

    def forward(self, x):
        return self.base(x) + F.linear(F.linear(x, self.lora_a), self.lora_b) * self.scaling


def apply_lora(model: TinyCausalLM, rank: int, alpha: float) -> TinyCausalLM:
    """Freeze everything, then wrap every Linear with a LoRA adapter."""
    if rank <= 0:
        raise ValueError("LoRA rank must be positive")
    for p in model.parameters():
        p.requires_grad_(False)
    for block in model.blocks:
        block.qkv = LoRALinear(block.qkv, rank, alpha)
        block.proj = LoRALinear(block.proj, rank, alpha)
        block.fc_up = LoRALinear(block.fc_up, rank, alpha)
        block.fc_down = LoRALinear(block.fc_down, rank, alpha)
    model.lm_head = LoRALinear(model.lm_head, rank, alpha)
    return model


def trainable_parameters(model: nn.Module):
    return [p for p in model.parameters() if p.requires_grad]


def masked_lm_loss(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Next-token cross entropy over supervised positions only."""
    shifted_logits = logits[:, :-1, :].reshape(-1, logits.shape[-1])
    shifted_labels = labels[:, 1:].reshape(-1)
    return F.cross_entropy(shifted_logits, shifted_labels, ignore_index=-100)


def sequence_logprobs(logits: torch.Tensor, ids: torch.Tensor,
                      mask: torch.Tensor) -> torch.Tensor:
    """Per-sequence mean log-probability of ``ids`` where ``mask`` is true."""
    logprobs = F.log_softmax(logits[:, :-1, :], dim=-1)
    picked = logprobs.gather(-1, ids[:, 1:].unsqueeze(-1)).squeeze(-1)
    m = mask[:, 1:].float()
    return (picked * m).sum(dim=1) / m.sum(dim=1).clamp(min=1.0)
