"""Trainer for robot code generation: LoRA SFT plus GRPO with an external
binary reward service."""

__version__ = "0.1.0"
