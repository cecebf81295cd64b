"""roboforge: robot-control mini-language, kinematic simulation, trajectory
metrics, LLM dataset synthesis, and a binary reward service."""

__version__ = "0.1.0"
