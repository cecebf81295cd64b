import logging

import pytest

from roboforge.llm import MockChatClient
from roboforge.synthesis import (
    InstructionRecord,
    default_profiles,
    generate_instructions,
    parse_instruction_lines,
    policy_violations,
)


def test_policy_accepts_valid_instruction():
    assert policy_violations(
        "Fly 5 meters up, then fly 4 meters down in the world frame."
    ) == []


@pytest.mark.parametrize(
    "text",
    [
        "Fly 1 meter up.",
        "Fly 2 meters up.",
        "Fly 10 meters north in the world frame.",
        "Fly 15 meters north.",
        "Fly 4.5 meters east.",
        "Rotate 45 degrees clockwise, then fly 4 meters forward.",
        "Turn 31 degrees counterclockwise.",
    ],
)
def test_policy_rejects(text):
    assert policy_violations(text)


def test_policy_checks_all_tokens():
    text = "Fly 5 meters up, then fly 12 meters down."
    problems = policy_violations(text)
    assert len(problems) == 1 and "12" in problems[0]


def test_policy_accepts_square_phrasing():
    text = ("Take off and fly up 5 meters. You should fly in a square pattern "
            "with 5-meter sides by moving north, east, south, and west in the "
            "world axis.")
    assert policy_violations(text) == []


def test_parse_lines_strips_markers():
    completion = (
        "1. Fly 5 meters up.\n"
        "2) Fly 4 meters down.\n"
        "- Rotate 90 degrees clockwise.\n"
        "* Turn to face the local south.\n"
        "\n"
        "Fly 3 meters east.\n"
    )
    lines = parse_instruction_lines(completion)
    assert lines == [
        "Fly 5 meters up.",
        "Fly 4 meters down.",
        "Rotate 90 degrees clockwise.",
        "Turn to face the local south.",
        "Fly 3 meters east.",
    ]


def test_instruction_record_review_flag():
    with pytest.raises(ValueError):
        InstructionRecord("x", "t", "p", "simple", True)
    with pytest.raises(ValueError):
        InstructionRecord("x", "t", "p", "complex", False)


def test_default_profile_counts_with_mock():
    client = MockChatClient()
    profiles = default_profiles()
    simple_train = generate_instructions(profiles["simple-train"], client)
    assert len(simple_train) == 122  # 110 plain + 12 yz-plane
    complex_train = generate_instructions(profiles["complex-train"], client)
    assert len(complex_train) == 42
    assert all(r.needs_human_review for r in complex_train)
    assert not any(r.needs_human_review for r in simple_train)
    assert len(generate_instructions(profiles["simple-eval"], client)) == 28
    assert len(generate_instructions(profiles["complex-eval"], client)) == 11


def test_generated_ids_are_sequential_per_profile():
    client = MockChatClient()
    records = generate_instructions(default_profiles()["complex-eval"], client)
    assert [r.id for r in records] == [f"complex-eval-{i:04d}" for i in range(1, 12)]


def test_rejection_and_reprompt(stub_client_factory, caplog):
    profile = default_profiles()["complex-eval"]
    from dataclasses import replace

    profile = replace(profile, requested_counts=(("square", 2),))
    good = ("Take off and fly up 5 meters. You should fly in a square pattern "
            "with 5-meter sides by moving north, east, south, and west in the "
            "world axis.")
    client = stub_client_factory([
        "1. Fly 1 meter up.\n2. " + good,   # first line violates policy
        "1. " + good.replace("5-meter", "6-meter"),
    ])
    with caplog.at_level(logging.WARNING):
        records = generate_instructions(profile, client)
    assert len(records) == 2
    assert len(client.requests) == 2
    assert any("rejected instruction" in r.message for r in caplog.records)


def test_partial_result_after_budget(stub_client_factory, caplog):
    profile = default_profiles()["complex-eval"]
    from dataclasses import replace

    profile = replace(profile, requested_counts=(("square", 3),))
    client = stub_client_factory(["Fly 1 meter up."] * 3)
    with caplog.at_level(logging.WARNING):
        records = generate_instructions(profile, client, retry_budget=3)
    assert records == []
    assert any("only 0 of 3" in r.message for r in caplog.records)
