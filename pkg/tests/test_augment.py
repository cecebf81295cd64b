import pytest

from roboforge.lang import interpret, parse
from roboforge.llm import MockChatClient
from roboforge.sim import Simulator, uav_profile
from roboforge.synthesis import (
    AugmentationError,
    augment_instruction,
    augmentation_matches,
)

INSTR = "Fly 5 meters up, then fly 4 meters down in the world frame."
CODE = (
    "aw.takeoff()\n"
    "p = aw.get_drone_position()\n"
    "aw.fly_to([p[0], p[1], p[2] - 5])\n"
    "p = aw.get_drone_position()\n"
    "aw.fly_to([p[0], p[1], p[2] + 4])\n"
)


def test_augmentation_is_single_paragraph():
    text = augment_instruction(INSTR, CODE, MockChatClient())
    assert text
    assert "\n\n" not in text
    assert "fly 5 meters up" in text.lower()


def test_variants_differ():
    client = MockChatClient()
    a = augment_instruction(INSTR, CODE, client, variant=1)
    b = augment_instruction(INSTR, CODE, client, variant=2)
    assert a != b


def test_deterministic_for_same_variant():
    a = augment_instruction(INSTR, CODE, MockChatClient(), variant=1)
    b = augment_instruction(INSTR, CODE, MockChatClient(), variant=1)
    assert a == b


def test_two_paragraph_reply_triggers_retry(stub_client_factory):
    client = stub_client_factory([
        "First paragraph.\n\nSecond paragraph.",
        "A single clean paragraph. In the world frame, fly 5 meters up, "
        "then fly 4 meters down.",
    ])
    text = augment_instruction(INSTR, CODE, client)
    assert "single clean paragraph" in text
    assert len(client.requests) == 2
    assert "one paragraph" in client.requests[1][-1]["content"]


def test_list_markers_rejected(stub_client_factory):
    client = stub_client_factory([
        "- step one\n- step two",
        "1. do this",
        "",
    ])
    with pytest.raises(AugmentationError):
        augment_instruction(INSTR, CODE, client)


def test_validation_pass_accepts_faithful_augmentation():
    client = MockChatClient()
    reference_rows = interpret(parse(CODE), Simulator(uav_profile())).rows()
    text = augment_instruction(INSTR, CODE, client)
    assert augmentation_matches(text, reference_rows, client, uav_profile())


def test_validation_flags_dropped_action(stub_client_factory):
    reference_rows = interpret(parse(CODE), Simulator(uav_profile())).rows()
    # The re-grounding returns code that forgets the descent
    regrounder = stub_client_factory([
        "```\naw.takeoff()\np = aw.get_drone_position()\n"
        "aw.fly_to([p[0], p[1], p[2] - 5])\n```"
    ])
    bad_text = "Inspect the mast. In the world frame, ascend 5 meters."
    assert not augmentation_matches(bad_text, reference_rows, regrounder,
                                    uav_profile())


def test_validation_flags_unparseable_regrounding(stub_client_factory):
    reference_rows = interpret(parse(CODE), Simulator(uav_profile())).rows()
    regrounder = stub_client_factory(["cannot do that"])
    assert not augmentation_matches("text", reference_rows, regrounder,
                                    uav_profile())
