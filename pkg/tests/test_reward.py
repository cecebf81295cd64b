import pytest

from roboforge.lang import interpret, parse
from roboforge.llm import ClientError
from roboforge.reward import (
    ReferenceExecutionError,
    RewardRequest,
    RewardResponse,
    build_match_config,
    compute_reward,
    reward_deterministic,
    reward_hybrid,
    reward_llm,
)
from roboforge.sim import Simulator, builtin_profiles, uav_profile

PROFILES = builtin_profiles()

REF = (
    "aw.takeoff()\n"
    "position = aw.get_drone_position()\n"
    "aw.fly_to([position[0] + 5, position[1], position[2]])\n"
    "aw.set_yaw(90)\n"
)
RENAMED = (
    "aw.takeoff()\n"
    "base = aw.get_drone_position()\n"
    "aw.fly_to([base[0] + 5, base[1], base[2]])\n"
    "aw.set_yaw(90)\n"
)
SHORTER = REF.replace("+ 5", "+ 4")
ROTATED = REF.replace("aw.set_yaw(90)", "aw.set_yaw(120)")


def req(candidate, reference=REF, **kwargs):
    return RewardRequest(candidate_code=candidate, reference_code=reference,
                         **kwargs)


def test_self_equivalence():
    assert reward_deterministic(req(REF), PROFILES).reward == 1


def test_variable_rename_is_equivalent():
    # simulate both sides to confirm the oracle premise, then assert reward
    a = interpret(parse(REF), Simulator(uav_profile()))
    b = interpret(parse(RENAMED), Simulator(uav_profile()))
    assert a.transitions == b.transitions
    assert reward_deterministic(req(RENAMED), PROFILES).reward == 1


def test_distance_mutation_is_zero():
    response = reward_deterministic(req(SHORTER), PROFILES)
    assert response.reward == 0
    assert "differs" in response.reason


def test_rotation_mutation_is_zero():
    assert reward_deterministic(req(ROTATED), PROFILES).reward == 0


def test_candidate_error_gives_reason():
    response = reward_deterministic(req("aw.takeoff()\nx = 1 / 0\n"), PROFILES)
    assert response.reward == 0
    assert "division by zero" in response.reason
    assert response.candidate_trajectory is None


def test_surplus_candidate_actions_zero():
    longer = REF + "p = aw.get_drone_position()\naw.fly_to([p[0], p[1], p[2] - 2])\n"
    response = reward_deterministic(req(longer), PROFILES)
    assert response.reward == 0
    assert "count mismatch" in response.reason


def test_reference_failure_is_server_error():
    with pytest.raises(ReferenceExecutionError):
        reward_deterministic(req(REF, reference="x = 1 / 0\n"), PROFILES)


def test_symmetry_when_both_clean():
    for a, b in [(REF, RENAMED), (REF, SHORTER), (REF, ROTATED)]:
        ab = reward_deterministic(req(a, reference=b), PROFILES).reward
        ba = reward_deterministic(req(b, reference=a), PROFILES).reward
        assert ab == ba


def test_takeoff_land_ignored_by_default():
    no_land = REF
    with_land = REF + "aw.land()\n"
    assert reward_deterministic(req(with_land, reference=no_land), PROFILES).reward == 1
    overrides = {"ignore_kinds": []}
    assert reward_deterministic(
        req(with_land, reference=no_land, match_overrides=overrides), PROFILES
    ).reward == 0


def test_match_override_validation():
    with pytest.raises(ValueError):
        build_match_config({"position_tolerance": 0.5, "wormhole": True})
    cfg = build_match_config({"position_tolerance": 0.5, "mode": "prefix"})
    assert cfg.position_tolerance == 0.5 and cfg.mode == "prefix"


def test_request_validation():
    with pytest.raises(ValueError):
        RewardRequest(candidate_code="", reference_code=REF)
    with pytest.raises(ValueError):
        RewardRequest(candidate_code=REF, reference_code=" ")
    with pytest.raises(ValueError):
        RewardRequest(candidate_code=REF, reference_code=REF, mode="psychic")
    with pytest.raises(ValueError):
        RewardResponse(reward=2, reason="x")


def test_reward_llm_parses_verdicts(stub_client_factory):
    assert reward_llm(req(REF), stub_client_factory(["1"])).reward == 1
    assert reward_llm(req(REF), stub_client_factory(
        ["The code fully matches. 1"]
    )).reward == 1
    assert reward_llm(req(REF), stub_client_factory(["0"])).reward == 0


def test_reward_llm_retries_then_zero(stub_client_factory):
    client = stub_client_factory(["hmm", "thinking...", "still prose"])
    response = reward_llm(req(REF), client)
    assert response.reward == 0
    assert response.reason == "judge_unparseable"
    assert len(client.requests) == 3


def test_reward_llm_transport_error_propagates(stub_client_factory):
    client = stub_client_factory([ClientError("boom", retryable=True)])
    with pytest.raises(ClientError):
        reward_llm(req(REF), client)


def test_hybrid_consults_judge_on_narrow_miss(stub_client_factory):
    near = REF.replace("+ 5", "+ 5.15")  # 0.15 m off: outside 0.1, inside 0.2
    judge_yes = stub_client_factory(["1"])
    response = reward_hybrid(req(near), PROFILES, judge_yes)
    assert response.reward == 1 and "hybrid" in response.reason

    far = REF.replace("+ 5", "+ 6")  # 1 m off: outside 2x tolerance
    untouched = stub_client_factory([])
    response = reward_hybrid(req(far), PROFILES, untouched)
    assert response.reward == 0
    assert untouched.requests == []


def test_hybrid_skips_judge_on_exact_match(stub_client_factory):
    untouched = stub_client_factory([])
    assert reward_hybrid(req(RENAMED), PROFILES, untouched).reward == 1
    assert untouched.requests == []


def test_compute_reward_dispatch(stub_client_factory):
    assert compute_reward(req(REF), PROFILES).reward == 1
    with pytest.raises(ClientError):
        compute_reward(req(REF, mode="llm"), PROFILES)
    assert compute_reward(
        req(REF, mode="llm"), PROFILES, stub_client_factory(["1"])
    ).reward == 1
    with pytest.raises(KeyError):
        compute_reward(req(REF, robot_profile="submarine"), PROFILES)


def test_latency_recorded():
    assert reward_deterministic(req(REF), PROFILES).latency_ms >= 0.0


def test_mutation_sensitivity_sweep():
    # any single commanded distance +-1 m or rotation +-30 degrees flips to 0
    base_moves = [
        "aw.fly_to([p[0] + 5, p[1], p[2]])",
        "aw.fly_to([p[0], p[1] - 3, p[2]])",
        "aw.fly_to([p[0], p[1], p[2] - 7])",
    ]
    for idx, stmt in enumerate(base_moves):
        code = "aw.takeoff()\np = aw.get_drone_position()\n" + stmt + "\n"
        for delta in ("+ 1", "- 1"):
            mutated = code.replace(stmt, stmt[:-2] + f" {delta}])")
            assert reward_deterministic(
                req(mutated, reference=code), PROFILES
            ).reward == 0, (idx, delta)
    rotation = "aw.takeoff()\naw.set_yaw(60)\n"
    for target in (30, 90):
        mutated = rotation.replace("60", str(target))
        assert reward_deterministic(
            req(mutated, reference=rotation), PROFILES
        ).reward == 0
