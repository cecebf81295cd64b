from roboforge.lang import extract_code, parse


def test_fenced_block_wins():
    text = (
        "Sure! Here is the code:\n"
        "```python\naw.takeoff()\naw.land()\n```\n"
        "Hope that helps."
    )
    assert extract_code(text) == "aw.takeoff()\naw.land()\n"


def test_unfenced_whole_text():
    assert extract_code("aw.takeoff()\naw.land()") == "aw.takeoff()\naw.land()"


def test_longest_parseable_run():
    text = (
        "The plan is simple.\n"
        "aw.takeoff()\n"
        "p = aw.get_drone_position()\n"
        "aw.fly_to([p[0], p[1], p[2] - 5])\n"
        "That's it!\n"
    )
    code = extract_code(text)
    assert code is not None
    program = parse(code)
    assert len(program) == 3


def test_second_run_longer_than_first():
    text = (
        "x = 1\n"
        "?? prose ??\n"
        "aw.takeoff()\n"
        "aw.land()\n"
        "x = 2\n"
    )
    code = extract_code(text)
    assert len(parse(code)) == 3


def test_nothing_parseable():
    assert extract_code("I cannot help with that request.") is None
    assert extract_code("") is None


def test_fenced_without_language_tag():
    text = "```\naw.takeoff()\n```"
    assert extract_code(text) == "aw.takeoff()\n"
