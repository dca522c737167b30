import json
import math
import pathlib

import jsonschema
import pytest

import socnavbench as sb

ROOT = pathlib.Path(__file__).resolve().parents[2]


def golden_lines():
    return (ROOT / "tests" / "golden" / "messages.jsonl").read_text().splitlines()


def test_golden_messages_match_schema():
    schema = json.loads((ROOT / "schema" / "protocol.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    lines = golden_lines()
    assert lines
    for line in lines:
        validator.validate(json.loads(line))


def test_golden_messages_are_canonical():
    for line in golden_lines():
        assert sb.canonical_line(line) == line + "\n"


def test_schema_rejects_wrong_version():
    schema = json.loads((ROOT / "schema" / "protocol.schema.json").read_text())
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"type": "hello", "version": 2, "agent": "x"}, schema)
    with pytest.raises(sb.ProtocolError):
        sb.canonical_line('{"type":"hello","version":2,"agent":"x"}')


def test_metrics_on_straight_line():
    pts = [(0.04 * k, 0.0) for k in range(251)]
    assert sb.path_length(pts) == pytest.approx(10.0, abs=1e-9)
    assert sb.kinematics(pts)["average_speed"] == pytest.approx(1.0, abs=1e-9)


def test_ttc_head_on():
    # Gap closes from 4 m to 0.53 m at 2 m/s.
    t = sb.time_to_collision((0, 0), (1, 0), 0.23, (4, 0), (-1, 0), 0.3)
    assert t == pytest.approx((4 - 0.53) / 2, abs=1e-12)


def test_unicycle_quarter_arc():
    pose = (0.0, 0.0, 0.0)
    steps = int((math.pi / 2) / 0.04)
    for _ in range(steps):
        pose = sb.step_unicycle(pose, 1.0, 1.0)
    pose = sb.step_unicycle(pose, 1.0, 1.0, math.pi / 2 - steps * 0.04)
    assert math.dist(pose[:2], (1.0, 1.0)) / math.sqrt(2) < 0.02


def test_parse_tracks():
    tracks = sb.parse_tracks("0 1 0.0 0.0\n10 1 1.0 0.0\n", 25.0)
    assert tracks[1] == [(0.0, 0.0, 0.0), (0.4, 1.0, 0.0)]


def test_run_benchmark(tmp_path):
    meta = sb.run_benchmark(
        {
            "episodes": str(ROOT / "data" / "crossing"),
            "planner": "orca",
            "out": str(tmp_path),
            "bind": "127.0.0.1:0",
            "deterministic": True,
        }
    )
    assert meta["episodes"] == 5
    assert meta["pedestrian_collisions"] == 0
    assert (tmp_path / "summary.csv").exists()
