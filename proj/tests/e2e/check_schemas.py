"""Presets and fixtures against the scenario schema; sample frames against the protocol schema."""

import copy
import json
import sys
from pathlib import Path

import jsonschema

root = Path(sys.argv[1])
scenario_schema = json.loads((root / "docs" / "scenario.schema.json").read_text())
protocol_schema = json.loads((root / "docs" / "protocol.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(scenario_schema)
jsonschema.Draft202012Validator.check_schema(protocol_schema)
scenarios = jsonschema.Draft202012Validator(scenario_schema)
protocol = jsonschema.Draft202012Validator(protocol_schema)

failures = []

documents = sorted((root / "scenarios").glob("*.json")) + [root / "tests" / "fixtures" / "tiny.json"]
for path in documents:
    for error in scenarios.iter_errors(json.loads(path.read_text())):
        failures.append(f"{path.name}: {error.json_path}: {error.message}")

base = json.loads((root / "scenarios" / "rhombus-4.json").read_text())
broken = {
    "missing name": lambda d: d.pop("name"),
    "wrong version": lambda d: d.update(schema_version=2),
    "typo key": lambda d: d.update(sampel_time=0.1),
    "bad anchor": lambda d: d["formation"]["drones"][0].update(anchor={"type": "wing"}),
    "both obstacles and layouts": lambda d: d.update(obstacles=[], layouts={"a": []}),
}
for label, mutate in broken.items():
    doc = copy.deepcopy(base)
    mutate(doc)
    if scenarios.is_valid(doc):
        failures.append(f"schema accepted a broken scenario: {label}")

good_frames = [
    {"type": "hand_pose", "t_client": 1.5, "x": 0.1, "y": -0.2},
    {"type": "control", "action": "start"},
    {"type": "control", "action": "set_mode", "mode": "blind"},
    {"type": "error", "code": "unknown_type", "detail": "unknown message type 'x'"},
    {"type": "heartbeat", "tick": 4, "running": True, "overruns": 0, "dropped_frames": 0},
]
bad_frames = [
    {"type": "control", "action": "set_mode"},
    {"type": "hand_pose", "x": 0.1},
    {"type": "state", "tick": 2, "t_sim": 0.1, "hand": {"x": 0, "y": 0}, "formation_label": "regular",
     "active_pattern": None, "events": [], "drones": []},
    {"type": "teleport"},
]
for frame in good_frames:
    for error in protocol.iter_errors(frame):
        failures.append(f"rejected valid frame {frame}: {error.message}")
for frame in bad_frames:
    if protocol.is_valid(frame):
        failures.append(f"accepted invalid frame {frame}")

for f in failures:
    print("FAIL", f)
print(f"{len(documents)} scenarios, {len(broken)} broken variants, {len(good_frames) + len(bad_frames)} frames checked")
sys.exit(1 if failures else 0)
