"""Drives `sim serve` over a real socket, validates every frame, then replays the
session's hand trace headlessly and compares the physics rows byte for byte."""

import asyncio
import json
import re
import signal
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema
import websockets

sim, root = Path(sys.argv[1]), Path(sys.argv[2])
scenario = root / "tests" / "fixtures" / "tiny.json"
protocol = jsonschema.Draft202012Validator(json.loads((root / "docs" / "protocol.schema.json").read_text()))
failures = []


def check(frame):
    for error in protocol.iter_errors(frame):
        failures.append(f"{frame.get('type')}: {error.message}")


async def session(port):
    frames = []
    async with websockets.connect(f"ws://127.0.0.1:{port}/") as ws:

        async def read():
            async for text in ws:
                frames.append(json.loads(text))

        reader = asyncio.create_task(read())
        await ws.send(json.dumps({"type": "control", "action": "start"}))
        for k in range(90):
            await ws.send(json.dumps({"type": "hand_pose", "t_client": k / 60, "x": 0.01 * k, "y": 0.004 * k}))
            await asyncio.sleep(1 / 60)
            if k == 45:
                await ws.send(json.dumps({"type": "control", "action": "set_mode", "mode": "blind"}))
        await ws.send("not json")
        await ws.send(json.dumps({"type": "control", "action": "pause"}))
        await asyncio.sleep(1.3)
        await ws.close()
        await reader
    return frames


with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "live"
    server = subprocess.Popen([sim, "serve", scenario, "--port", "0", "--out", out],
                              stderr=subprocess.PIPE, text=True)
    port = int(re.search(r":(\d+) ", server.stderr.readline()).group(1))
    frames = asyncio.run(session(port))
    server.send_signal(signal.SIGINT)
    server.communicate(timeout=20)

    for f in frames:
        check(f)
    types = [f["type"] for f in frames]
    for needed in ("scenario", "state", "error", "heartbeat"):
        if needed not in types:
            failures.append(f"no {needed} frame")
    blind_at = next(i for i, f in enumerate(frames) if f["type"] == "scenario" and f["mode"] == "blind")
    for f in frames[blind_at:]:
        if f["type"] == "state" and ("drones" in f or "centroid" in f):
            failures.append(f"blind state frame at tick {f['tick']} leaks positions")
    ticks = [f["tick"] for f in frames if f["type"] == "state"]
    if ticks != sorted(set(ticks)):
        failures.append("state ticks not strictly increasing")

    live = (out / "trace.csv").read_text().splitlines()
    rows = len(live) - 2
    replay = Path(tmp) / "replay"
    subprocess.run([sim, "run", scenario, "--hand-trace", out / "hand_trace.csv", "--ticks", str(rows),
                    "--out", replay], check=True, stdout=subprocess.DEVNULL)
    headless = (replay / "trace.csv").read_text().splitlines()
    if live[1:] != headless[1:]:
        failures.append("replayed rows differ from the live log")
    if (out / "events.jsonl").read_text() != (replay / "events.jsonl").read_text():
        failures.append("replayed events differ from the live log")

for f in failures:
    print("FAIL", f)
print(f"{len(frames)} frames, {rows} logged ticks")
sys.exit(1 if failures or rows < 10 else 0)
