# Walkthrough: the annotation protocol over HTTP, end to end.
#
# A rater's client sees only blinded slots "a" and "b" with proxied audio
# URLs -- never system or voice names. Phase 1 records the holistic
# choice and locks it permanently; only then does phase 2 (the six-axis
# panel) become possible. The same service answers leaderboard queries on
# immutable log snapshots.

from fastapi.testclient import TestClient

from pairboard import WorldSpec
from pairboard.service import EvaluationService, create_app
from pairboard.simulate import generate_world, make_raters, run_simulation

spec = WorldSpec(
    n_systems=3, n_raters=6, n_sentences=30, languages=("hin", "tam"),
    rater_noise=20.0, tie_rate=0.1, seed=99,
)

# preload the log of a finished campaign so analytics have data,
# then let one more rater annotate live on top of it
history = run_simulation(spec)
service = EvaluationService(
    generate_world(spec).manifest,
    make_raters(spec),
    seed=31,
    initial_records=history.log.records,
)
client = TestClient(create_app(service))

token = client.post("/sessions", json={"rater_id": "r0001"}).json()["token"]
auth = {"Authorization": f"Bearer {token}"}

task = client.get("/tasks/next", headers=auth).json()
print("task as the rater sees it (note: no system identities anywhere):")
print(task, "\n")

# phase 1 requires playback proof; the client asserts both slots played
resp = client.post(
    f"/tasks/{task['task_id']}/overall",
    json={"choice": "A", "playback_proof": True},
    headers=auth,
)
print("after phase 1:", resp.json()["state"])

# the lock is permanent: a different choice is a 409 conflict
conflict = client.post(
    f"/tasks/{task['task_id']}/overall",
    json={"choice": "B", "playback_proof": True},
    headers=auth,
)
print("changing the locked choice:", conflict.status_code, conflict.json()["code"])

# phase 2: all six axes on the same scale
axes = {
    "intelligibility": "A", "expressiveness": "BothGood", "voice_quality": "A",
    "liveliness": "BothBad", "hallucinations": "BothGood", "noise": "A",
}
done = client.post(
    f"/tasks/{task['task_id']}/axes", json={"axes": axes}, headers=auth
)
print("after phase 2:", done.json(), "\n")

# leaderboard queries run on the current snapshot; the response embeds the
# snapshot length and bootstrap seed so results can be reproduced offline
board = client.get("/leaderboard", params={"replicates": 200}).json()
print(f"leaderboard over {board['meta']['snapshot_records']} records "
      f"(seed {board['meta']['seed']}):")
for e in board["entries"]:
    print(f"  #{e['rank']} {e['system_id']}: {e['rating']:.2f} "
          f"[{e['ci_lower']:.2f}, {e['ci_upper']:.2f}]  "
          f"win rate {e['win_rate_pct']:.0f}%")
