"""
The staged pipeline, its CLI, and the read-only HTTP API
========================================================

Drives a small end-to-end run through the same entry points a shell user
would hit, then queries the serving layer with an in-process client.
"""

import json
import tempfile
from pathlib import Path

from probseg.cli import main
from probseg.pipeline import desk_profile, save_config

root = Path(tempfile.mkdtemp(prefix="probseg_demo_"))
data = root / "data"

# a deliberately small run: 6 phantoms, one plane, 2 folds, 2 epochs
cfg = desk_profile(data, seed=1, n_patients=6, n_test=2, fold_count=2)
from dataclasses import replace

from probseg import Plane, TrainConfig

cfg = replace(cfg, planes=(Plane.AXIAL,),
              train=TrainConfig(epochs=2, warmup_epochs=0))
cfg_path = root / "probseg.json"
save_config(cfg, cfg_path)

# -- every stage is a subcommand ----------------------------------------------

for stage in ("phantom", "preprocess", "split", "train", "predict",
              "reconstruct", "ensemble", "evaluate", "report"):
    code = main([stage, "--config", str(cfg_path), "--quiet"])
    print("probseg %-11s -> exit %d" % (stage, code))
    assert code == 0

# -- the artifact tree --------------------------------------------------------

print("\nartifacts under", data.name)
for p in sorted(data.rglob("*")):
    if p.is_file() and p.suffix in (".csv", ".json", ".txt") \
            and "provenance" not in p.parts and p.parent.name != "raw":
        print("  ", p.relative_to(data))

# -- stages are restartable and reruns are stable -------------------------------

sweep = (data / "eval/sweep.csv").read_bytes()
main(["evaluate", "--config", str(cfg_path), "--quiet"])
print("\nevaluate rerun byte-identical:",
      (data / "eval/sweep.csv").read_bytes() == sweep)

# -- the HTTP surface ----------------------------------------------------------

from fastapi.testclient import TestClient

from probseg.server import create_app

client = TestClient(create_app(cfg))

patients = client.get("/api/patients").json()
pid = patients[0]["patient_id"]
print("\nserved patients  :", [p["patient_id"] for p in patients])

detail = client.get(f"/api/patients/{pid}").json()
print("axial slices     :", detail["planes"]["axial"]["n_slices"])

png = client.get(f"/api/patients/{pid}/axial/slices/16/prob.png")
print("prob.png         :", png.headers["content-type"], len(png.content), "bytes")

raw = client.get(f"/api/patients/{pid}/axial/slices/16/prob.bin")
print("prob.bin         :", len(raw.content), "bytes of float32")

contours = client.get(
    f"/api/patients/{pid}/axial/slices/16/contours",
    params={"th": 0.5}).json()
print("contours @ 0.5   : %d predicted, %d ground-truth" %
      (len(contours["predicted"]), len(contours["gt"])))

metrics = client.get(f"/api/patients/{pid}/metrics",
                     params={"plane": "axial", "th": 0.47}).json()
print("metrics near .47 : snapped to th=%.1f, mean DSC %.4f" %
      (metrics["threshold"], metrics["mean_dsc"]))

report = client.get("/api/report/cohort").json()
print("cohort payload   :", sorted(report.keys()))
