"""Read-only HTTP service over an evaluated pipeline data root.

Serves slice images (8-bit PNG), raw float probability rows for exact
client-side thresholding, iso-contours, per-patient sweep metrics, and
the cohort report. All artifacts are immutable; requests share a small
in-process volume cache and no per-request state.
"""

from __future__ import annotations

import csv
import io
import json
from functools import lru_cache

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image

from .pipeline import MissingStageError, PipelineConfig, _Paths, read_sweep_csv
from .reconstruct import ProbVolume, extract_contours
from .sequences import read_fold_manifest
from .volume import Plane, Volume3D, n_slices, read_bundle, slice_volume

__all__ = ["create_app"]


def _png(slice_2d: np.ndarray) -> bytes:
    img = Image.fromarray(slice_2d.astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def _scale_minmax(slice_2d: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi <= lo:
        return np.zeros_like(slice_2d)
    return np.clip((slice_2d - lo) / (hi - lo) * 255.0, 0.0, 255.0).round()


class _Store:
    """Lazy artifact index for one data root."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.paths = _Paths(cfg)
        sweep_path = self.paths.eval / "sweep.csv"
        if not sweep_path.exists():
            raise MissingStageError(sweep_path, "evaluate")
        self.sweep_rows = read_sweep_csv(sweep_path)
        self.patients: dict[str, dict] = {}
        for plane in cfg.planes:
            split_path = self.paths.split(plane)
            if not split_path.exists():
                raise MissingStageError(split_path, "split")
            for pid in read_fold_manifest(split_path).test_ids:
                self.patients.setdefault(pid, {"planes": set()})
                if self.paths.prob(plane, "ensemble", pid).with_suffix(".json").exists():
                    self.patients[pid]["planes"].add(plane)
        for pid in self.patients:
            meta_path = self.paths.meta(self.paths.preproc, pid)
            if not meta_path.exists():
                raise MissingStageError(meta_path, "preprocess")
            self.patients[pid]["meta"] = json.loads(meta_path.read_text())

    @lru_cache(maxsize=64)
    def volume(self, pid: str, kind: str) -> Volume3D:
        return read_bundle(self.paths.bundle(self.paths.preproc, pid, kind))

    @lru_cache(maxsize=16)
    def prob(self, pid: str, plane: Plane) -> ProbVolume:
        vol = read_bundle(self.paths.prob(plane, "ensemble", pid))
        maps = np.stack([slice_volume(vol, plane, k)
                         for k in range(1, n_slices(vol, plane) + 1)])
        return ProbVolume(plane, maps, vol.spacing_mm)

    @lru_cache(maxsize=16)
    def gt_prob(self, pid: str, plane: Plane) -> ProbVolume:
        gtv = self.volume(pid, "gtv")
        maps = np.stack([slice_volume(gtv, plane, k)
                         for k in range(1, n_slices(gtv, plane) + 1)])
        return ProbVolume(plane, maps, gtv.spacing_mm)

    def plane_info(self, pid: str) -> dict:
        info = {}
        for plane in sorted(self.patients[pid]["planes"], key=lambda p: p.value):
            prob = self.prob(pid, plane)
            info[plane.value] = {
                "n_slices": prob.n_slices,
                "rows": int(prob.maps.shape[1]),
                "cols": int(prob.maps.shape[2]),
            }
        return info


def create_app(cfg: PipelineConfig) -> FastAPI:
    store = _Store(cfg)
    app = FastAPI(title="probseg", docs_url=None, redoc_url=None)
    # the API is read-only, so a wildcard GET policy lets the viewer run
    # from any origin (dev server, file host) without a proxy
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET"])

    def patient_or_404(pid: str) -> dict:
        if pid not in store.patients:
            raise HTTPException(404, f"unknown patient {pid}")
        return store.patients[pid]

    def plane_or_404(pid: str, name: str) -> Plane:
        try:
            plane = Plane.parse(name)
        except ValueError:
            raise HTTPException(404, f"unknown plane {name}") from None
        if plane not in patient_or_404(pid)["planes"]:
            raise HTTPException(404, f"no data for patient {pid} in plane {name}")
        return plane

    def slice_or_404(pid: str, plane: Plane, k: int) -> ProbVolume:
        prob = store.prob(pid, plane)
        if not 1 <= k <= prob.n_slices:
            raise HTTPException(404, f"slice {k} outside 1..{prob.n_slices}")
        return prob

    def threshold_or_400(th: float, lo: float = 0.0, hi: float = 1.0) -> float:
        if not np.isfinite(th) or not lo <= th <= hi:
            raise HTTPException(400, f"invalid threshold {th}")
        return float(th)

    @app.get("/api/patients")
    def patients():
        out = []
        for pid in sorted(store.patients):
            entry = {"patient_id": pid, **store.patients[pid]["meta"],
                     "planes": sorted(p.value for p in store.patients[pid]["planes"])}
            out.append(entry)
        return out

    @app.get("/api/patients/{pid}")
    def patient_detail(pid: str):
        rec = patient_or_404(pid)
        return {
            "patient_id": pid,
            **{k: v for k, v in rec["meta"].items() if k != "patient_id"},
            "planes": store.plane_info(pid),
            "thresholds": list(store.cfg.sweep.thresholds),
        }

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/ct.png")
    def ct_png(pid: str, plane_name: str, k: int):
        plane = plane_or_404(pid, plane_name)
        slice_or_404(pid, plane, k)
        vol = store.volume(pid, "ct")
        data = slice_volume(vol, plane, k)
        scaled = _scale_minmax(data, float(vol.data.min()), float(vol.data.max()))
        return Response(_png(scaled), media_type="image/png")

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/pet.png")
    def pet_png(pid: str, plane_name: str, k: int):
        plane = plane_or_404(pid, plane_name)
        slice_or_404(pid, plane, k)
        vol = store.volume(pid, "pet")
        data = slice_volume(vol, plane, k)
        scaled = _scale_minmax(data, 0.0, float(vol.data.max()))
        return Response(_png(scaled), media_type="image/png")

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/prob.png")
    def prob_png(pid: str, plane_name: str, k: int):
        plane = plane_or_404(pid, plane_name)
        prob = slice_or_404(pid, plane, k)
        scaled = (prob.slice_map(k) * 255.0).round()
        return Response(_png(scaled), media_type="image/png")

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/prob.bin")
    def prob_bin(pid: str, plane_name: str, k: int):
        plane = plane_or_404(pid, plane_name)
        prob = slice_or_404(pid, plane, k)
        payload = prob.slice_map(k).astype("<f4").tobytes()
        return Response(payload, media_type="application/octet-stream")

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/mask.bin")
    def mask_bin(pid: str, plane_name: str, k: int, th: float = Query(...)):
        plane = plane_or_404(pid, plane_name)
        prob = slice_or_404(pid, plane, k)
        th = threshold_or_400(th)
        mask = (prob.slice_map(k) > th).astype(np.uint8)
        return Response(mask.tobytes(), media_type="application/octet-stream")

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/gt.bin")
    def gt_bin(pid: str, plane_name: str, k: int):
        plane = plane_or_404(pid, plane_name)
        slice_or_404(pid, plane, k)
        gt = store.gt_prob(pid, plane)
        mask = (gt.slice_map(k) > 0.5).astype(np.uint8)
        return Response(mask.tobytes(), media_type="application/octet-stream")

    @app.get("/api/patients/{pid}/{plane_name}/slices/{k}/contours")
    def contours(pid: str, plane_name: str, k: int, th: float = Query(...)):
        plane = plane_or_404(pid, plane_name)
        prob = slice_or_404(pid, plane, k)
        th = threshold_or_400(th)
        if th in (0.0, 1.0):
            predicted = []  # nothing strictly exceeds 1.0; 0.0 has no iso-level
        else:
            predicted = [c.tolist() for c in extract_contours(prob, k, th)]
        gt = [c.tolist() for c in extract_contours(store.gt_prob(pid, plane), k, 0.5)]
        return {"threshold": th, "predicted": predicted, "gt": gt}

    @app.get("/api/patients/{pid}/metrics")
    def metrics(pid: str, plane: str = Query(...), th: float = Query(...)):
        patient_or_404(pid)
        try:
            plane_val = Plane.parse(plane).value
        except ValueError:
            raise HTTPException(400, f"invalid plane {plane}") from None
        th = threshold_or_400(th)
        rows = [r for r in store.sweep_rows
                if r["patient"] == pid and r["plane"] == plane_val]
        if not rows:
            raise HTTPException(404, f"no metrics for {pid}/{plane_val}")
        nearest = min(rows, key=lambda r: abs(r["threshold"] - th))
        return {"requested_th": th, **nearest}

    @app.get("/api/report/cohort")
    def cohort():
        cohort_path = store.paths.eval / "cohort.csv"
        if not cohort_path.exists():
            raise HTTPException(404, "cohort report not generated; run report")
        with open(cohort_path, newline="") as fh:
            stats = list(csv.DictReader(fh))
        boxplot = json.loads((store.paths.eval / "boxplot.json").read_text())
        scatter = json.loads((store.paths.eval / "scatter.json").read_text())
        return {"cohort": stats, "boxplot": boxplot, "scatter": scatter}

    return app
