"""Seeded synthetic person-crop datasets for tests and demo runs.

Writes PNG crops, a manifest, Alphapose-style keypoints and per-model
predictions whose correctness depends on image quality and keypoint
confidence, so the whole pipeline has something to find.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .ingest import KP_INDEX

DATASETS = (("PETA", 0.6, 40.0), ("PA-100K", 0.9, 20.0), ("RAP", 1.3, 5.0))  # name, size scale, noise sigma
MODELS = ("VAC", "ALM", "DeepMar", "APR", "StrongBase")


def _box_blur(img: np.ndarray, passes: int) -> np.ndarray:
    out = img.astype(float)
    for _ in range(passes):
        p = np.pad(out, ((1, 1), (1, 1), (0, 0)), mode="edge")
        out = sum(p[dy : dy + out.shape[0], dx : dx + out.shape[1]] for dy in range(3) for dx in range(3)) / 9
    return out


def person_keypoints(rng: np.random.Generator, w: int, h: int, pose: str) -> np.ndarray:
    """A rough standing figure in a ``w x h`` crop as a ``(17, 3)`` array."""
    cx = w / 2 + rng.normal(0, w * 0.03)
    half = w * (0.06 if pose == "sideways" else 0.25)
    # image-left side holds the subject's right limbs when facing the camera
    sign = 1.0 if pose == "frontal" else -1.0
    kp = np.zeros((17, 3))

    def put(name, x, y):
        kp[KP_INDEX[name], :2] = (x, y)

    put("nose", cx, h * 0.10)
    put("left_eye", cx + sign * half * 0.2, h * 0.08)
    put("right_eye", cx - sign * half * 0.2, h * 0.08)
    put("left_ear", cx + sign * half * 0.35, h * 0.09)
    put("right_ear", cx - sign * half * 0.35, h * 0.09)
    for side, s in (("left", sign), ("right", -sign)):
        put(f"{side}_shoulder", cx + s * half, h * 0.20)
        put(f"{side}_elbow", cx + s * half * 1.1, h * 0.35)
        put(f"{side}_wrist", cx + s * half * 1.1, h * 0.48)
        put(f"{side}_hip", cx + s * half * 0.7, h * 0.52)
        put(f"{side}_knee", cx + s * half * 0.7, h * 0.72)
        put(f"{side}_ankle", cx + s * half * 0.7, h * 0.92)
    kp[:, :2] += rng.normal(0, 0.5, size=(17, 2))
    base = rng.uniform(0.3, 0.98)
    kp[:, 2] = np.clip(base + rng.normal(0, 0.08, 17), 0, 1)
    if pose == "backside":
        kp[:5, 2] *= 0.5
    return kp


def make_dataset(root, n: int = 50, seed: int = 0, datasets=DATASETS, models=MODELS) -> dict[str, Path]:
    """Generate ``n`` samples under ``root``; returns the written file paths."""
    rng = np.random.default_rng(seed)
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    manifest, kp_entries, pred_rows = [], [], []
    poses = ("frontal", "sideways", "backside")

    for i in range(n):
        name, scale, noise = datasets[i % len(datasets)]
        sid = f"{name.lower().replace('-', '')}_{i:04d}"
        w = int(rng.integers(16, 28) * scale)
        h = int(w * rng.uniform(2.0, 2.6))
        light = rng.uniform(0.4, 1.0)
        smooth = _box_blur(rng.uniform(0, 255, size=(h, w, 3)), 3) * light
        img = smooth + rng.normal(0, noise * rng.uniform(0.5, 1.5), size=smooth.shape)
        rel = Path("images") / f"{sid}.png"
        Image.fromarray(np.clip(img, 0, 255).astype(np.uint8)).save(root / rel)

        gt = int(rng.integers(0, 2))
        pose = poses[int(rng.integers(0, 3))]
        kp = person_keypoints(rng, w, h, pose)
        manifest.append((sid, rel.as_posix(), name, "test", gt))
        kp_entries.append({"image_id": sid, "keypoints": [round(float(v), 4) for v in kp.ravel()], "score": 1.0})

        size_q = min(1.0, w * h / (36 * 90))
        quality = 0.5 * size_q + 0.3 * kp[:5, 2].mean() + 0.2 * light
        p_correct = float(np.clip(0.72 + 0.27 * quality, 0.5, 0.995))
        for m in models:
            correct = rng.random() < p_correct
            pred_rows.append((m, sid, gt if correct else 1 - gt))

    paths = {"manifest": root / "manifest.csv", "keypoints": root / "keypoints.json", "predictions": root / "predictions.csv"}
    with open(paths["manifest"], "w", newline="") as fh:
        w_ = csv.writer(fh, lineterminator="\n")
        w_.writerow(("sample_id", "path", "dataset", "split", "gender_gt"))
        w_.writerows(manifest)
    paths["keypoints"].write_text(json.dumps(kp_entries))
    with open(paths["predictions"], "w", newline="") as fh:
        w_ = csv.writer(fh, lineterminator="\n")
        w_.writerow(("model_id", "sample_id", "gender_pred"))
        w_.writerows(pred_rows)
    return paths
