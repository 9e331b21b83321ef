"""Cut the bundled 64x64 HR fixture crops from scikit-image sample images.

All sources are public domain or CC0 (see tests/fixtures/SOURCES.md).
"""
import argparse
import pathlib

import numpy as np
from PIL import Image
from skimage import data

TRAIN = ["astronaut", "coffee", "chelsea", "rocket"]
HELDOUT = [("hubble_deep_field", 2), ("retina", 2), ("astronaut", 1), ("coffee", 1), ("chelsea", 1), ("rocket", 1)]
SIDE = 64


def load(name):
    img = getattr(data, name)()
    pil = Image.fromarray(img)
    short = min(pil.size)
    f = 256 / short
    return np.asarray(pil.resize((round(pil.size[0] * f), round(pil.size[1] * f)), Image.LANCZOS))


def candidates(img):
    h, w = img.shape[:2]
    out = []
    for y in range(0, h - SIDE + 1, SIDE // 2):
        for x in range(0, w - SIDE + 1, SIDE // 2):
            patch = img[y:y + SIDE, x:x + SIDE].astype(float) / 255
            out.append((patch.std(), y, x))
    # textured but not saturated; deterministic order
    out = [c for c in out if 0.06 < c[0] < 0.30]
    out.sort(key=lambda c: (-c[0], c[1], c[2]))
    return out


def pick(img, count, used):
    chosen = []
    for _, y, x in candidates(img):
        if any(abs(y - uy) < SIDE and abs(x - ux) < SIDE for uy, ux in used + chosen):
            continue
        chosen.append((y, x))
        if len(chosen) == count:
            break
    return chosen


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"))
    out = pathlib.Path(ap.parse_args().out)
    used = {}
    (out / "hr_train").mkdir(parents=True, exist_ok=True)
    (out / "hr_heldout").mkdir(parents=True, exist_ok=True)
    for name in TRAIN:
        img = load(name)
        used[name] = pick(img, 4, [])
        for i, (y, x) in enumerate(used[name]):
            Image.fromarray(img[y:y + SIDE, x:x + SIDE]).save(out / "hr_train" / f"{name}_{i}.png")
    for name, count in HELDOUT:
        img = load(name)
        for i, (y, x) in enumerate(pick(img, count, used.get(name, []))):
            Image.fromarray(img[y:y + SIDE, x:x + SIDE]).save(out / "hr_heldout" / f"{name}_h{i}.png")


if __name__ == "__main__":
    main()
