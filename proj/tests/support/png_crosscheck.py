"""Cross-check the CLI's PNG reading and writing against Pillow.

usage: png_crosscheck.py <srqa_cli> <scratch dir>
"""
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
from PIL import Image


def run(cli, *args):
    subprocess.run([cli, *map(str, args)], check=True, stdout=subprocess.DEVNULL)


def main():
    cli, scratch = sys.argv[1], Path(sys.argv[2])
    scratch.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    failures = []

    # Pillow-written pixels survive a same-size nearest resample byte for byte
    for mode, shape in [("L", (13, 21)), ("RGB", (9, 30, 3)), ("RGB", (64, 64, 3))]:
        pixels = rng.integers(0, 256, size=shape, dtype=np.uint8)
        src = scratch / f"pil_{mode}_{shape[1]}x{shape[0]}.png"
        Image.fromarray(pixels, mode).save(src)
        dst = src.with_suffix(".out.png")
        run(cli, "resize", src, "--width", shape[1], "--height", shape[0], "--kernel", "nearest", "--out", dst)
        back = Image.open(dst)
        if back.mode != mode or not np.array_equal(np.asarray(back), pixels):
            failures.append(f"round trip changed {src.name}")

    # CLI-written images decode in Pillow, and Pillow's re-encoding reads back identically
    for kind, mode in [("noise", "L"), ("cells", "RGB"), ("checkerboard", "L")]:
        ours = scratch / f"synth_{kind}.png"
        run(cli, "synth", "--kind", kind, "--width", 40, "--height", 24, "--seed", 3, "--out", ours)
        img = Image.open(ours)
        if img.size != (40, 24) or img.mode != mode:
            failures.append(f"{kind}: Pillow sees {img.size} {img.mode}")
            continue
        theirs = scratch / f"synth_{kind}.pil.png"
        img.save(theirs, optimize=True)
        report = scratch / f"synth_{kind}.json"
        run(cli, "metrics", ours, theirs, "--out", report)
        if json.loads(report.read_text())["psnr"] != "inf":
            failures.append(f"{kind}: re-encoded file decodes differently")

    for f in failures:
        print("FAIL:", f)
    print("png cross-check:", "ok" if not failures else f"{len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
