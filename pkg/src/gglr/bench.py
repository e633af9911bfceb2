"""Batch benchmark: degrade every image in a directory, restore, score.

Rows come out sorted by (image, fraction, method) whatever order the work
finishes in. The mask for an (image, fraction) pair is derived from the
run seed, the image id and the fraction, so every method sees the same
mask and reruns reproduce it exactly.
"""

import csv
import dataclasses
import io
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics, netpbm
from .solver import SolveConfig, glr_interpolate, interpolate

METHODS = ("gglr2", "gglr4", "glr")
DEFAULT_FRACTIONS = (0.90, 0.95, 0.98, 0.99)
CSV_HEADER = ("image", "fraction", "method", "psnr_db", "ssim", "runtime_s")
IMAGE_SUFFIXES = (".pgm", ".pnm", ".png")


@dataclass
class BenchRecord:
    image: str
    fraction: float
    method: str
    psnr_db: float
    ssim: float
    runtime_s: float
    config: dict

    def row(self, timing=False):
        return (
            self.image,
            "%g" % self.fraction,
            self.method,
            format_float(self.psnr_db),
            format_float(self.ssim),
            format_float(self.runtime_s) if timing else "",
        )


def format_float(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.6f" % v


def mask_seed(seed, image_id, fraction):
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(image_id.encode()),
                                 int(round(fraction * 1e6))])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_method(method, img, mask, config):
    if method == "glr":
        return glr_interpolate(img, mask, config)
    if method in ("gglr2", "gglr4"):
        return interpolate(img, mask, dataclasses.replace(config, connectivity=int(method[-1])))
    raise ValueError("unknown method %r" % (method,))


def evaluate_one(image_id, img, fraction, method, seed, config):
    M, N = img.shape
    mask = metrics.random_mask(M, N, fraction, mask_seed(seed, image_id, fraction))
    t0 = time.perf_counter()
    rep = run_method(method, metrics.degrade(img, mask), mask, config)
    runtime = time.perf_counter() - t0
    out = np.clip(rep.image, 0.0, 1.0)
    cfg = dataclasses.replace(config, seed=seed).to_dict()
    if method != "glr":
        cfg["connectivity"] = int(method[-1])
    return BenchRecord(image_id, fraction, method, metrics.psnr(img, out), metrics.ssim(img, out), runtime, cfg)


def _job(args):
    path, fraction, method, seed, config = args
    img = netpbm.read_image(path)
    return evaluate_one(Path(path).stem, img, fraction, method, seed, config)


def corpus(directory):
    files = [p for p in Path(directory).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES]
    if not files:
        raise FileNotFoundError("no images found in %s" % directory)
    return sorted(files, key=lambda p: p.name)


def run_bench(directory, fractions=DEFAULT_FRACTIONS, methods=METHODS, seed=0, config=None, workers=1):
    config = config or SolveConfig()
    for m in methods:
        if m not in METHODS:
            raise ValueError("unknown method %r" % (m,))
    jobs = [(str(p), float(f), m, seed, config) for p in corpus(directory) for f in fractions for m in methods]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_job, jobs))
    else:
        records = [_job(j) for j in jobs]
    order = {m: i for i, m in enumerate(METHODS)}
    return sorted(records, key=lambda r: (r.image, r.fraction, order[r.method]))


def records_to_csv(records, timing=False):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row(timing))
    return buf.getvalue()
