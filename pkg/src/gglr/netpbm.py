"""Minimal PGM/PBM reading and writing.

Grey images are written as binary PGM (P5, maxval 255) and read from P2 or
P5 with any maxval up to 65535. Masks are binary PBM (P4) where a set bit
marks a missing pixel; P1 is accepted on read.
"""

import numpy as np


class NetpbmError(ValueError):
    pass


def _tokens(data, count, offset):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    i = offset
    n = len(data)
    while len(out) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
            i += 1
        if start == i:
            raise NetpbmError("truncated header")
        out.append(data[start:i])
    return out, i


def _parse(data):
    if len(data) < 2 or data[:1] != b"P":
        raise NetpbmError("not a netpbm file")
    magic = data[:2].decode("ascii", "replace")
    if magic in ("P1", "P4"):
        (w, h), pos = _tokens(data, 2, 2)
        maxval = 1
    elif magic in ("P2", "P5"):
        (w, h, mv), pos = _tokens(data, 3, 2)
        maxval = int(mv)
    else:
        raise NetpbmError("unsupported netpbm type %s" % magic)
    try:
        width, height = int(w), int(h)
    except ValueError:
        raise NetpbmError("bad image dimensions") from None
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise NetpbmError("bad header values")
    return magic, width, height, maxval, pos


def read_pgm(path):
    """Grey image scaled to [0, 1], shape (rows, cols)."""
    with open(path, "rb") as f:
        data = f.read()
    magic, width, height, maxval, pos = _parse(data)
    n = width * height
    if magic == "P5":
        body = data[pos + 1 :]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = n * dtype.itemsize
        if len(body) < need:
            raise NetpbmError("pixel data truncated")
        px = np.frombuffer(body[:need], dtype=dtype)
    elif magic == "P2":
        vals, _ = _tokens(data, n, pos)
        px = np.array([int(v) for v in vals])
    else:
        raise NetpbmError("%s is not a greyscale image" % magic)
    if np.any(px > maxval):
        raise NetpbmError("sample exceeds maxval")
    return px.reshape(height, width).astype(float) / maxval


def to_bytes(img):
    return np.rint(np.clip(np.asarray(img, dtype=float), 0.0, 1.0) * 255.0).astype(np.uint8)


def write_pgm(path, img):
    px = to_bytes(img)
    h, w = px.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(px.tobytes())


def read_pbm(path):
    """Mask with True for known pixels (bit 1 in the file means missing)."""
    with open(path, "rb") as f:
        data = f.read()
    magic, width, height, _, pos = _parse(data)
    if magic == "P4":
        stride = (width + 7) // 8
        body = data[pos + 1 :]
        if len(body) < stride * height:
            raise NetpbmError("bitmap data truncated")
        packed = np.frombuffer(body[: stride * height], dtype=np.uint8).reshape(height, stride)
        bits = np.unpackbits(packed, axis=1)[:, :width]
    elif magic == "P1":
        # P1 digits need not be separated
        body = data[pos:]
        digits = [int(c) for c in body.decode("ascii", "replace") if c in "01"]
        if len(digits) < width * height:
            raise NetpbmError("bitmap data truncated")
        bits = np.array(digits[: width * height], dtype=np.uint8).reshape(height, width)
    else:
        raise NetpbmError("%s is not a bitmap" % magic)
    return bits == 0


def write_pbm(path, known):
    missing = ~np.asarray(known, dtype=bool)
    h, w = missing.shape
    packed = np.packbits(missing.astype(np.uint8), axis=1)
    with open(path, "wb") as f:
        f.write(b"P4\n%d %d\n" % (w, h))
        f.write(packed.tobytes())


def read_image(path):
    """PGM via the reader above; other formats through Pillow when installed."""
    path = str(path)
    if path.lower().endswith((".pgm", ".pnm")):
        return read_pgm(path)
    try:
        from PIL import Image
    except ImportError:
        raise NetpbmError("reading %s needs Pillow" % path) from None
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=float) / 255.0
