"""Image loading, model/orientation persistence and CSV output.

Model file layout (all integers and floats little-endian)::

    magic       8 bytes   b"IGOPCAMF"
    version     uint32    FORMAT_VERSION
    meta_len    uint32    length of the metadata block in bytes
    metadata    meta_len  UTF-8 JSON object
    payload     float64[] see below

IGO payload: the k eigenvalues, then ``B_k`` column-major with every complex
entry stored as a (real, imaginary) pair, so ``8 * (k + 2*p*k)`` bytes; a
centred model appends its complex mean (2*p values).  l2 payload: the k
eigenvalues, the mean (p values), then ``B_k`` column-major (p*k values).
"""

import csv
import io as _io
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .baseline import L2Model
from .errors import (
    BadMagicError,
    NonFiniteError,
    PayloadLengthError,
    TruncatedFileError,
    UnsupportedFormatError,
    VersionMismatchError,
    ZeroDimensionError,
)
from .igo import IgoModel
from .linalg import PrincipalSubspace
from .orientation import GradientFilterSpec, OrientationImage

MODEL_MAGIC = b"IGOPCAMF"
ORIENTATION_MAGIC = b"IGOORIEN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sII")
_LE_F64 = np.dtype("<f8")
CSV_VERSION = 1


def atomic_write_bytes(path, data):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


# images


def _pgm_tokens(data, path, count):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    i = 2
    n = len(data)
    while len(tokens) < count:
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
            raise TruncatedFileError(path, "header ends early")
        tokens.append(data[start:i])
    return tokens, i


def _read_pgm(data, path):
    kind = data[:2]
    (w, h, maxval), pos = _pgm_tokens(data, path, 3)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise UnsupportedFormatError(path, "malformed PGM header") from None
    if w <= 0 or h <= 0:
        raise ZeroDimensionError(path, f"image has zero dimension ({w}x{h})")
    if not 0 < maxval < 65536:
        raise UnsupportedFormatError(path, f"PGM maxval {maxval} out of range")
    count = w * h
    if kind == b"P5":
        body = data[pos + 1 :]  # exactly one whitespace byte after maxval
        dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
        need = count * dtype.itemsize
        if len(body) < need:
            raise TruncatedFileError(path, f"expected {need} pixel bytes, found {len(body)}")
        values = np.frombuffer(body[:need], dtype=dtype).astype(np.float64)
    else:
        parts = data[pos:].split()
        if len(parts) < count:
            raise TruncatedFileError(path, f"expected {count} samples, found {len(parts)}")
        try:
            values = np.array([int(t) for t in parts[:count]], dtype=np.float64)
        except ValueError:
            raise UnsupportedFormatError(path, "non-integer sample in ASCII PGM") from None
    if np.any(values > maxval):
        raise UnsupportedFormatError(path, "sample exceeds maxval")
    return values.reshape(h, w) / maxval


def _read_png(path):
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except OSError as exc:
        raise TruncatedFileError(path, f"cannot decode PNG ({exc})") from None
    if mode == "L":
        scale = 255.0
    elif mode in ("I;16", "I;16B", "I"):
        scale = 65535.0
    else:
        raise UnsupportedFormatError(path, f"PNG mode {mode!r} is not grayscale")
    if arr.ndim != 2 or 0 in arr.shape:
        raise ZeroDimensionError(path, f"image has zero dimension {arr.shape}")
    return arr.astype(np.float64) / scale


def load_image(path):
    """Load a grayscale PGM (P2/P5, 8 or 16 bit) or PNG with intensities in [0, 1]."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        return _read_pgm(data, path)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    if len(data) < 2:
        raise TruncatedFileError(path, "file is empty")
    raise UnsupportedFormatError(path, "not a grayscale PGM or PNG file")


def save_pgm(path, img, maxval=65535, ascii=False):
    """Write intensities in [0, 1] as a P5 (or P2) PGM, quantised to ``maxval``."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.int64)
    if ascii:
        rows = "\n".join(" ".join(str(v) for v in row) for row in q)
        atomic_write_bytes(path, f"P2\n{w} {h}\n{maxval}\n{rows}\n".encode("ascii"))
        return
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    atomic_write_bytes(path, f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + q.astype(dtype).tobytes())


# binary containers


def _pack(magic, meta, payload):
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    return _HEADER.pack(magic, FORMAT_VERSION, len(meta_bytes)) + meta_bytes + payload


def _unpack(path, magic):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        if not magic.startswith(data[:8]):
            raise BadMagicError(path, "not a model file")
        raise TruncatedFileError(path, "header is truncated")
    got_magic, version, meta_len = _HEADER.unpack_from(data)
    if got_magic != magic:
        raise BadMagicError(path, f"bad magic {got_magic!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(path, f"format version {version}, expected {FORMAT_VERSION}")
    end = _HEADER.size + meta_len
    if len(data) < end:
        raise TruncatedFileError(path, "metadata block is truncated")
    try:
        meta = json.loads(data[_HEADER.size : end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UnsupportedFormatError(path, f"unreadable metadata ({exc})") from None
    return meta, data[end:]


def _floats(arr):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        arr = np.ascontiguousarray(arr, dtype=np.complex128).view(np.float64)
    return np.ascontiguousarray(arr, dtype=_LE_F64).tobytes()


def _check_finite(path, *arrays):
    for a in arrays:
        if a is not None and not np.all(np.isfinite(a)):
            raise NonFiniteError(path, "model contains NaN or Inf")


def save_model(model, path):
    """Persist an :class:`IgoModel` or :class:`L2Model` atomically."""
    if isinstance(model, IgoModel):
        sub = model.subspace
        _check_finite(path, sub.basis, sub.eigenvalues, model.mean)
        basis_cm = np.asfortranarray(sub.basis.astype(np.complex128)).ravel(order="F")
        payload = _floats(sub.eigenvalues) + _floats(basis_cm)
        if model.mean is not None:
            payload += _floats(model.mean.astype(np.complex128))
        meta = {
            "model": "igo",
            "height": model.height,
            "width": model.width,
            "k": sub.k,
            "rank": sub.rank,
            "centered": model.mean is not None,
            "filter": model.filter.to_dict(),
            "spectrum": [float(v) for v in sub.spectrum],
            "payload_bytes": len(payload),
        }
    elif isinstance(model, L2Model):
        _check_finite(path, model.mean, model.basis, model.eigenvalues)
        payload = (
            _floats(model.eigenvalues)
            + _floats(model.mean)
            + _floats(model.basis.ravel(order="F"))
        )
        meta = {
            "model": "l2",
            "height": model.height,
            "width": model.width,
            "k": model.k,
            "spectrum": None if model.spectrum is None else [float(v) for v in model.spectrum],
            "payload_bytes": len(payload),
        }
    else:
        raise TypeError(f"cannot save {type(model).__name__}")
    atomic_write_bytes(path, _pack(MODEL_MAGIC, meta, payload))


def load_model(path):
    meta, payload = _unpack(path, MODEL_MAGIC)
    try:
        kind = meta["model"]
        h, w, k = int(meta["height"]), int(meta["width"]), int(meta["k"])
    except (KeyError, TypeError, ValueError):
        raise UnsupportedFormatError(path, "metadata lacks model/height/width/k") from None
    p = h * w
    if kind == "igo":
        expected = 8 * (k + 2 * p * k) + (16 * p if meta.get("centered") else 0)
    elif kind == "l2":
        expected = 8 * (k + p + p * k)
    else:
        raise UnsupportedFormatError(path, f"unknown model kind {kind!r}")
    if len(payload) != expected:
        raise PayloadLengthError(path, f"payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=_LE_F64).astype(np.float64)
    _check_finite(path, values)
    eigenvalues = values[:k].copy()
    if kind == "igo":
        basis = values[k : k + 2 * p * k].view(np.complex128).reshape((p, k), order="F").copy()
        mean = None
        if meta.get("centered"):
            mean = values[k + 2 * p * k :].view(np.complex128).copy()
        sub = PrincipalSubspace(basis, eigenvalues, np.array(meta["spectrum"], dtype=np.float64), int(meta["rank"]))
        return IgoModel(sub, GradientFilterSpec.from_dict(meta["filter"]), h, w, mean)
    mean = values[k : k + p].copy()
    basis = values[k + p :].reshape((p, k), order="F").copy()
    spectrum = meta.get("spectrum")
    return L2Model(mean, basis, eigenvalues, h, w, None if spectrum is None else np.array(spectrum, dtype=np.float64))


def save_orientation(phi, path):
    """Angles as float64 (row-major) followed by the packed validity mask."""
    payload = _floats(phi.angles.ravel()) + np.packbits(phi.valid_mask.ravel()).tobytes()
    meta = {"height": phi.height, "width": phi.width, "payload_bytes": len(payload)}
    atomic_write_bytes(path, _pack(ORIENTATION_MAGIC, meta, payload))


def load_orientation(path):
    meta, payload = _unpack(path, ORIENTATION_MAGIC)
    h, w = int(meta["height"]), int(meta["width"])
    p = h * w
    expected = 8 * p + (p + 7) // 8
    if len(payload) != expected:
        raise PayloadLengthError(path, f"payload has {len(payload)} bytes, expected {expected}")
    angles = np.frombuffer(payload[: 8 * p], dtype=_LE_F64).astype(np.float64).reshape(h, w)
    _check_finite(path, angles)
    mask = np.unpackbits(np.frombuffer(payload[8 * p :], dtype=np.uint8))[:p].astype(bool).reshape(h, w)
    return OrientationImage(angles, mask)


# CSV


def format_csv(schema, header, rows):
    """CSV text: a versioned comment line, a header row, then ``rows``."""
    buf = _io.StringIO()
    buf.write(f"# igopca {schema} v{CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, schema, header, rows):
    atomic_write_text(path, format_csv(schema, header, rows))


def read_csv(path):
    """Return ``(header, rows)``; comment lines are skipped."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, list(reader)
