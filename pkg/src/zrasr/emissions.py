"""Emission matrices: the acoustic model's per-frame label log-probabilities.

ZEM text format::

    zem 1 T V
    <b> | a k ...            (V labels, blank written as <b>)
    T lines of V floats      (natural log, %.8e)

:func:`synthesize_emissions` builds matrices for a known phoneme sequence so
the decoder can be tested end to end without a trained model.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .errors import FormatError, ZrasrError
from .phonology import BLANK, WORD_SEP, Phoneme, PhonemeInventory

ROW_TOLERANCE = 1e-5


@dataclass(frozen=True, eq=False)
class EmissionMatrix:
    log_probs: np.ndarray
    inventory: PhonemeInventory

    def __post_init__(self):
        lp = np.asarray(self.log_probs, dtype=np.float64)
        if lp.ndim != 2:
            raise ZrasrError("emission matrix must be 2-D")
        t, v = lp.shape
        if t < 1 or v < 2:
            raise ZrasrError(f"emission matrix must be at least 1x2, got {t}x{v}")
        if v != len(self.inventory):
            raise ZrasrError(f"{v} columns but {len(self.inventory)} labels")
        lp.setflags(write=False)
        object.__setattr__(self, "log_probs", lp)

    @property
    def num_frames(self) -> int:
        return self.log_probs.shape[0]

    @property
    def labels(self) -> tuple[str, ...]:
        return self.inventory.labels

    def check_rows(self, tol: float = ROW_TOLERANCE) -> None:
        sums = kernels.row_logsumexp(self.log_probs)
        bad = np.flatnonzero(~(np.abs(sums) <= tol))
        if bad.size:
            f = int(bad[0])
            raise ZrasrError(f"frame {f} is not normalized (log-sum-exp {sums[f]:.6g})")


def format_zem(e: EmissionMatrix) -> str:
    t, v = e.log_probs.shape
    out = [f"zem 1 {t} {v}", " ".join(e.labels)]
    for row in e.log_probs:
        out.append(" ".join(f"{x:.8e}" for x in row))
    return "\n".join(out) + "\n"


def write_emissions(e: EmissionMatrix, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_zem(e))


def parse_zem(text: str, source: str = "<string>", tol: float = ROW_TOLERANCE) -> EmissionMatrix:
    lines = text.splitlines()
    if len(lines) < 2:
        raise FormatError("truncated ZEM file", source)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "zem" or head[1] != "1":
        raise FormatError(f"bad header {lines[0]!r}, expected 'zem 1 T V'", source, 1)
    try:
        t, v = int(head[2]), int(head[3])
    except ValueError:
        raise FormatError(f"bad header {lines[0]!r}", source, 1) from None
    labels = lines[1].split()
    if len(labels) != v:
        raise FormatError(f"header says {v} labels, found {len(labels)}", source, 2)
    try:
        inv = PhonemeInventory(tuple(labels))
    except ZrasrError as exc:
        raise FormatError(f"bad label list: {exc}", source, 2) from None
    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != t:
        raise FormatError(f"header says {t} frames, found {len(rows)}", source)
    mat = np.empty((t, v))
    for f, ln in enumerate(rows):
        vals = ln.split()
        if len(vals) != v:
            raise FormatError(f"frame {f}: expected {v} values, got {len(vals)}", source, f + 3)
        try:
            mat[f] = [float(x) for x in vals]
        except ValueError:
            raise FormatError(f"frame {f}: non-numeric value", source, f + 3) from None
    sums = kernels.row_logsumexp(mat)
    bad = np.flatnonzero(~(np.abs(sums) <= tol))
    if bad.size:
        f = int(bad[0])
        raise FormatError(f"frame {f} is not normalized (log-sum-exp {sums[f]:.6g})", source, f + 3)
    return EmissionMatrix(mat, inv)


def read_emissions(path: str | os.PathLike) -> EmissionMatrix:
    return parse_zem(Path(path).read_text(encoding="utf-8"), source=str(path))


def synthesize_emissions(
    seq: Sequence[Phoneme | str],
    inv: PhonemeInventory,
    frames_per_phone: int = 3,
    noise: float = 0.0,
    seed: int | Sequence[int] = 0,
    swap: bool = True,
) -> EmissionMatrix:
    """Frames for each label of ``seq``, each run followed by one blank frame.

    Every frame puts ``1 - noise`` on its label and spreads ``noise`` evenly
    over the others.  With ``swap`` on, each phoneme (not the separator) is
    replaced by a random other phoneme with probability ``noise``; the draws
    come from ``seed`` only.
    """
    if frames_per_phone < 1:
        raise ZrasrError("frames_per_phone must be >= 1")
    if not 0.0 <= noise < 1.0:
        raise ZrasrError("noise must be in [0, 1)")
    ids = []
    for p in seq:
        if str(p) not in inv:
            raise ZrasrError(f"phoneme {str(p)!r} is not in the inventory")
        ids.append(inv.index(p))
    v = len(inv)
    blank = inv.blank
    phone_ids = [i for i, lab in enumerate(inv.labels) if lab not in (BLANK, WORD_SEP)]
    rng = np.random.default_rng(seed)
    if swap and noise > 0:
        for k, lab in enumerate(ids):
            u = rng.random()
            if lab in phone_ids and len(phone_ids) > 1 and u < noise:
                others = [x for x in phone_ids if x != lab]
                ids[k] = others[int(rng.integers(len(others)))]

    t = len(ids) * (frames_per_phone + 1)
    with np.errstate(divide="ignore"):
        hi = np.log1p(-noise)
        lo = np.log(noise / (v - 1)) if noise > 0 else -np.inf
    mat = np.full((max(t, 1), v), lo)
    f = 0
    for lab in ids:
        mat[f : f + frames_per_phone, lab] = hi
        f += frames_per_phone
        mat[f, blank] = hi
        f += 1
    if t == 0:
        mat[0, blank] = hi
    return EmissionMatrix(mat, inv)
