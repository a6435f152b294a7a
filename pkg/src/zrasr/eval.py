"""Levenshtein alignment and sclite-style error rates.

Corpus WER pools the counts over utterances and divides by the total number
of reference tokens; it is not a mean of per-utterance rates.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import FormatError, ZrasrError

HIT, SUB, INS, DEL = "=", "S", "I", "D"


@dataclass(frozen=True)
class AlignmentReport:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    hits: int = 0
    # (ref token or None, hyp token or None, op) per aligned position
    alignment: tuple[tuple[str | None, str | None, str], ...] = ()
    per_utterance: Mapping[str, AlignmentReport] = field(default_factory=dict)

    @property
    def ref_len(self) -> int:
        return self.substitutions + self.deletions + self.hits

    @property
    def hyp_len(self) -> int:
        return self.substitutions + self.insertions + self.hits

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        """Error rate as a fraction; an empty reference gives 0 or inf."""
        n = self.ref_len
        if n == 0:
            return 0.0 if self.errors == 0 else math.inf
        return self.errors / n

    def summary(self) -> str:
        return (
            f"WER {100 * self.wer:.2f}% "
            f"[S={self.substitutions} D={self.deletions} I={self.insertions} H={self.hits} N={self.ref_len}]"
        )


def _encode(ref: Sequence[str], hyp: Sequence[str]):
    ids: dict[str, int] = {}
    r = np.array([ids.setdefault(t, len(ids)) for t in ref], dtype=np.int64)
    h = np.array([ids.setdefault(t, len(ids)) for t in hyp], dtype=np.int64)
    return r, h


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    r, h = _encode(ref, hyp)
    return int(kernels.edit_distance_matrix(r, h)[-1, -1])


def align(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentReport:
    """Minimum unit-cost alignment; on ties substitution beats insertion beats deletion."""
    ref, hyp = list(ref), list(hyp)
    r, h = _encode(ref, hyp)
    d = kernels.edit_distance_matrix(r, h)
    i, j = len(ref), len(hyp)
    ops = []
    counts = {HIT: 0, SUB: 0, INS: 0, DEL: 0}
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            same = ref[i - 1] == hyp[j - 1]
            if d[i, j] == d[i - 1, j - 1] + (0 if same else 1):
                op = HIT if same else SUB
                ops.append((ref[i - 1], hyp[j - 1], op))
                counts[op] += 1
                i, j = i - 1, j - 1
                continue
        if j > 0 and d[i, j] == d[i, j - 1] + 1:
            ops.append((None, hyp[j - 1], INS))
            counts[INS] += 1
            j -= 1
            continue
        ops.append((ref[i - 1], None, DEL))
        counts[DEL] += 1
        i -= 1
    ops.reverse()
    return AlignmentReport(counts[SUB], counts[DEL], counts[INS], counts[HIT], tuple(ops))


def corpus_wer(refs: Mapping[str, Sequence[str]], hyps: Mapping[str, Sequence[str]]) -> AlignmentReport:
    missing_hyp = sorted(set(refs) - set(hyps))
    missing_ref = sorted(set(hyps) - set(refs))
    if missing_hyp or missing_ref:
        parts = []
        if missing_hyp:
            parts.append(f"no hypothesis for {', '.join(missing_hyp)}")
        if missing_ref:
            parts.append(f"no reference for {', '.join(missing_ref)}")
        raise ZrasrError("utterance id mismatch: " + "; ".join(parts))
    per = {uid: align(refs[uid], hyps[uid]) for uid in sorted(refs)}
    return AlignmentReport(
        substitutions=sum(a.substitutions for a in per.values()),
        deletions=sum(a.deletions for a in per.values()),
        insertions=sum(a.insertions for a in per.values()),
        hits=sum(a.hits for a in per.values()),
        per_utterance=per,
    )


def parse_transcripts(lines: Iterable[str], source: str = "<string>") -> dict[str, list[str]]:
    """Read ``id<TAB>tokens`` lines; a missing token field means an empty utterance."""
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        uid, _, text = line.partition("\t")
        uid = uid.strip()
        if not uid:
            raise FormatError("empty utterance id", source, lineno)
        if uid in out:
            raise FormatError(f"duplicate utterance id {uid!r}", source, lineno)
        out[uid] = text.split()
    return out


def read_transcripts(path: str | os.PathLike) -> dict[str, list[str]]:
    with open(path, encoding="utf-8") as fh:
        return parse_transcripts(fh, source=str(path))


def transcripts_from_hypotheses(lines: Iterable[str], source: str = "<string>") -> dict[str, list[str]]:
    """Rank-1 words from decoder output (id, rank, score, words)."""
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise FormatError("expected id, rank, score, words", source, lineno)
        if parts[1] == "1":
            out[parts[0]] = parts[3].split()
    return out


def format_report(rep: AlignmentReport, per_utterance: bool = False) -> str:
    lines = []
    if per_utterance:
        lines.append("id\tS\tD\tI\tH\tN\tWER")
        for uid, a in rep.per_utterance.items():
            lines.append(
                f"{uid}\t{a.substitutions}\t{a.deletions}\t{a.insertions}\t{a.hits}\t{a.ref_len}\t{100 * a.wer:.2f}"
            )
    lines.append(rep.summary())
    return "\n".join(lines) + "\n"
