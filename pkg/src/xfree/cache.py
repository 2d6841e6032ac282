"""Append-only cache of extremal-value records with witness files.

Line format, one record per line:

    <pattern-hash> <n> <lower> <upper> <exact:0|1> <provenance>

Witnesses live alongside as grid-set text named <hash>_<n>.witness, and
a sidecar <hash>.pattern (pattern file format) is kept so witnesses can
be re-verified later from the cache alone.  Duplicate (pattern, n)
entries collapse to the tightest interval on load.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock

from .copies import GridSet
from .errors import PreconditionError
from .patterns import Pattern, normalize, parse_pattern, pattern_hash
from .solver import PROVENANCES, RNumberRecord, verify_witness

CACHE_ENV = "XFREE_CACHE"
CACHE_FILE = "rvalues.txt"


def cache_dir_from_env(explicit: str | None = None) -> Path | None:
    if explicit:
        return Path(explicit)
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else None


@dataclass
class CacheReport:
    entries: int = 0
    merged_duplicates: int = 0
    corrupt_lines: list[tuple[int, str]] = field(default_factory=list)
    demoted: list[tuple[str, int]] = field(default_factory=list)
    witnesses_verified: int = 0
    witnesses_missing_pattern: int = 0

    @property
    def clean(self) -> bool:
        return not self.corrupt_lines and not self.demoted


class RNumberCache:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / CACHE_FILE
        self._lock = FileLock(str(self.path) + ".lock")

    def _witness_path(self, pid: str, n: int) -> Path:
        return self.directory / f"{pid}_{n}.witness"

    def _pattern_path(self, pid: str) -> Path:
        return self.directory / f"{pid}.pattern"

    def store(self, record: RNumberRecord, pattern: Pattern | None = None):
        """Append a record; refuses witnesses that fail verification."""
        if record.provenance not in PROVENANCES:
            raise PreconditionError(f"unknown provenance {record.provenance!r}")
        if pattern is not None:
            p = normalize(pattern)
            if pattern_hash(p) != record.pattern_id:
                raise PreconditionError("pattern does not match the record's identifier")
            sidecar = self._pattern_path(record.pattern_id)
            if not sidecar.exists():
                body = f"{p.d} {p.k}\n" + "\n".join(
                    " ".join(str(c) for c in pt) for pt in p.points
                )
                sidecar.write_text(body + "\n")
        if record.witness is not None:
            if pattern is None:
                pattern = self._load_pattern(record.pattern_id)
            if pattern is not None and not verify_witness(record.witness, pattern, record.lower):
                raise PreconditionError("witness fails verification; record not cached")
            self._witness_path(record.pattern_id, record.n).write_text(record.witness.to_text())
        line = (
            f"{record.pattern_id} {record.n} {record.lower} {record.upper} "
            f"{int(record.exact)} {record.provenance}\n"
        )
        with self._lock:
            with open(self.path, "a", newline="\n") as fh:
                fh.write(line)

    def _load_pattern(self, pid: str) -> Pattern | None:
        path = self._pattern_path(pid)
        if not path.exists():
            return None
        return normalize(parse_pattern(path.read_text()))

    def _parse_lines(self, report: CacheReport) -> list[RNumberRecord]:
        records = []
        if not self.path.exists():
            return records
        for lineno, raw in enumerate(self.path.read_text().splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if len(parts) != 6:
                    raise ValueError(f"expected 6 fields, got {len(parts)}")
                pid, n, lower, upper = parts[0], int(parts[1]), int(parts[2]), int(parts[3])
                exact = {"0": False, "1": True}[parts[4]]
                provenance = parts[5]
                if provenance not in PROVENANCES:
                    raise ValueError(f"unknown provenance {provenance!r}")
                if not 0 <= lower <= upper:
                    raise ValueError(f"bad bounds [{lower}, {upper}]")
                if exact and lower != upper:
                    raise ValueError("exact record with lower != upper")
            except (ValueError, KeyError) as exc:
                report.corrupt_lines.append((lineno, str(exc)))
                continue
            records.append(RNumberRecord(pid, n, lower, upper, exact, provenance))
        return records

    def load(self, report: CacheReport | None = None) -> dict[tuple[str, int], RNumberRecord]:
        """Merged view: duplicate keys collapse to the tightest bounds."""
        report = report if report is not None else CacheReport()
        merged: dict[tuple[str, int], RNumberRecord] = {}
        for rec in self._parse_lines(report):
            key = (rec.pattern_id, rec.n)
            prev = merged.get(key)
            if prev is None:
                merged[key] = rec
                continue
            report.merged_duplicates += 1
            lower = max(prev.lower, rec.lower)
            upper = min(prev.upper, rec.upper)
            if lower > upper:
                report.corrupt_lines.append(
                    (0, f"conflicting bounds for {key}: [{prev.lower},{prev.upper}] vs "
                        f"[{rec.lower},{rec.upper}]")
                )
                lower, upper = 0, rec.n ** self._guess_dim(rec.pattern_id)
            winner = rec if rec.lower >= prev.lower else prev
            merged[key] = RNumberRecord(rec.pattern_id, rec.n, lower, upper,
                                        lower == upper, winner.provenance)
        for key, rec in merged.items():
            wpath = self._witness_path(*key)
            if wpath.exists():
                try:
                    rec.witness = GridSet.from_text(wpath.read_text())
                except Exception:
                    rec.witness = None
        report.entries = len(merged)
        return merged

    def _guess_dim(self, pid: str) -> int:
        pattern = self._load_pattern(pid)
        return pattern.d if pattern is not None else 1

    def verify(self) -> CacheReport:
        """Re-check every witness; demote records whose witness fails.

        Demotion resets the bounds to the trivial [0, n^d] and drops the
        exact flag, since the failed certificate was their support.
        """
        report = CacheReport()
        merged = self.load(report)
        for (pid, n), rec in merged.items():
            if rec.witness is None:
                continue
            pattern = self._load_pattern(pid)
            if pattern is None:
                report.witnesses_missing_pattern += 1
                continue
            if verify_witness(rec.witness, pattern, rec.lower):
                report.witnesses_verified += 1
            else:
                report.demoted.append((pid, n))
                rec.lower, rec.upper, rec.exact = 0, n**pattern.d, False
                rec.witness = None
        return report


def cache_roundtrip(directory: str | Path) -> CacheReport:
    """Consistency pass over a cache directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise PreconditionError(f"cache directory {directory} does not exist")
    return RNumberCache(directory).verify()
