"""Internal workflow features: static ones from the graph, dynamic ones from
the execution history log."""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import Counter
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import HistoryError
from .workflow import WorkflowGraph

# (attribute, symbol, low, high, integer-valued)
FEATURE_SPEC = (
    ("p_match", "P_match", 0.0, 1.0, False),
    ("p_integrity", "P_integrity", 0.0, 1.0, False),
    ("t_hat", "T_hat", 30.0, 150.0, False),
    ("t_bar", "T_bar", 30.0, 150.0, False),
    ("v_t", "V_t", 0.0, 3.0, False),
    ("n_o", "N_o", 0.0, 100.0, False),
    ("n_active", "N_active", 0.0, 100.0, True),
    ("n_logic", "N_logic", 0.0, 100.0, True),
    ("n_history", "N_history", 0.0, 200.0, True),
    ("p_hist_cons", "P_hist_cons", 0.0, 1.0, False),
    ("n_stimulate", "N_stimulate", 0.0, 10.0, True),
    ("n_para", "N_para", 0.0, 100.0, True),
    ("n_ex_para", "N_ex_para", 0.0, 20.0, True),
    ("p_f", "P_f", 0.0, 1.0, False),
    ("p_s", "P_s", 0.0, 1.0, False),
    ("n_model", "N_model", 0.0, 100.0, True),
)
FEATURE_NAMES = tuple(s[0] for s in FEATURE_SPEC)
FEATURE_SYMBOLS = tuple(s[1] for s in FEATURE_SPEC)
FEATURE_LOW = np.array([s[2] for s in FEATURE_SPEC])
FEATURE_HIGH = np.array([s[3] for s in FEATURE_SPEC])
N_FEATURES = len(FEATURE_SPEC)


class FeatureRangeWarning(UserWarning):
    """A raw feature fell outside its declared range and was clamped."""


@dataclass(frozen=True)
class FeatureVector:
    p_match: float
    p_integrity: float
    t_hat: float
    t_bar: float
    v_t: float
    n_o: float
    n_active: float
    n_logic: float
    n_history: float
    p_hist_cons: float
    n_stimulate: float
    n_para: float
    n_ex_para: float
    p_f: float
    p_s: float
    n_model: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        values = [float(v) for v in values]
        if len(values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} feature values, got {len(values)}")
        return cls(*values)

    def as_dict(self, symbols=True) -> dict[str, float]:
        keys = FEATURE_SYMBOLS if symbols else FEATURE_NAMES
        return dict(zip(keys, self.as_array().tolist()))

    def normalized(self) -> np.ndarray:
        """Min-max scale every field to [0, 1] using the declared ranges."""
        return (self.as_array() - FEATURE_LOW) / (FEATURE_HIGH - FEATURE_LOW)


def normalize_features(x: np.ndarray) -> np.ndarray:
    """Vectorized :meth:`FeatureVector.normalized` for an (n, 16) array."""
    return (np.asarray(x, dtype=float) - FEATURE_LOW) / (FEATURE_HIGH - FEATURE_LOW)


def clamp_features(fv: FeatureVector) -> tuple[FeatureVector, list[str]]:
    """Clamp each field into its declared range and the cross-field bounds.

    Returns the clamped vector and one note per modified field.
    """
    notes = []
    values = {}
    for name, symbol, lo, hi, _ in FEATURE_SPEC:
        v = getattr(fv, name)
        c = min(max(v, lo), hi)
        if c != v:
            notes.append(f"{symbol}={v:g} outside [{lo:g}, {hi:g}], clamped to {c:g}")
        values[name] = c
    for dep, bound in (("n_ex_para", "n_para"), ("n_model", "n_active"), ("n_o", "n_active")):
        if values[dep] > values[bound]:
            notes.append(f"{dep}={values[dep]:g} exceeds {bound}={values[bound]:g}, clamped")
            values[dep] = values[bound]
    return FeatureVector(**values), notes


# ---------------------------------------------------------------------------
# history log


@dataclass(frozen=True)
class Run:
    duration: float
    overtime_count: float
    success: bool
    fingerprint: str
    failed_nodes: tuple[str, ...] = ()


@dataclass(frozen=True)
class HistoryLog:
    runs: tuple[Run, ...] = ()

    @property
    def n_history(self) -> int:
        return len(self.runs)

    def failure_tallies(self) -> Counter:
        """Per-active-node count of runs in which that node failed."""
        tallies = Counter()
        for r in self.runs:
            tallies.update(set(r.failed_nodes))
        return tallies


_REQUIRED_COLUMNS = ("duration", "overtime_count", "success", "fingerprint")


def _parse_bool(raw: str, lineno: int) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "ok"):
        return True
    if low in ("0", "false", "no", "fail"):
        return False
    raise HistoryError(f"line {lineno}: success flag {raw!r} is not a boolean")


def parse_history(text: str) -> HistoryLog:
    """Read a comma-separated history log.

    Columns ``duration,overtime_count,success,fingerprint`` are required, in
    a header row. An optional ``failed_nodes`` column lists the ids of active
    nodes that failed during the run, separated by ``;``.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise HistoryError("history log is empty (header row required)") from None
    missing = [c for c in _REQUIRED_COLUMNS if c not in header]
    if missing:
        raise HistoryError(f"history header lacks column(s): {', '.join(missing)}")
    col = {name: header.index(name) for name in header}

    runs = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        try:
            duration = float(row[col["duration"]])
            overtime = float(row[col["overtime_count"]])
        except ValueError as exc:
            raise HistoryError(f"line {lineno}: {exc}") from None
        if not math.isfinite(duration) or duration <= 0:
            raise HistoryError(f"line {lineno}: duration must be positive, got {duration:g}")
        if overtime < 0:
            raise HistoryError(f"line {lineno}: overtime_count must be non-negative")
        failed = ()
        if "failed_nodes" in col:
            cell = row[col["failed_nodes"]].strip()
            failed = tuple(s.strip() for s in cell.split(";") if s.strip())
        runs.append(
            Run(duration, overtime, _parse_bool(row[col["success"]], lineno), row[col["fingerprint"]].strip(), failed)
        )
    return HistoryLog(tuple(runs))


def load_history(path) -> HistoryLog:
    path = Path(path)
    try:
        return parse_history(path.read_text(encoding="utf-8"))
    except HistoryError as exc:
        raise HistoryError(f"{path}: {exc}") from None


def format_history(h: HistoryLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_REQUIRED_COLUMNS + ("failed_nodes",))
    for r in h.runs:
        w.writerow([repr(r.duration), repr(r.overtime_count), "true" if r.success else "false", r.fingerprint, ";".join(r.failed_nodes)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# feature computations


def interface_match_degree(g: WorkflowGraph) -> float:
    """Fraction of active-to-active edges whose port type tags agree.

    An edge without an explicit port on either end cannot be checked and
    counts as unmatched. Returns 1 when no such edge exists.
    """
    nodes = g.node_map
    total = matched = 0
    for e in g.edges:
        src, dst = nodes[e.source], nodes[e.target]
        if not (src.is_active and dst.is_active):
            continue
        total += 1
        if e.source_port is None or e.target_port is None:
            continue
        if src.port(e.source_port, "out").type_tag == dst.port(e.target_port, "in").type_tag:
            matched += 1
    return matched / total if total else 1.0


def parameter_integrity(g: WorkflowGraph) -> float:
    """Configured required parameters over all required parameters."""
    required = configured = 0
    for n in g.active_nodes:
        for p in n.params:
            if p.required:
                required += 1
                configured += p.configured
    return configured / required if required else 1.0


def raw_features(g: WorkflowGraph, h: HistoryLog | None = None) -> FeatureVector:
    """Compute the feature vector without any range clamping."""
    h = h or HistoryLog()
    active_ids = {n.id for n in g.active_nodes}
    t_hat = g.estimated_time if g.estimated_time is not None else FEATURE_LOW[2]

    runs = h.runs
    n_hist = len(runs)
    if n_hist:
        durations = np.array([r.duration for r in runs])
        t_bar = float(durations.mean())
        v_t = float(durations.var())
        n_o = float(np.mean([r.overtime_count for r in runs]))
        p_s = sum(r.success for r in runs) / n_hist
        fp_counts = Counter(r.fingerprint for r in runs)
        p_hist_cons = fp_counts.most_common(1)[0][1] / n_hist
        tallies = h.failure_tallies()
        unknown = set(tallies) - active_ids
        if unknown:
            raise HistoryError(f"history names unknown active node(s): {', '.join(sorted(unknown))}")
        p_f = sum(tallies[a] / n_hist for a in active_ids) / len(active_ids) if active_ids else 0.0
    else:
        t_bar, v_t, n_o, p_s, p_hist_cons, p_f = t_hat, 0.0, 0.0, 0.0, 0.0, 0.0

    return FeatureVector(
        p_match=interface_match_degree(g),
        p_integrity=parameter_integrity(g),
        t_hat=float(t_hat),
        t_bar=t_bar,
        v_t=v_t,
        n_o=n_o,
        n_active=float(g.n_active),
        n_logic=float(g.n_logic),
        n_history=float(n_hist),
        p_hist_cons=p_hist_cons,
        n_stimulate=float(g.n_stimulate),
        n_para=float(g.n_para),
        n_ex_para=float(g.n_ex_para),
        p_f=p_f,
        p_s=p_s,
        n_model=float(g.n_model),
    )


def extract_features(g: WorkflowGraph, h: HistoryLog | None = None) -> FeatureVector:
    """Feature vector of ``g`` with history ``h``, clamped to declared ranges.

    Each clamp is surfaced as a :class:`FeatureRangeWarning`; use
    :func:`raw_features` plus :func:`clamp_features` to get the notes
    directly.
    """
    fv, notes = clamp_features(raw_features(g, h))
    for note in notes:
        warnings.warn(note, FeatureRangeWarning, stacklevel=2)
    return fv


assert tuple(f.name for f in fields(FeatureVector)) == FEATURE_NAMES
