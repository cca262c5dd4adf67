"""Dataset file ingestion: LIBSVM sparse lines and headered CSV."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .data import Dataset
from .errors import DatasetParseError, InvalidLabelError
from .families import GlmFamily

__all__ = ["load_dataset", "save_libsvm", "preprocess_rcv1"]


def _normalize_labels(y, family: GlmFamily):
    if family is not GlmFamily.LOGISTIC:
        return y
    vals = set(np.unique(y).tolist())
    if vals <= {-1.0, 1.0}:
        return y
    if vals <= {0.0, 1.0}:
        return np.where(y > 0, 1.0, -1.0)
    raise InvalidLabelError(
        f"logistic labels must be {{0,1}} or {{-1,+1}}; file has {sorted(vals)}"
    )


def _parse_libsvm(path: Path):
    labels = []
    rows, cols, vals = [], [], []
    max_col = -1
    n_lines = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError:
                raise DatasetParseError(
                    f"line {lineno}: bad label {parts[0]!r}", line=lineno)
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DatasetParseError(
                        f"line {lineno}: bad feature token {tok!r}",
                        line=lineno)
                if idx < 1:
                    raise DatasetParseError(
                        f"line {lineno}: feature indices are 1-based, "
                        f"got {idx}", line=lineno)
                rows.append(n_lines)
                cols.append(idx - 1)
                vals.append(val)
                max_col = max(max_col, idx - 1)
            n_lines += 1
    if n_lines == 0:
        raise DatasetParseError("no data lines found", line=0)
    x = sp.coo_array(
        (vals, (rows, cols)), shape=(n_lines, max_col + 1), dtype=float
    ).tocsc()
    return x, np.asarray(labels, dtype=float)


def _parse_csv(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise DatasetParseError("empty file", line=0)
        width = len(header.rstrip("\n").split(","))
        if width < 2:
            raise DatasetParseError(
                "need at least one feature column plus the response", line=1)
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != width:
                raise DatasetParseError(
                    f"line {lineno}: expected {width} columns, got "
                    f"{len(parts)}", line=lineno)
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise DatasetParseError(
                    f"line {lineno}: non-numeric value", line=lineno)
    if not rows:
        raise DatasetParseError("no data rows after the header", line=1)
    arr = np.asarray(rows, dtype=float)
    return arr[:, :-1], arr[:, -1]


def load_dataset(path, format: str, family) -> Dataset:
    """Read a dataset file.

    LIBSVM lines are "label idx:val idx:val ..." with 1-based indices;
    CSV needs a header row with the response in the last column. Logistic
    labels in {0,1} are normalized to {-1,+1}.
    """
    path = Path(path)
    family = GlmFamily.parse(family)
    if format == "libsvm":
        x, y = _parse_libsvm(path)
    elif format == "csv":
        x, y = _parse_csv(path)
    else:
        raise ValueError(f"unknown format {format!r}")
    y = _normalize_labels(y, family)
    return Dataset(x, y, family)


def save_libsvm(data: Dataset, path) -> None:
    """Write in LIBSVM format (1-based indices, zeros omitted)."""
    path = Path(path)
    x = data.x
    sparse = data.is_sparse
    csr = sp.csr_array(x) if sparse else None
    with open(path, "w", encoding="utf-8") as fh:
        for n in range(data.n):
            label = data.y[n]
            if sparse:
                lo, hi = csr.indptr[n], csr.indptr[n + 1]
                pairs = zip(csr.indices[lo:hi], csr.data[lo:hi])
            else:
                row = x[n]
                nz = np.flatnonzero(row)
                pairs = zip(nz, row[nz])
            toks = [f"{label:.17g}"]
            toks += [f"{int(j) + 1}:{v:.17g}" for j, v in sorted(pairs)]
            fh.write(" ".join(toks) + "\n")


def preprocess_rcv1(in_path, out_path, n_features: int = 10_000,
                    n_documents: int = 5_000, seed: int = 0) -> dict:
    """Shrink a large sparse binary dataset to an exact-CV-friendly size.

    Keeps the ``n_features`` most frequently observed features, samples
    ``n_documents`` rows uniformly with a fixed seed, then drops features
    unobserved in the subset. Returns the resulting shape summary.
    """
    data = load_dataset(in_path, "libsvm", GlmFamily.LOGISTIC)
    x = sp.csc_array(data.x) if not data.is_sparse else data.x
    counts = np.diff(x.indptr)
    order = np.argsort(-counts, kind="stable")[: min(n_features, data.d)]
    keep_cols = np.sort(order)
    x = x[:, keep_cols]
    rng = np.random.default_rng(seed)
    n_keep = min(n_documents, data.n)
    keep_rows = np.sort(rng.choice(data.n, size=n_keep, replace=False))
    x = sp.csc_array(sp.csr_array(x)[keep_rows, :])
    observed = np.flatnonzero(np.diff(x.indptr))
    x = x[:, observed]
    out = Dataset(x, data.y[keep_rows], GlmFamily.LOGISTIC)
    save_libsvm(out, out_path)
    return {"n": out.n, "d": out.d,
            "kept_features": int(observed.size),
            "kept_documents": int(n_keep)}
