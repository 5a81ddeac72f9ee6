"""Delimited-matrix ingestion, atom files, and JSON report assembly.

Ingestion reads a rectangular delimited table with a configurable
missing token, computes column means and sample SDs over the observed
cells only (divisor observed-1), applies centering/scaling, and then
imputes missing cells with the post-transform column mean, which is
exactly 0 for centered columns. Reports serialize a SelectionResult
with provenance (input hash, seed, version) under a stable schema with
every key present for every method.
"""

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ParseError, RaggedRows, ZeroVarianceColumn
from .matrix import DataMatrix, VarianceDistribution
from .select import Method

__all__ = [
    "IngestOptions",
    "ingest",
    "write_matrix",
    "read_atoms",
    "build_report",
    "load_report_schema",
    "file_sha256",
]


@dataclass
class IngestOptions:
    delimiter: str = ","
    has_header: bool = False
    missing_token: str = "NA"
    center: bool = True
    scale: bool = False
    impute_missing_as_mean: bool = True
    transpose: bool = False


def ingest(path, opts=None):
    """Read a delimited numeric matrix into a DataMatrix.

    Raises ParseError for unparseable or missing-but-unimputable cells,
    RaggedRows when a row's field count differs from the first row (or
    header), and ZeroVarianceColumn when scaling hits a constant
    column. Row and column indices in errors are 0-based within the
    data block (header excluded).
    """
    opts = opts or IngestOptions()
    with open(path, newline="") as fh:
        raw = [row for row in csv.reader(fh, delimiter=opts.delimiter) if row]
    if opts.has_header:
        if not raw:
            raise ParseError(0, 0, "empty file")
        expected = len(raw[0])
        raw = raw[1:]
    if not raw:
        raise ParseError(0, 0, "no data rows")
    if not opts.has_header:
        expected = len(raw[0])

    data = np.empty((len(raw), expected))
    for ri, row in enumerate(raw):
        if len(row) != expected:
            raise RaggedRows(ri, expected, len(row))
        for ci, tok in enumerate(row):
            tok = tok.strip()
            if tok == opts.missing_token:
                data[ri, ci] = np.nan
            else:
                try:
                    data[ri, ci] = float(tok)
                except ValueError:
                    raise ParseError(ri, ci, repr(tok)) from None
    if opts.transpose:
        data = data.T.copy()

    missing = np.isnan(data)
    observed = (~missing).sum(axis=0)
    if not opts.impute_missing_as_mean and missing.any():
        ri, ci = np.argwhere(missing)[0]
        raise ParseError(int(ri), int(ci), "missing value and imputation disabled")

    # Column moments over observed cells only.
    with np.errstate(invalid="ignore"):
        means = np.where(observed > 0, np.nansum(data, axis=0) / np.maximum(observed, 1), 0.0)
    fill = means.copy()
    if opts.center:
        data = data - means
        fill = np.zeros_like(means)
    if opts.scale:
        if np.any(observed < 2):
            raise ZeroVarianceColumn(int(np.flatnonzero(observed < 2)[0]))
        centered = data if opts.center else data - means
        with np.errstate(invalid="ignore"):
            ss = np.nansum(centered * centered, axis=0)
        sd = np.sqrt(ss / (observed - 1))
        if np.any(sd == 0.0):
            raise ZeroVarianceColumn(int(np.flatnonzero(sd == 0.0)[0]))
        data = data / sd
        fill = fill / sd
    if missing.any():
        rows, cols = np.nonzero(missing)
        data[rows, cols] = fill[cols]
    return DataMatrix(data)


def write_matrix(X, path, delimiter=","):
    """Write a matrix with shortest round-trip number formatting."""
    values = X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=np.float64)
    with open(path, "w") as fh:
        for row in values:
            fh.write(delimiter.join(repr(float(x)) for x in row))
            fh.write("\n")


def read_atoms(path):
    """Read a "weight,atom" two-column file into a VarianceDistribution.

    Blank lines and lines starting with '#' are ignored. Weight
    invariants (positive, summing to 1) are enforced by the
    distribution type.
    """
    weights = []
    atoms = []
    with open(path) as fh:
        for ri, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [t.strip() for t in line.split(",")]
            if len(parts) != 2:
                raise RaggedRows(ri, 2, len(parts))
            try:
                weights.append(float(parts[0]))
            except ValueError:
                raise ParseError(ri, 0, repr(parts[0])) from None
            try:
                atoms.append(float(parts[1]))
            except ValueError:
                raise ParseError(ri, 1, repr(parts[1])) from None
    if not weights:
        raise ParseError(0, 0, "no atoms in file")
    return VarianceDistribution(np.array(weights), np.array(atoms))


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_report(result, singular_values, edge_used, timings, input_sha256, version):
    """Assemble the JSON-ready report dict for one selection run.

    singular_values are those of X/sqrt(n). edge_used is the spectral
    edge a single-threshold method used, or None where the concept does
    not apply. All keys are present for every method.
    """
    method = result.method.value if isinstance(result.method, Method) else str(result.method)
    return {
        "method": method,
        "k": int(result.k),
        "steps": [
            {
                "index": int(s.index),
                "statistic": float(s.statistic),
                "threshold": float(s.threshold),
                "accepted": bool(s.accepted),
            }
            for s in result.steps
        ],
        "singular_values": [float(x) for x in singular_values],
        "edge_used": None if edge_used is None else float(edge_used),
        "timings": {str(k): float(v) for k, v in timings.items()},
        "provenance": {
            "input_sha256": input_sha256,
            "seed": None if result.seed is None else int(result.seed),
            "version": version,
        },
    }


def load_report_schema():
    with resources.files(__package__).joinpath("report_schema.json").open() as fh:
        return json.load(fh)
