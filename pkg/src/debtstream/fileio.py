"""CSV/JSON input-output, atomic writes, and run manifests.

File formats (UTF-8, comma-separated, ``.`` decimal point):

* edge CSV: header ``borrower,lender,amount``
* firm CSV: header ``firm,bank_borrowing,total_interfirm_credit,sector,surveyed``
  with empty cells for unknowns
* result CSV: header ``firm,ds,bank_share,component_id``

Floats are written with ``repr`` (shortest round-trip form), so identical
runs produce byte-identical files. Every JSON report embeds its run
manifest; the deterministic part of the manifest (command, input digests,
seed, tool version) is embedded, while the timestamp and wall time live
only in the stand-alone ``manifest.json``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ParseError
from .network import CreditNetwork, build_network, components
from .streamness import StreamnessResult, bank_share

EDGE_HEADER = ("borrower", "lender", "amount")
FIRM_HEADER = ("firm", "bank_borrowing", "total_interfirm_credit", "sector", "surveyed")
RESULT_HEADER = ("firm", "ds", "bank_share", "component_id")

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one CLI run."""

    command: str
    input_hashes: dict[str, str]
    seed: int | None
    tool_version: str
    timestamp: str
    wall_seconds: float | None = None

    def embedded(self) -> dict:
        """Deterministic manifest fields, safe to embed in report files."""
        return {
            "command": self.command,
            "input_hashes": dict(self.input_hashes),
            "seed": self.seed,
            "tool_version": self.tool_version,
        }

    def full(self) -> dict:
        out = self.embedded()
        out["timestamp"] = self.timestamp
        if self.wall_seconds is not None:
            out["wall_seconds"] = self.wall_seconds
        return out


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_manifest(
    command: str,
    inputs: Iterable[Path] = (),
    seed: int | None = None,
    wall_seconds: float | None = None,
) -> RunManifest:
    from . import __version__

    return RunManifest(
        command=command,
        input_hashes={str(p): file_digest(p) for p in inputs},
        seed=seed,
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
        wall_seconds=wall_seconds,
    )


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _rows_to_csv(header: Iterable[str], rows: Iterable[Iterable[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# readers


def _open_rows(path: Path, expected_header: tuple[str, ...]):
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as err:
        raise ParseError(path, 0, f"cannot open file: {err}") from err
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file; expected a header row") from None
        if [h.strip().lower() for h in header] != list(expected_header):
            raise ParseError(
                path, 1, f"expected header {','.join(expected_header)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_header):
                raise ParseError(path, lineno, f"expected {len(expected_header)} columns, got {len(row)}")
            yield lineno, [cell.strip() for cell in row]


def _parse_amount(path: Path, lineno: int, field: str, text: str, *, required: bool) -> float | None:
    if not text:
        if required:
            raise ParseError(path, lineno, f"missing {field}")
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(path, lineno, f"{field} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(path, lineno, f"{field} must be finite, got {text!r}")
    if value < 0:
        raise ParseError(path, lineno, f"{field} must be non-negative, got {text!r}")
    return value


def read_edge_csv(path: Path) -> list[tuple[str, str, float]]:
    edges = []
    for lineno, (borrower, lender, amount) in _open_rows(Path(path), EDGE_HEADER):
        if not borrower or not lender:
            raise ParseError(path, lineno, "borrower and lender must be non-empty")
        edges.append((borrower, lender, _parse_amount(path, lineno, "amount", amount, required=True)))
    return edges


def read_firm_csv(path: Path):
    """Read the firm attribute table.

    Returns (firms, bank, totals, sectors, surveyed) where the maps only
    contain explicitly filled cells.
    """
    firms: list[str] = []
    seen: set[str] = set()
    bank: dict[str, float] = {}
    totals: dict[str, float] = {}
    sectors: dict[str, str] = {}
    surveyed: dict[str, bool] = {}
    for lineno, (firm, bank_cell, total_cell, sector, surveyed_cell) in _open_rows(Path(path), FIRM_HEADER):
        if not firm:
            raise ParseError(path, lineno, "firm id must be non-empty")
        if firm in seen:
            raise ParseError(path, lineno, f"duplicate firm {firm!r}")
        seen.add(firm)
        firms.append(firm)
        amount = _parse_amount(path, lineno, "bank_borrowing", bank_cell, required=False)
        if amount is not None:
            bank[firm] = amount
        total = _parse_amount(path, lineno, "total_interfirm_credit", total_cell, required=False)
        if total is not None:
            totals[firm] = total
        if sector:
            sectors[firm] = sector
        if surveyed_cell:
            lowered = surveyed_cell.lower()
            if lowered in _TRUE:
                surveyed[firm] = True
            elif lowered in _FALSE:
                surveyed[firm] = False
            else:
                raise ParseError(path, lineno, f"surveyed flag {surveyed_cell!r} is not a boolean")
    return firms, bank, totals, sectors, surveyed


def load_network(edge_path: Path, firm_path: Path | None = None) -> CreditNetwork:
    """Build a validated network from an edge CSV plus optional firm CSV."""
    edges = read_edge_csv(edge_path)
    firms: list[str] = []
    bank: dict[str, float] = {}
    totals: dict[str, float] = {}
    sectors: dict[str, str] = {}
    surveyed: dict[str, bool] = {}
    if firm_path is not None:
        firms, bank, totals, sectors, surveyed = read_firm_csv(firm_path)
    return build_network(
        edges,
        bank=bank,
        totals=totals or None,
        sectors=sectors or None,
        surveyed=surveyed or None,
        firms=firms,
    )


def read_result_csv(path: Path) -> dict[str, float]:
    """Read ``firm -> ds`` pairs back from a result CSV."""
    out: dict[str, float] = {}
    for lineno, (firm, ds, _share, _comp) in _open_rows(Path(path), RESULT_HEADER):
        try:
            out[firm] = float(ds)
        except ValueError:
            raise ParseError(path, lineno, f"ds {ds!r} is not a number") from None
    return out


# ---------------------------------------------------------------------------
# writers


def edge_csv_text(net: CreditNetwork) -> str:
    coo = net.loans.tocoo()
    order = np.lexsort((coo.col, coo.row))
    rows = (
        (net.firms[coo.row[k]], net.firms[coo.col[k]], _fmt(coo.data[k]))
        for k in order
    )
    return _rows_to_csv(EDGE_HEADER, rows)


def firm_csv_text(net: CreditNetwork) -> str:
    sectors = net.sectors or {}
    surveyed = net.surveyed or {}
    rows = []
    for i, firm in enumerate(net.firms):
        total = ""
        if net.totals is not None and not math.isnan(net.totals[i]):
            total = _fmt(net.totals[i])
        flag = surveyed.get(firm)
        rows.append(
            (
                firm,
                _fmt(net.bank[i]),
                total,
                sectors.get(firm, ""),
                "" if flag is None else ("true" if flag else "false"),
            )
        )
    return _rows_to_csv(FIRM_HEADER, rows)


def result_csv_text(net: CreditNetwork, result: StreamnessResult) -> str:
    """Result rows for a pruned, scored network."""
    shares = bank_share(net)
    comp_of = np.empty(net.n, dtype=np.int64)
    for k, comp in enumerate(components(net)):
        comp_of[list(comp.members)] = k
    rows = (
        (firm, _fmt(result.values[i]), _fmt(shares[i]), str(int(comp_of[i])))
        for i, firm in enumerate(net.firms)
    )
    return _rows_to_csv(RESULT_HEADER, rows)


def components_payload(net: CreditNetwork) -> list[dict]:
    payload = []
    for k, comp in enumerate(components(net)):
        payload.append(
            {
                "id": k,
                "size": comp.size,
                "contains_bank_link": comp.contains_bank_link,
                "members": [net.firms[i] for i in comp.members],
            }
        )
    return payload


def write_network(out_dir: Path, net: CreditNetwork) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    edge_path = out_dir / "edges.csv"
    firm_path = out_dir / "firms.csv"
    atomic_write_text(edge_path, edge_csv_text(net))
    atomic_write_text(firm_path, firm_csv_text(net))
    return edge_path, firm_path
