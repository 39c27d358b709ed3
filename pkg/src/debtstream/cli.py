"""Command-line interface: reproducible pipelines over CSV inputs.

Every command reads the documented CSV formats, writes its reports plus a
``manifest.json`` carrying input digests, the seed (when one applies), the
tool version and a timestamp. All randomness flows through explicit
``--seed`` options, so seeded runs are exactly repeatable.

Exit codes: 0 success, 2 parse error (diagnostic names the file and line),
3 validation/computation error, 4 missing seed for the sparse
reconstruction.
"""

from __future__ import annotations

import csv
import functools
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .aggregation import BIN_LABELS, CLASS_LABELS, aggregate_by_sector, classification_crosstab
from .analysis import detect_loops, edge_removal_report, remove_edge
from .errors import DebtstreamError, ParseError
from .fileio import (
    atomic_write_text,
    components_payload,
    edge_csv_text,
    make_manifest,
    read_edge_csv,
    read_result_csv,
    load_network,
    result_csv_text,
    write_json,
    write_network,
    _rows_to_csv,
)
from .network import CreditNetwork, prune_undefined
from .reconstruction import (
    compare_reconstructions,
    reconstruct_full,
    reconstruct_sparse,
    residual,
    truncate_top_creditors,
)
from .stats import fit_lognormal, kendall, pearson, spearman
from .streamness import solve_streamness
from .synth import SynthConfig, generate

_IN = click.Path(exists=True, dir_okay=False, path_type=Path)
_OUT = click.Path(file_okay=False, path_type=Path)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as err:
            click.echo(f"parse error: {err}", err=True)
            sys.exit(2)
        except DebtstreamError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(3)

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="debtstream")
def main():
    """Position firms in inter-firm credit networks by distance from banks."""


def _write_manifest(out: Path, command: str, inputs, seed=None, wall=None):
    manifest = make_manifest(command, inputs, seed=seed, wall_seconds=wall)
    write_json(Path(out) / "manifest.json", manifest.full())
    return manifest


@main.command()
@click.argument("edges", type=_IN)
@click.argument("firms", type=_IN)
@click.argument("out", type=_OUT)
@_guarded
def compute(edges: Path, firms: Path, out: Path):
    """Score every firm; writes ds.csv, components.json, excluded.csv."""
    started = time.perf_counter()
    net = load_network(edges, firms)
    pruned, removed = prune_undefined(net)
    result = solve_streamness(pruned, excluded=tuple(removed))
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "ds.csv", result_csv_text(pruned, result))
    atomic_write_text(out / "excluded.csv", _rows_to_csv(("firm",), ((f,) for f in removed)))
    manifest = _write_manifest(
        out, f"compute {edges} {firms} {out}", [edges, firms],
        wall=time.perf_counter() - started,
    )
    write_json(
        out / "components.json",
        {
            "manifest": manifest.embedded(),
            "solver_residual": result.solver_residual,
            "mean_ds": result.mean,
            "component_means": {str(k): v for k, v in result.component_means.items()},
            "components": components_payload(pruned),
        },
    )
    click.echo(f"scored {len(result)} firms ({len(removed)} excluded) -> {out}")


def _read_two_column(path: Path, header: tuple[str, str]) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        first = next(reader, None)
        if first is None or [h.strip().lower() for h in first] != list(header):
            raise ParseError(path, 1, f"expected header {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(path, lineno, f"expected 2 columns, got {len(row)}")
            out[row[0].strip()] = row[1].strip()
    return out


@main.command()
@click.argument("edges", type=_IN)
@click.argument("firms", type=_IN)
@click.argument("out", type=_OUT)
@click.option("--sector-labels", type=_IN, default=None, help="firm,sector CSV overriding the firm file's sector column.")
@click.option("--classes", "classes_path", type=_IN, default=None, help="sector,class CSV (class: upstream/key/downstream).")
@_guarded
def sectors(edges: Path, firms: Path, out: Path, sector_labels: Path | None, classes_path: Path | None):
    """Aggregate to sector level; optionally cross-tabulate class vs score."""
    net = load_network(edges, firms)
    labels = _read_two_column(sector_labels, ("firm", "sector")) if sector_labels else None
    pruned, removed = prune_undefined(net)
    if labels:
        pruned = _override_sectors(pruned, labels)
    sector_net = aggregate_by_sector(pruned)
    out.mkdir(parents=True, exist_ok=True)

    rows = (
        (s, repr(float(sector_net.ds[k])), repr(float(sector_net.bank[k])), repr(float(sector_net.debts[k])))
        for k, s in enumerate(sector_net.sectors)
    )
    atomic_write_text(out / "sector_ds.csv", _rows_to_csv(("sector", "ds", "bank_borrowing", "total_debt"), rows))

    inputs = [edges, firms] + [p for p in (sector_labels, classes_path) if p]
    manifest = _write_manifest(out, f"sectors {edges} {firms} {out}", inputs)
    payload = {
        "manifest": manifest.embedded(),
        "sectors": list(sector_net.sectors),
        "ds": {s: float(sector_net.ds[k]) for k, s in enumerate(sector_net.sectors)},
        "excluded_firms": list(removed),
    }
    if classes_path is not None:
        sector_class = _read_two_column(classes_path, ("sector", "class"))
        firm_class = {
            f: sector_class[s]
            for f, s in (pruned.sectors or {}).items()
            if s in sector_class
        }
        result = solve_streamness(pruned, excluded=tuple(removed))
        tab = classification_crosstab(result, firm_class)
        atomic_write_text(
            out / "crosstab.csv",
            _rows_to_csv(
                ("class", "bin", "count"),
                ((c, b, str(tab.counts[(c, b)])) for c in CLASS_LABELS for b in BIN_LABELS),
            ),
        )
        payload["crosstab"] = {f"{c}|{b}": tab.counts[(c, b)] for c in CLASS_LABELS for b in BIN_LABELS}
    write_json(out / "sectors.json", payload)
    click.echo(f"aggregated {pruned.n} firms into {sector_net.n} sectors -> {out}")


def _override_sectors(net: CreditNetwork, labels: dict[str, str]) -> CreditNetwork:
    merged = dict(net.sectors or {})
    merged.update({f: s for f, s in labels.items() if f in net.index})
    return CreditNetwork(
        firms=net.firms, loans=net.loans, bank=net.bank,
        totals=net.totals, sectors=merged, surveyed=net.surveyed,
    )


@main.command()
@click.argument("edges", type=_IN)
@click.argument("firms", type=_IN)
@click.argument("out", type=_OUT)
@click.option("--method", type=click.Choice(["full", "sparse"]), required=True)
@click.option("--seed", type=int, default=None, help="Required for --method sparse.")
@_guarded
def reconstruct(edges: Path, firms: Path, out: Path, method: str, seed: int | None):
    """Fill residual credit back into the network and compare scores."""
    if method == "sparse" and seed is None:
        click.echo("error: --method sparse requires --seed", err=True)
        sys.exit(4)
    observed = load_network(edges, firms)
    res = residual(observed)
    if method == "full":
        rebuilt = reconstruct_full(observed)
    else:
        rebuilt = reconstruct_sparse(observed, seed=seed)
    report = compare_reconstructions(observed, rebuilt, method=method, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "reconstructed_edges.csv", edge_csv_text(rebuilt))
    manifest = _write_manifest(out, f"reconstruct --method {method} {edges} {firms} {out}", [edges, firms], seed=seed)
    write_json(
        out / "reconstruction_report.json",
        {
            "manifest": manifest.embedded(),
            "method": method,
            "seed": seed,
            "spearman": report.spearman,
            "kendall": report.kendall,
            "pearson": report.pearson,
            "n_common_firms": len(report.common_firms),
            "dropped_firms": list(report.dropped_firms),
            "clamped_firms": list(res.clamped_firms),
            "mean_ds_observed": report.ds_observed.mean,
            "mean_ds_reconstructed": report.ds_reconstructed.mean,
        },
    )
    click.echo(
        f"{method} reconstruction: spearman={report.spearman:.4f} "
        f"kendall={report.kendall:.4f} pearson={report.pearson:.4f} -> {out}"
    )


@main.command()
@click.argument("edges", type=_IN)
@click.argument("firms", type=_IN)
@click.argument("out", type=_OUT)
@click.option("--remove", "removal", required=True, help="borrower,lender pair naming the link to cut.")
@click.option("--reassign-bank", is_flag=True, help="Move the removed amount to bank borrowing instead of deleting it.")
@_guarded
def whatif(edges: Path, firms: Path, out: Path, removal: str, reassign_bank: bool):
    """Cut one credit link and report the score shift."""
    parts = [p.strip() for p in removal.split(",")]
    if len(parts) != 2 or not all(parts):
        click.echo("error: --remove expects 'borrower,lender'", err=True)
        sys.exit(2)
    borrower, lender = parts
    net = load_network(edges, firms)
    report = edge_removal_report(net, borrower, lender, reassign_bank=reassign_bank)

    before_net, _ = prune_undefined(net)
    after_net, _ = prune_undefined(remove_edge(net, borrower, lender, reassign_bank=reassign_bank))
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "ds_before.csv", result_csv_text(before_net, report.ds_before))
    atomic_write_text(out / "ds_after.csv", result_csv_text(after_net, report.ds_after))
    manifest = _write_manifest(out, f"whatif --remove {borrower},{lender} {edges} {firms} {out}", [edges, firms])
    write_json(
        out / "whatif_report.json",
        {
            "manifest": manifest.embedded(),
            "removed_edge": [borrower, lender],
            "reassign_bank": reassign_bank,
            "mean_before": report.mean_before,
            "mean_after": report.mean_after,
            "newly_undefined": list(report.newly_undefined),
        },
    )
    click.echo(f"mean score {report.mean_before:.4f} -> {report.mean_after:.4f} -> {out}")


@main.command()
@click.argument("edges", type=_IN)
@click.argument("firms", type=_IN)
@click.argument("out", type=_OUT)
@_guarded
def loops(edges: Path, firms: Path, out: Path):
    """List strongly connected components and mutual-credit pairs."""
    net = load_network(edges, firms)
    report = detect_loops(net)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(
        out / "two_cycles.csv",
        _rows_to_csv(("firm_a", "firm_b"), ((a, b) for a, b in report.two_cycles)),
    )
    manifest = _write_manifest(out, f"loops {edges} {firms} {out}", [edges, firms])
    write_json(
        out / "loops.json",
        {
            "manifest": manifest.embedded(),
            "sccs": [list(s) for s in report.sccs],
            "two_cycles": [list(p) for p in report.two_cycles],
        },
    )
    click.echo(f"{len(report.sccs)} looped component(s), {len(report.two_cycles)} mutual pair(s) -> {out}")


@main.command()
@click.argument("out", type=_OUT)
@click.option("--pair", nargs=2, type=_IN, default=None, help="Two result CSVs to correlate over shared firms.")
@click.option("--lognormal", "lognormal_path", type=_IN, default=None, help="Edge CSV whose amounts to fit.")
@_guarded
def stats(out: Path, pair, lognormal_path: Path | None):
    """Correlate two score files and/or fit loan sizes."""
    if not pair and lognormal_path is None:
        click.echo("error: pass --pair and/or --lognormal", err=True)
        sys.exit(2)
    payload: dict = {}
    inputs = []
    if pair:
        a, b = pair
        inputs += [a, b]
        ds_a = read_result_csv(a)
        ds_b = read_result_csv(b)
        common = sorted(set(ds_a) & set(ds_b))
        x = np.array([ds_a[f] for f in common])
        y = np.array([ds_b[f] for f in common])
        payload["correlations"] = {
            "n_common_firms": len(common),
            "pearson": pearson(x, y),
            "spearman": spearman(x, y),
            "kendall": kendall(x, y),
        }
    if lognormal_path is not None:
        inputs.append(lognormal_path)
        amounts = [amount for _, _, amount in read_edge_csv(lognormal_path) if amount > 0]
        fit = fit_lognormal(amounts)
        payload["lognormal_fit"] = {"mu": fit.mu, "sigma": fit.sigma, "n_samples": fit.n_samples}
    out.mkdir(parents=True, exist_ok=True)
    manifest = _write_manifest(out, "stats", inputs)
    payload["manifest"] = manifest.embedded()
    write_json(out / "stats.json", payload)
    click.echo(f"stats -> {out}")


@main.command()
@click.argument("out", type=_OUT)
@click.option("--n", type=int, required=True)
@click.option("--mean-out-degree", type=float, default=2.0, show_default=True)
@click.option("--mu", type=float, default=11.0, show_default=True)
@click.option("--sigma", type=float, default=2.0, show_default=True)
@click.option("--loop-fraction", type=float, default=0.0, show_default=True)
@click.option("--bank-alpha", type=float, default=2.0, show_default=True)
@click.option("--bank-beta", type=float, default=8.0, show_default=True)
@click.option("--acyclic", is_flag=True)
@click.option("--seed", type=int, required=True)
@_guarded
def synth(out: Path, n: int, mean_out_degree: float, mu: float, sigma: float,
          loop_fraction: float, bank_alpha: float, bank_beta: float, acyclic: bool, seed: int):
    """Generate a synthetic credit network as edges.csv + firms.csv."""
    config = SynthConfig(
        n=n, mean_out_degree=mean_out_degree, weight_mu=mu, weight_sigma=sigma,
        bank_share_alpha=bank_alpha, bank_share_beta=bank_beta,
        loop_fraction=loop_fraction, acyclic=acyclic, seed=seed,
    )
    net = generate(config)
    out.mkdir(parents=True, exist_ok=True)
    write_network(out, net)
    _write_manifest(out, f"synth --n {n} --seed {seed}", [], seed=seed)
    click.echo(f"generated {net.n} firms, {net.loans.nnz} loans -> {out}")


@main.command()
@click.argument("edges", type=_IN)
@click.argument("firms", type=_IN)
@click.argument("out", type=_OUT)
@click.option("--top-k", type=int, default=3, show_default=True, help="Creditors kept per firm.")
@_guarded
def truncate(edges: Path, firms: Path, out: Path, top_k: int):
    """Apply the top-k creditor observation model, recording true totals."""
    net = load_network(edges, firms)
    observed = truncate_top_creditors(net, k=top_k)
    out.mkdir(parents=True, exist_ok=True)
    write_network(out, observed)
    _write_manifest(out, f"truncate --top-k {top_k} {edges} {firms} {out}", [edges, firms])
    kept = observed.loans.nnz
    click.echo(f"kept {kept} of {net.loans.nnz} loans -> {out}")


if __name__ == "__main__":
    main()
