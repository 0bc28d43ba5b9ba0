"""
Command Line Interface for kmmeans

Commands:
    cluster   fit k_m-means (or a baseline) to a CSV and write assignments plus a summary
    select-k  sweep K with the jump statistic
    simulate  generate a censored Gaussian mixture with ground truth
    evaluate  adjusted Rand index and confusion matrix of two labelings
    study     replicate harness over a simulation grid

Exit codes: 0 success, 2 usage or configuration error, 3 data error, 4 non-convergence.
"""

import json
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
import pandas as pd
import typer
from pydantic import ValidationError

from kmmeans.baseline import KpodConfig, complete_case, kpod
from kmmeans.cli.csv_io import read_csv, read_labels, write_assignments, write_matrix
from kmmeans.cli.transforms import FittedTransforms, apply_transforms, build_transform_spec
from kmmeans.data_model import MaskedDataset, describe_dataset
from kmmeans.errors import (
    ConfigurationError,
    DataError,
    InfeasibleRate,
    InfeasibleSeparation,
    KmMeansError,
    NonConvergence,
)
from kmmeans.init import InitConfig
from kmmeans.km_core import KmConfig, derive_seed, fit
from kmmeans.model_select import select_k
from kmmeans.settings import settings
from kmmeans.shared_schema import SCHEMA_VERSION, FitResult, Methods, SeparationPresets, Weightings
from kmmeans.simulate import (
    MissingSpec,
    SimSpec,
    StudyGrid,
    adjusted_rand,
    confusion_matrix,
    run_study,
    simulate_dataset,
    summarize,
)
from kmmeans.structured_logging import generate_run_id, get_logger, set_level

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NONCONVERGED = 4

app = typer.Typer(
    name="kmmeans",
    help="k_m-means clustering for data with missing values",
    add_completion=False,
)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at INFO"),
    debug: bool = typer.Option(False, "--debug", help="Log at DEBUG"),
):
    if debug:
        set_level("DEBUG")
    elif verbose:
        set_level("INFO")


@contextmanager
def _command_errors(command: str) -> Iterator[None]:
    """Map library failures onto exit codes."""
    try:
        yield
    except NonConvergence as e:
        logger.warning(str(e), extra={"command": command, "passes": e.passes})
        typer.echo(f"Warning: {e}", err=True)
        raise typer.Exit(EXIT_NONCONVERGED)
    except (InfeasibleSeparation, InfeasibleRate) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_DATA)
    except (ValidationError, ConfigurationError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_USAGE)
    except (DataError, KmMeansError) as e:
        logger.error(str(e), extra={"command": command})
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_DATA)


def _normalize_method(method: str) -> str:
    name = method.replace("-", "_").lower()
    if name not in Methods.ALL:
        raise ConfigurationError(f"Unknown method {method!r}; use km_means, kpod or complete-case")
    return name


def _load(
    input_path: Path,
    missing_token: str,
    header: bool,
    delimiter: str,
    transform: List[str],
    center_scale: bool,
):
    table = read_csv(input_path, missing_token=missing_token, has_header=header, delimiter=delimiter)
    spec = build_transform_spec(transform, center_scale)
    ds, fitted = apply_transforms(table.dataset, spec, table.columns)
    return ds, table.columns, fitted


def _run(method: str, ds: MaskedDataset, k: int, inits: Optional[int], seed: int, weighting: str, n_jobs: int) -> FitResult:
    cfg = KmConfig(n_jobs=n_jobs)
    if method == Methods.KPOD:
        kpod_cfg = KpodConfig(inner=cfg) if inits is None else KpodConfig(n_inits=inits, inner=cfg)
        return kpod(ds, k, seed=seed, cfg=kpod_cfg)
    if method == Methods.COMPLETE_CASE:
        return complete_case(ds, k, seed=seed, n_inits=inits, cfg=cfg)
    return fit(ds, k, n_inits=inits, seed=seed, cfg=cfg, init_cfg=InitConfig(weighting=weighting))


def _original_scale_centers(result: FitResult, fitted: FittedTransforms) -> Optional[List[List[Optional[float]]]]:
    if not fitted.ops and fitted.means is None:
        return None
    restored = fitted.inverse(result.centers.values)
    return [
        [float(v) if m else None for v, m in zip(row, row_mask)]
        for row, row_mask in zip(restored, result.centers.mask)
    ]


def _write_json(path: Path, payload: Dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


@app.command("cluster")
def cmd_cluster(
    input_path: Path = typer.Argument(..., exists=True, dir_okay=False, help="Input CSV"),
    k: int = typer.Option(..., "--k", "-k", help="Number of clusters"),
    method: str = typer.Option("km_means", "--method", "-m", help="km_means, kpod or complete-case"),
    inits: Optional[int] = typer.Option(None, "--inits", help="Restarts; 100 K p when omitted"),
    seed: int = typer.Option(0, "--seed", help="Root seed"),
    weighting: str = typer.Option(Weightings.SCALED_DELTA, "--weighting", help="scaled_delta or unscaled_delta"),
    transform: List[str] = typer.Option([], "--transform", "-t", help="COLUMN=log10 or COLUMN=asinh:THETA"),
    center_scale: bool = typer.Option(False, "--center-scale", help="Center and scale every column"),
    missing_token: str = typer.Option(settings.missing_token, "--missing-token", help="Missing-value token"),
    header: bool = typer.Option(True, "--header/--no-header", help="First line holds column names"),
    delimiter: str = typer.Option(",", "--delimiter", help="Field delimiter"),
    assignments: Path = typer.Option(Path("assignments.csv"), "--assignments", "-a", help="Assignments CSV"),
    summary: Path = typer.Option(Path("summary.json"), "--summary", "-s", help="Summary JSON"),
    n_jobs: int = typer.Option(settings.n_jobs, "--n-jobs", help="Parallel restarts"),
):
    """Cluster the rows of a CSV with missing values."""
    run_id = generate_run_id()
    with _command_errors("cluster"):
        method = _normalize_method(method)
        ds, columns, fitted = _load(input_path, missing_token, header, delimiter, transform, center_scale)
        result = _run(method, ds, k, inits, seed, weighting, n_jobs)

        write_assignments(assignments, result.labels)
        _write_json(
            summary,
            {
                "schema_version": SCHEMA_VERSION,
                "generated_at": _timestamp(),
                "input": str(input_path),
                "columns": columns,
                "data": describe_dataset(ds),
                "config": {
                    "k": k,
                    "method": method,
                    "inits": inits,
                    "seed": seed,
                    "weighting": weighting,
                    "center_scale": center_scale,
                    "missing_token": missing_token,
                },
                "transforms": fitted.to_dict(),
                "fit": result.to_dict(),
                "centers_original_scale": _original_scale_centers(result, fitted),
            },
        )
        logger.info(
            "Wrote cluster outputs",
            extra={"run_id": run_id, "command": "cluster", "k": k, "objective": result.objective},
        )

    typer.echo(f"W_K = {result.objective!r}  sizes = {result.partition.sizes().tolist()}")
    with _command_errors("cluster"):
        result.require_converged()


@app.command("select-k")
def cmd_select_k(
    input_path: Path = typer.Argument(..., exists=True, dir_okay=False, help="Input CSV"),
    k_min: int = typer.Option(1, "--k-min", help="Smallest K"),
    k_max: int = typer.Option(..., "--k-max", help="Largest K"),
    inits: Optional[int] = typer.Option(None, "--inits", help="Restarts per K; 100 K p when omitted"),
    seed: int = typer.Option(0, "--seed", help="Root seed"),
    weighting: str = typer.Option(Weightings.SCALED_DELTA, "--weighting"),
    transform: List[str] = typer.Option([], "--transform", "-t"),
    center_scale: bool = typer.Option(False, "--center-scale"),
    missing_token: str = typer.Option(settings.missing_token, "--missing-token"),
    header: bool = typer.Option(True, "--header/--no-header"),
    delimiter: str = typer.Option(",", "--delimiter"),
    table: Path = typer.Option(Path("jump_table.csv"), "--table", help="K, W_K, D_hat, J table"),
    assignments: Path = typer.Option(Path("assignments.csv"), "--assignments", "-a"),
    summary: Path = typer.Option(Path("summary.json"), "--summary", "-s"),
    n_jobs: int = typer.Option(settings.n_jobs, "--n-jobs"),
):
    """Choose the number of clusters with the jump statistic."""
    with _command_errors("select-k"):
        ds, columns, fitted = _load(input_path, missing_token, header, delimiter, transform, center_scale)
        sweep = select_k(
            ds,
            range(k_min, k_max + 1),
            per_k_inits=inits,
            seed=seed,
            cfg=KmConfig(n_jobs=n_jobs),
            init_cfg=InitConfig(weighting=weighting),
        )
        pd.DataFrame(sweep.table(), columns=["K", "W_K", "D_hat", "J"]).to_csv(
            table, index=False, lineterminator="\n"
        )
        selected = sweep.selected
        write_assignments(assignments, selected.labels)
        _write_json(
            summary,
            {
                "schema_version": SCHEMA_VERSION,
                "generated_at": _timestamp(),
                "input": str(input_path),
                "columns": columns,
                "data": describe_dataset(ds),
                "config": {"k_min": k_min, "k_max": k_max, "inits": inits, "seed": seed, "weighting": weighting},
                "transforms": fitted.to_dict(),
                "sweep": sweep.to_dict(),
                "fit": selected.to_dict(),
                "centers_original_scale": _original_scale_centers(selected, fitted),
            },
        )

    for warning in sweep.warnings:
        typer.echo(f"Warning: {warning}", err=True)
    typer.echo(f"K_hat = {sweep.k_hat}")
    with _command_errors("select-k"):
        selected.require_converged()


@app.command("simulate")
def cmd_simulate(
    out_dir: Path = typer.Option(Path("simulated"), "--out-dir", "-o", help="Output directory"),
    k: int = typer.Option(4, "--k", "-k"),
    n: int = typer.Option(500, "--n"),
    p: int = typer.Option(5, "--p"),
    sigma: float = typer.Option(1.0, "--sigma"),
    separation: Optional[float] = typer.Option(None, "--separation", help="Minimum center distance in sigma units"),
    preset: str = typer.Option("easy", "--preset", help="easy, medium or hard; ignored with --separation"),
    mechanism: str = typer.Option("MCAR", "--mechanism", help="MCAR, MAR, NMAR1 or NMAR2"),
    lam: float = typer.Option(0.1, "--lambda", help="Overall missing proportion"),
    mar_dim_fraction: float = typer.Option(0.4, "--mar-dim-fraction"),
    affected: List[int] = typer.Option([], "--affected", help="1-based clusters censored by NMAR"),
    seed: int = typer.Option(0, "--seed"),
    missing_token: str = typer.Option(settings.missing_token, "--missing-token"),
):
    """Generate a censored Gaussian mixture with ground truth."""
    with _command_errors("simulate"):
        sim = SimSpec(
            k=k,
            n=n,
            p=p,
            sigma=sigma,
            separation=separation if separation is not None else SeparationPresets.resolve(preset),
            seed=seed,
        )
        missing = MissingSpec(
            mechanism=mechanism.upper(),
            lam=lam,
            mar_dim_fraction=mar_dim_fraction,
            affected_clusters=[a - 1 for a in affected] or None,
            seed=derive_seed(seed, 1),
        )
        data = simulate_dataset(sim, missing)

        out_dir.mkdir(parents=True, exist_ok=True)
        columns = [f"x{j + 1}" for j in range(p)]
        full = np.ones_like(data.mask.mask, dtype=bool)
        write_matrix(out_dir / "complete.csv", data.matrix, full, columns, missing_token)
        write_matrix(out_dir / "masked.csv", data.matrix, data.mask.mask, columns, missing_token)
        write_assignments(out_dir / "labels.csv", data.labels)
        _write_json(
            out_dir / "truth.json",
            {
                "schema_version": SCHEMA_VERSION,
                "simulation": sim.model_dump(),
                "missingness": missing.model_dump(by_alias=True),
                "mask": data.mask.to_dict(),
                "centers": data.centers.tolist(),
                "cluster_sizes": np.bincount(data.labels, minlength=k).tolist(),
            },
        )

    typer.echo(f"Wrote {out_dir} (realized lambda {data.mask.realized_lambda:.4f})")


@app.command("evaluate")
def cmd_evaluate(
    truth: Path = typer.Argument(..., exists=True, dir_okay=False, help="True labels CSV"),
    predicted: Path = typer.Argument(..., exists=True, dir_okay=False, help="Predicted labels CSV"),
    output_format: str = typer.Option("text", "--format", help="text or json"),
):
    """Adjusted Rand index and confusion matrix of two labelings."""
    with _command_errors("evaluate"):
        if output_format not in ("text", "json"):
            raise ConfigurationError(f"Unknown format {output_format!r}; use text or json")
        true_labels = read_labels(truth)
        predicted_labels = read_labels(predicted)
        ari = adjusted_rand(true_labels, predicted_labels)
        table = confusion_matrix(predicted_labels, true_labels)

    if output_format == "json":
        typer.echo(
            json.dumps(
                {
                    "ari": ari,
                    "n": int(len(true_labels)),
                    "confusion": {
                        "predicted": [str(i) for i in table.index],
                        "truth": [str(c) for c in table.columns],
                        "counts": table.to_numpy().tolist(),
                    },
                },
                sort_keys=True,
            )
        )
    else:
        typer.echo(f"ARI = {ari:.6f}")
        typer.echo(table.to_string())


@app.command("study")
def cmd_study(
    out: Path = typer.Option(Path("study.jsonl"), "--out", "-o", help="JSON-lines metrics file"),
    replicates: int = typer.Option(2, "--replicates", "-r"),
    seed: int = typer.Option(0, "--seed"),
    full_grid: bool = typer.Option(False, "--full-grid", help="Run the complete simulation grid"),
    method: List[str] = typer.Option([Methods.KM_MEANS, Methods.KPOD], "--method", "-m"),
    inits: int = typer.Option(10, "--inits"),
    k_min: Optional[int] = typer.Option(None, "--k-min", help="Also sweep K from here"),
    k_max: Optional[int] = typer.Option(None, "--k-max"),
    weighting: str = typer.Option(Weightings.SCALED_DELTA, "--weighting"),
    n_jobs: int = typer.Option(settings.n_jobs, "--n-jobs"),
):
    """Replicate harness over a simulation grid."""
    with _command_errors("study"):
        methods = [_normalize_method(m) for m in method]
        if (k_min is None) != (k_max is None):
            raise ConfigurationError("--k-min and --k-max go together")
        k_range = list(range(k_min, k_max + 1)) if k_min is not None and k_max is not None else None
        grid = StudyGrid.full() if full_grid else StudyGrid()
        records = run_study(
            grid,
            replicates,
            seed,
            out_path=out,
            methods=methods,
            n_inits=inits,
            k_range=k_range,
            weighting=weighting,
            n_jobs=n_jobs,
        )

    typer.echo(json.dumps(summarize(records), indent=2, sort_keys=True))
