"""Command-line surface.

Subcommands: ``run`` (train over a manifest and write a results document),
``verify`` (recursive-vs-joint equivalence check), ``bench`` (constant
per-batch cost check), ``norms`` (per-class weight norm diagnostic),
``make-synthetic`` (fixture generator) and ``report`` (CSV + figures from a
results document).

Exit codes are a stable contract: 0 success, 1 validation or usage error,
2 tolerance or assertion failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import classifier as clf
from .errors import FoalError
from .harness import RunConfig, run_experiment
from .manifest import parse_manifest
from .report import render_report
from .results import parse_results, results_to_dict, serialize_results
from .synthetic import make_synthetic_stream
from .verification import benchmark_updates, run_equivalence_check


class CheckFailed(Exception):
    """A measured quantity missed its required tolerance (exit code 2)."""


@click.group()
def cli():
    """Exemplar-free online class-incremental learner."""


def _run_options(command):
    for option in reversed([
        click.option("--gamma", type=float, default=1.0, show_default=True,
                     help="Ridge regularization strength."),
        click.option("--proj-dim", type=int, default=1000, show_default=True,
                     help="Random projection output dimension."),
        click.option("--seed", type=int, default=0, show_default=True,
                     help="Seed for the frozen projection."),
        click.option("--batch-size", type=int, default=10, show_default=True,
                     help="Mini-batch size of the training stream."),
        click.option("--no-fusion", is_flag=True,
                     help="Ablation: keep only the last block instead of "
                          "averaging all blocks."),
        click.option("--no-smooth-projection", is_flag=True,
                     help="Ablation: skip the random projection and sigmoid."),
    ]):
        command = option(command)
    return command


def _build_config(gamma, proj_dim, seed, batch_size, no_fusion,
                  no_smooth_projection) -> RunConfig:
    config = RunConfig(
        gamma=gamma,
        projection_dim=proj_dim,
        seed=seed,
        batch_size=batch_size,
        fusion_enabled=not no_fusion,
        smooth_projection_enabled=not no_smooth_projection,
    )
    config.validate()
    return config


@cli.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Stream manifest to train on.")
@_run_options
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Write the results document (JSON) here.")
@click.option("--timing", is_flag=True,
              help="Include per-batch wall times in the results document "
                   "(breaks byte-level determinism between runs).")
@click.option("--save-state", type=click.Path(dir_okay=False), default=None,
              help="Persist the final classifier state (.npz).")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Also render CSV tables and figures into this directory.")
def run(manifest_path, gamma, proj_dim, seed, batch_size, no_fusion,
        no_smooth_projection, output, timing, save_state, report_dir):
    """Train once over a manifest's stream and report the metrics."""
    config = _build_config(gamma, proj_dim, seed, batch_size, no_fusion,
                           no_smooth_projection)
    manifest = parse_manifest(manifest_path)
    report, acc, state = run_experiment(manifest, config)
    document = results_to_dict(report, acc, include_timing=timing)
    if output:
        Path(output).write_text(serialize_results(document))
    if save_state:
        clf.save_state(state, save_state)
    if report_dir:
        render_report(document, report_dir)
    click.echo(f"A_avg={document['average_accuracy']!r}")
    click.echo(f"A_last={document['last_accuracy']!r}")
    if document["final_forgetting"] is not None:
        click.echo(f"F_final={document['final_forgetting']!r}")


@cli.command()
@click.option("--dim", type=int, default=64, show_default=True)
@click.option("--tasks", type=int, default=5, show_default=True)
@click.option("--batches", type=int, default=10, show_default=True,
              help="Mini-batches per task.")
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("--classes-per-task", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
def verify(dim, tasks, batches, batch_size, classes_per_task, seed, gamma):
    """Check that recursive updates reproduce the joint ridge solution."""
    if min(dim, tasks, batches, batch_size, classes_per_task) < 1:
        raise FoalError("all verify parameters must be >= 1")
    if not gamma > 0:
        raise FoalError("gamma must be positive")
    result = run_equivalence_check(
        dim=dim, tasks=tasks, batches_per_task=batches, batch_size=batch_size,
        classes_per_task=classes_per_task, seed=seed, gamma=gamma)
    click.echo(f"relative_frobenius_error={result.relative_error:.3e}")
    click.echo(f"tolerance={result.tolerance:.1e}")
    click.echo(f"weight_digest={result.digest}")
    click.echo(f"elapsed_seconds={result.elapsed_seconds:.3f}")
    if not result.passed:
        raise CheckFailed(
            f"recursive and joint solutions disagree: relative error "
            f"{result.relative_error:.3e} > {result.tolerance:.1e}"
        )
    click.echo("equivalence: OK")


@cli.command()
@click.option("--dim", type=int, default=1000, show_default=True)
@click.option("--batch-size", type=int, default=10, show_default=True)
@click.option("--updates", type=int, default=1000, show_default=True)
@click.option("--classes", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench(dim, batch_size, updates, classes, seed):
    """Time repeated updates; per-batch cost must not grow with the stream."""
    if min(dim, batch_size, updates, classes) < 1:
        raise FoalError("all bench parameters must be >= 1")
    result = benchmark_updates(dim=dim, batch_size=batch_size,
                               updates=updates, classes=classes, seed=seed)
    click.echo(f"updates={len(result.batch_seconds)}")
    click.echo(f"first_decile_median_seconds={result.first_decile_median:.6f}")
    click.echo(f"last_decile_median_seconds={result.last_decile_median:.6f}")
    click.echo(f"ratio={result.ratio:.3f}")
    if not result.passed:
        raise CheckFailed(
            f"per-update cost grew: last-decile median is {result.ratio:.2f}x "
            f"the first-decile median (limit 2.0x)"
        )
    click.echo("constant per-batch cost: OK")


@cli.command()
@click.option("--state", "state_path", type=click.Path(exists=True,
              dir_okay=False), default=None,
              help="Load a saved classifier state instead of training.")
@click.option("--manifest", "manifest_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Train over this manifest, then report norms.")
@_run_options
def norms(state_path, manifest_path, gamma, proj_dim, seed, batch_size,
          no_fusion, no_smooth_projection):
    """Print per-class weight column norms (recency-bias diagnostic)."""
    if (state_path is None) == (manifest_path is None):
        raise FoalError("provide exactly one of --state or --manifest")
    if state_path is not None:
        state = clf.load_state(state_path)
    else:
        config = _build_config(gamma, proj_dim, seed, batch_size, no_fusion,
                               no_smooth_projection)
        manifest = parse_manifest(manifest_path)
        _, _, state = run_experiment(manifest, config)
    if state.num_classes == 0:
        raise FoalError("state is untrained: no classes learned")
    pairs = clf.weight_column_norms(state)
    click.echo("class_id,weight_norm")
    for cid, norm in pairs:
        click.echo(f"{cid},{norm!r}")
    values = np.array([norm for _, norm in pairs])
    mean = float(values.mean())
    cv = float(values.std() / mean) if mean > 0 else float("inf")
    click.echo(f"# coefficient_of_variation={cv!r}")


@cli.command("make-synthetic")
@click.option("--tasks", type=int, default=5, show_default=True)
@click.option("--classes-per-task", type=int, default=4, show_default=True)
@click.option("--samples-per-class", type=int, default=100, show_default=True)
@click.option("--test-samples-per-class", type=int, default=50,
              show_default=True)
@click.option("--block-count", type=int, default=4, show_default=True)
@click.option("--block-dim", type=int, default=32, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--label-noise", type=float, default=0.0, show_default=True,
              help="Fraction of train labels resampled within the task.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def make_synthetic(tasks, classes_per_task, samples_per_class,
                   test_samples_per_class, block_count, block_dim, seed,
                   label_noise, out_dir):
    """Generate a separable synthetic feature stream plus manifest."""
    try:
        manifest_path = make_synthetic_stream(
            out_dir, tasks=tasks, classes_per_task=classes_per_task,
            samples_per_class=samples_per_class,
            test_samples_per_class=test_samples_per_class,
            block_count=block_count, block_dim=block_dim, seed=seed,
            label_noise=label_noise)
    except ValueError as exc:
        raise FoalError(str(exc)) from exc
    except OSError as exc:
        raise FoalError(f"cannot write fixture: {exc}") from exc
    click.echo(str(manifest_path))


@cli.command()
@click.option("--results", "results_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Results document produced by `run --output`.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def report(results_path, out_dir):
    """Render CSV tables and figures from a results document."""
    document = parse_results(results_path)
    for path in render_report(document, out_dir):
        click.echo(str(path))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except CheckFailed as exc:
        click.echo(f"check failed: {exc}", err=True)
        return 2
    except FoalError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
