"""CLI: dump per-block backbone features of an image dataset.

    foal-extract --dataset cifar100 --split both --token cls --out features/ \
                 [--tasks 10 --classes-per-task 10 --order-seed 0]

Writes one feature file per task and split plus a manifest consumable by
the engine's `run` command.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .backbone import TOKEN_CHOICES
from .errors import ExtractorError
from .extract import DATASETS, ExtractionJob, run_extraction


@click.command()
@click.option("--dataset", required=True, type=click.Choice(DATASETS),
              help="Image dataset to extract.")
@click.option("--split", type=click.Choice(("train", "test", "both")),
              default="both", show_default=True)
@click.option("--token", type=click.Choice(TOKEN_CHOICES), default="cls",
              show_default=True,
              help="Per-block vector: class token or mean of patch tokens.")
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False),
              help="Output directory for feature files and manifest.")
@click.option("--tasks", type=int, default=10, show_default=True)
@click.option("--classes-per-task", type=int, default=None,
              help="Defaults to class count divided by tasks.")
@click.option("--order-seed", type=int, default=None,
              help="Permute class order before partitioning (reproducible).")
@click.option("--backbone", default="vit_b_16_imagenet1k", show_default=True)
@click.option("--data-root", type=click.Path(file_okay=False),
              default="data", show_default=True)
@click.option("--download/--no-download", default=False, show_default=True,
              help="Let torchvision fetch missing dataset archives.")
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--device", default="cpu", show_default=True)
def extract(dataset, split, token, out_dir, tasks, classes_per_task,
            order_seed, backbone, data_root, download, batch_size, device):
    """Extract per-block features into FOAL files plus a stream manifest."""
    job = ExtractionJob(
        dataset=dataset, out_dir=Path(out_dir), split=split, token=token,
        backbone=backbone, tasks=tasks, classes_per_task=classes_per_task,
        order_seed=order_seed, data_root=Path(data_root), download=download,
        batch_size=batch_size, device=device,
    )
    manifest = run_extraction(job, progress=click.echo)
    if manifest is None:
        click.echo(f"split {split!r} written; manifest pending the other split")
    else:
        click.echo(str(manifest))


def main(argv=None) -> int:
    try:
        extract.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except ExtractorError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
