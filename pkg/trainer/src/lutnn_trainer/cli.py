"""Command-line entry points for training and artifact export."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .train import TrainingConfig, export_all, train_classifier, train_denoiser


def _cfg(dataset, epochs, n_train, n_test, lr, seed) -> TrainingConfig:
    return TrainingConfig(
        dataset=dataset, epochs=epochs, n_train=n_train, n_test=n_test,
        learning_rate=lr, seed=seed,
    )


_common = [
    click.option("--dataset", type=click.Path(), default=None,
                 help="IDX dataset directory; omit for the offline synthetic corpus."),
    click.option("--epochs", type=int, default=15, show_default=True),
    click.option("--train-size", "n_train", type=int, default=5000, show_default=True),
    click.option("--test-size", "n_test", type=int, default=500, show_default=True),
    click.option("--lr", type=float, default=1e-3, show_default=True),
    click.option("--seed", type=int, default=42, show_default=True),
]


def common_options(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@click.group()
def main() -> None:
    """Train small quantized CNNs and export portable weight bundles."""


@main.command("classifier")
@common_options
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def classifier_cmd(dataset, epochs, n_train, n_test, lr, seed, out_path):
    """Train the digit classifier and save its weight bundle."""
    bundle = train_classifier(_cfg(dataset, epochs, n_train, n_test, lr, seed),
                              out_path)
    click.echo(json.dumps(bundle.metadata))


@main.command("denoiser")
@common_options
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def denoiser_cmd(dataset, epochs, n_train, n_test, lr, seed, out_path):
    """Train the denoiser and save its weight bundle."""
    bundle = train_denoiser(_cfg(dataset, epochs, n_train, n_test, lr, seed),
                            out_path)
    click.echo(json.dumps(bundle.metadata))


@main.command("export-all")
@common_options
@click.option("--out-dir", required=True, type=click.Path(path_type=Path))
def export_all_cmd(dataset, epochs, n_train, n_test, lr, seed, out_dir):
    """Train both models and write bundles + IDX/PGM fixtures to a directory."""
    meta = export_all(_cfg(dataset, epochs, n_train, n_test, lr, seed), out_dir)
    click.echo(json.dumps(meta, indent=1))


if __name__ == "__main__":
    main()
