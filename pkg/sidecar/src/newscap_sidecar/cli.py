"""newscap-sidecar command line: serve the HTTP service or export fixtures."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .app import DEFAULT_BATCH_LIMIT, create_app
from .fixtures import export_fixtures
from .models import build_bundle


@click.group()
def main():
    """Reference inference service for the caption-evaluation backends."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8901, show_default=True)
@click.option("--family", type=click.Choice(["hash", "real"]), default="hash",
              show_default=True, help="model family backing the endpoints")
@click.option("--seed", default=0, show_default=True,
              help="seed for the hash family")
@click.option("--batch-limit", default=DEFAULT_BATCH_LIMIT, show_default=True)
def serve(host, port, family, seed, batch_limit):
    """Run the HTTP service."""
    import uvicorn

    bundle = build_bundle(family, seed=seed)
    uvicorn.run(create_app(bundle, batch_limit), host=host, port=port)


@main.command("export-fixtures")
@click.option("--requests", "requests_path", required=True, type=click.Path(),
              help="JSON request corpus: kind -> list of inputs")
@click.option("--family", type=click.Choice(["hash", "real"]), default="hash",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def export_fixtures_cmd(requests_path, family, seed, out_path):
    """Replay a request corpus and write a fixture file for offline runs."""
    requests = json.loads(Path(requests_path).read_text(encoding="utf-8"))
    bundle = build_bundle(family, seed=seed)
    n = export_fixtures(bundle, requests, out_path)
    click.echo(f"wrote {n} fixture records to {out_path}")


if __name__ == "__main__":
    main()
