"""Command-line interface for campaign steering and benchmarks."""

from __future__ import annotations

import json
import sys

import click

from . import bench, campaign, fls
from .errors import CampaignFormatError, InvalidArgument, NotFound


@click.group()
def main():
    """Active Pareto-front learning workbench."""


def _load(path):
    try:
        return campaign.load_from_file(path)
    except NotFound as exc:
        raise click.ClickException(str(exc))
    except CampaignFormatError as exc:
        raise click.ClickException(f"cannot read campaign: {exc}")


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.option("--seed", default=0, type=int)
@click.option("--epsilon", default=0.01, type=float)
@click.option("--batch", default=3, type=int)
@click.option("--simplex-denominator", default=9, type=int)
@click.option("--speeds", default=",".join(str(s) for s in campaign.DEFAULT_SPEEDS))
@click.option(
    "--dilutions", default=",".join(str(d) for d in campaign.DEFAULT_DILUTIONS)
)
def init(path, seed, epsilon, batch, simplex_denominator, speeds, dilutions):
    """Create a fresh campaign file."""
    cfg = campaign.GridConfig(
        simplex_denominator=simplex_denominator,
        speeds=tuple(float(s) for s in speeds.split(",")),
        dilutions=tuple(float(d) for d in dilutions.split(",")),
    )
    state = campaign.new_campaign(cfg, seed=seed, epsilon=epsilon, batch_size=batch)
    campaign.save_to_file(state, path)
    click.echo(f"initialized campaign with {state.n_points} design points at {path}")


def status_view(state) -> dict:
    counts = state.counts()
    suggestions = (
        [p.id for p in campaign.suggest_batch(state, state.batch_size)]
        if state.low is not None
        else []
    )
    last_digest = None
    for entry in reversed(state.log):
        if entry.get("event") == "step":
            last_digest = entry.get("report_digest")
            break
    return {
        "iteration": state.iteration,
        "counts": counts,
        "sampled": len(state.measurements),
        "grid_size": state.n_points,
        "converged": state.converged,
        "suggestions": suggestions,
        "last_report_digest": last_digest,
    }


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
def status(path):
    """Print the campaign status view."""
    click.echo(json.dumps(status_view(_load(path)), indent=2))


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.option("--batch", default=None, type=int)
def suggest(path, batch):
    """Print the current suggestion batch, one point per line."""
    state = _load(path)
    if state.low is None:
        raise click.ClickException("no model yet: ingest measurements and run `step`")
    points = campaign.suggest_batch(state, batch or state.batch_size)
    if not points:
        click.echo("converged: no suggestions")
        return
    for p in points:
        click.echo(
            json.dumps(
                {
                    "id": p.id,
                    "c_pvp10": p.c_pvp10,
                    "c_pvp40": p.c_pvp40,
                    "c_pvp360": p.c_pvp360,
                    "spin_speed": p.spin_speed,
                    "dilution": p.dilution,
                }
            )
        )


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.argument("csv_file", type=click.Path(exists=True))
def ingest(path, csv_file):
    """Import measurements from a point_id,hardness,inverse_elasticity,note CSV."""
    state = _load(path)
    with open(csv_file) as fh:
        try:
            rows = campaign.import_measurements_csv(state, fh.read())
        except (InvalidArgument, NotFound) as exc:
            raise click.ClickException(str(exc))
    campaign.save_to_file(state, path)
    click.echo(f"ingested {len(rows)} measurements")


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.option("--report/--no-report", default=True)
@click.option("--embedding/--no-embedding", "embedding_", default=True)
def step(path, report, embedding_):
    """Run one campaign iteration (refit, reclassify, suggest)."""
    state = _load(path)
    try:
        artifacts = campaign.step(
            state, compute_report=report, compute_embedding=embedding_
        )
    except InvalidArgument as exc:
        raise click.ClickException(str(exc))
    campaign.save_to_file(state, path)
    view = status_view(state)
    view["suggestions"] = [p.id for p in artifacts.suggestions]
    click.echo(json.dumps(view, indent=2))


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.option("--threshold", default=0.95, type=float)
@click.option("--out", default="report.md", type=click.Path())
@click.option("--records-out", default=None, type=click.Path())
@click.option("--prompt-out", default=None, type=click.Path())
def explain(path, threshold, out, records_out, prompt_out):
    """Write the linguistic summary report, records, and LLM prompt."""
    state = _load(path)
    try:
        statements, report = campaign.explain(state, threshold=threshold)
    except InvalidArgument as exc:
        raise click.ClickException(str(exc))
    with open(out, "w") as fh:
        fh.write(report.markdown)
    with open(records_out or out + ".jsonl", "w") as fh:
        fh.write(fls.statement_records_lines(statements) + "\n")
    with open(prompt_out or out + ".prompt.txt", "w") as fh:
        fh.write(report.prompt)
    click.echo(f"wrote {len(statements)} statements to {out}")


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.option("--out", default="embedding.jsonl", type=click.Path())
def embed(path, out):
    """Write the 2-D grid embedding as line-delimited records."""
    state = _load(path)
    if state.embedding is None:
        state.embedding = campaign.grid_embedding(state)
        campaign.save_to_file(state, path)
    with open(out, "w") as fh:
        for p in state.points:
            fh.write(
                json.dumps(
                    {
                        "id": p.id,
                        "x": float(state.embedding[p.id, 0]),
                        "y": float(state.embedding[p.id, 1]),
                    }
                )
                + "\n"
            )
    click.echo(f"wrote {state.n_points} embedding records to {out}")


@main.command(name="bench")
@click.option("--runs", default=20, type=int)
@click.option("--epsilon", default=0.01, type=float)
@click.option("--max-evaluations", default=40, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", default=None, type=click.Path())
def bench_cmd(runs, epsilon, max_evaluations, seed, out):
    """Run the seeded Binh-Korn benchmark suite."""
    records = bench.run_binh_korn_suite(
        n_runs=runs,
        epsilon=epsilon,
        max_total_evaluations=max_evaluations,
        seed0=seed,
    )
    lines = "\n".join(json.dumps(r) for r in records)
    if out:
        with open(out, "w") as fh:
            fh.write(lines + "\n")
    click.echo(lines)
    converged = sum(r["converged"] and r["samples"] <= max_evaluations for r in records)
    covered = sum(r["coverage"] for r in records)
    click.echo(
        f"# converged {converged}/{runs}, coverage {covered}/{runs}, "
        f"max seconds {max(r['seconds'] for r in records):.2f}"
    )


@main.command()
@click.option("--campaign", "path", required=True, type=click.Path())
@click.option("--port", default=8711, type=int)
@click.option("--host", default="127.0.0.1")
def serve(path, port, host):
    """Start the local HTTP steering service."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(path), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
