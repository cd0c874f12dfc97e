"""Command-line client for the reconstruction service.

The CLI is a thin HTTP client: it reads and writes local files and sends the
computation to the service API.  Without ``--url`` the requests run against
an in-process instance of the app, so no daemon is needed for local use;
``serve`` starts a network instance for remote clients.

Exit codes for ``reconstruct``/``pipeline``: 0 solution found, 1 usage or
schema error, 2 no solution, 3 combination budget exceeded.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fileio
from .models import (
    PipelineRequest,
    ReconstructRequest,
    ScenarioSpec,
    SimulateRequest,
    SlamConfigModel,
)
from .svg import render_solution_svg

EXIT_NO_SOLUTION = 2
EXIT_BUDGET = 3


def _client(url: str | None):
    if url:
        import httpx

        return httpx.Client(base_url=url, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(ctx, path: str, payload: dict) -> dict:
    with _client(ctx.obj.get("url")) as client:
        resp = client.post(path, json=payload)
        if resp.status_code == 422:
            raise click.ClickException(f"schema error: {resp.text}")
        resp.raise_for_status()
        return resp.json()


def _parse_config_file(path: str) -> dict:
    """key=value lines; values parsed as JSON scalars where possible."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _slam_config(config_file, eps, vth, kmin, kmax, budget, angle_constraint, jobs,
                 angular_tol, allow_reflection) -> SlamConfigModel:
    values = _parse_config_file(config_file) if config_file else {}
    for key, val in (
        ("eps", eps), ("v_th", vth), ("k_min", kmin), ("k_max", kmax),
        ("budget", budget), ("jobs", jobs), ("angular_tol", angular_tol),
    ):
        if val is not None:
            values[key] = val
    if allow_reflection:
        values["allow_reflection"] = True
    if angle_constraint is not None:
        lo, _, hi = angle_constraint.partition(":")
        try:
            values["angle_constraint"] = (float(lo), float(hi))
        except ValueError:
            raise click.ClickException("--angle-constraint expects MIN:MAX degrees")
    try:
        return SlamConfigModel(**values)
    except Exception as exc:
        raise click.ClickException(f"bad config: {exc}")


def _config_options(f):
    for opt in reversed([
        click.option("--config", "config_file", type=click.Path(exists=True),
                     help="key=value config file"),
        click.option("--eps", type=float, default=None, help="cosine tolerance band"),
        click.option("--vth", type=float, default=None, help="turn-angle variance threshold"),
        click.option("--kmin", type=int, default=None, help="smallest wall count"),
        click.option("--kmax", type=int, default=None, help="largest wall count"),
        click.option("--budget", type=int, default=None, help="combination budget"),
        click.option("--angle-constraint", default=None, metavar="MIN:MAX",
                     help="adjacent-wall angle constraint in degrees, e.g. 50:130"),
        click.option("--angular-tol", type=float, default=None,
                     help="phi clustering tolerance (radians)"),
        click.option("--allow-reflection", is_flag=True,
                     help="report the mirror twin as equally valid"),
        click.option("--jobs", type=int, default=None, help="parallel workers over wall counts"),
    ]):
        f = opt(f)
    return f


@click.group()
@click.option("--url", envvar="ECHOSLAM_URL", default=None,
              help="service URL; default runs the service in-process")
@click.pass_context
def main(ctx, url):
    """Room reconstruction from unlabeled first-order acoustic echoes."""
    ctx.ensure_object(dict)
    ctx.obj["url"] = url


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("scenario", type=click.Path(exists=True))
@click.option("-o", "--outdir", type=click.Path(), default=".", show_default=True)
@click.option("--waveforms", is_flag=True, help="also write received waveforms")
@click.option("--wav", is_flag=True, help="export waveforms as WAV too")
@click.option("--dedup", is_flag=True, help="collapse duplicate distances for display")
@click.pass_context
def simulate(ctx, scenario, outdir, waveforms, wav, dedup):
    """Simulate a scenario: per-point echo CSVs plus the ground truth JSON."""
    try:
        spec = ScenarioSpec(**json.loads(Path(scenario).read_text()))
    except Exception as exc:
        raise click.ClickException(f"schema error in {scenario}: {exc}")
    req = SimulateRequest(scenario=spec, include_waveforms=waveforms, dedup=dedup)
    data = _post(ctx, "/simulate", req.model_dump(exclude_none=True))

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    from .scenario import echo_set_from_model, waveform_from_model
    from .models import EchoSetModel, WaveformModel

    for e in data["echoes"]:
        model = EchoSetModel(**e)
        fileio.write_echo_csv(out / f"echoes_{model.point_id}.csv", model.point_id,
                              echo_set_from_model(model))
    (out / "ground_truth.json").write_text(json.dumps(data["ground_truth"], indent=2))
    for w in data.get("waveforms") or []:
        model = WaveformModel(**w)
        wave = waveform_from_model(model)
        fileio.write_waveform(out / f"received_{model.point_id}.eslm", wave)
        if wav:
            fileio.export_wav(out / f"received_{model.point_id}.wav", wave)
    click.echo(json.dumps(data["ground_truth"]["solution"], indent=2))


@main.command()
@click.argument("inputs", nargs=3, type=click.Path(exists=True))
@click.option("--d12", type=float, required=True, help="first step length (m)")
@click.option("--d23", type=float, required=True, help="second step length (m)")
@_config_options
@click.option("--f0", type=float, default=30.0, show_default=True)
@click.option("--f1", type=float, default=8000.0, show_default=True)
@click.option("--chirp-duration", type=float, default=0.05, show_default=True)
@click.option("--c", "c_mps", type=float, default=346.0, show_default=True)
@click.option("--d-min", type=float, default=0.6, show_default=True)
@click.option("--d-max", type=float, default=6.5, show_default=True)
@click.option("--min-separation", type=float, default=0.5, show_default=True)
@click.option("--peaks-json", type=click.Path(), default=None,
              help="dump detected candidate distances per point")
@click.option("--svg", "svg_path", type=click.Path(), default=None)
@click.option("-o", "--output", type=click.Path(), default=None, help="solution JSON path")
@click.pass_context
def reconstruct(ctx, inputs, d12, d23, config_file, eps, vth, kmin, kmax, budget,
                angle_constraint, angular_tol, allow_reflection, jobs,
                f0, f1, chirp_duration, c_mps, d_min, d_max, min_separation,
                peaks_json, svg_path, output):
    """Reconstruct a room from three echo CSVs or three waveform files."""
    cfg = _slam_config(config_file, eps, vth, kmin, kmax, budget, angle_constraint,
                       jobs, angular_tol, allow_reflection)
    from .scenario import echo_set_model, waveform_model, POINT_IDS

    req_kwargs: dict = {"d12": d12, "d23": d23, "config": cfg}
    if all(fileio.is_waveform_file(p) for p in inputs):
        req_kwargs["waveforms"] = [
            waveform_model(pid, fileio.read_waveform(p))
            for pid, p in zip(POINT_IDS, inputs)
        ]
        req_kwargs["acoustics"] = {
            "f0_hz": f0, "f1_hz": f1, "chirp_duration_s": chirp_duration,
            "c_mps": c_mps,
        }
        req_kwargs["peaks"] = {
            "d_min_m": d_min, "d_max_m": d_max, "min_separation_m": min_separation,
        }
    else:
        echoes = []
        for pid, p in zip(POINT_IDS, inputs):
            file_pid, es = fileio.read_echo_csv(p)
            echoes.append(echo_set_model(file_pid or pid, es))
        req_kwargs["echoes"] = echoes
    try:
        req = ReconstructRequest(**req_kwargs)
    except Exception as exc:
        raise click.ClickException(f"schema error: {exc}")
    data = _post(ctx, "/reconstruct", req.model_dump(exclude_none=True))

    if peaks_json and data.get("detected"):
        Path(peaks_json).write_text(json.dumps(data["detected"], indent=2))
    if data["status"] == "no_solution":
        click.echo(f"no solution: {data.get('detail', '')}", err=True)
        sys.exit(EXIT_NO_SOLUTION)
    if data["status"] == "budget_exceeded":
        click.echo(
            f"budget exceeded: {data.get('detail', '')} counts={data.get('counts')}",
            err=True,
        )
        sys.exit(EXIT_BUDGET)
    text = json.dumps(data["solution"], indent=2)
    if output:
        Path(output).write_text(text)
    click.echo(text)
    if svg_path:
        Path(svg_path).write_text(
            render_solution_svg(data["solution"], ghost=allow_reflection)
        )


@main.command()
@click.argument("scenario", type=click.Path(exists=True))
@_config_options
@click.option("--waveform-pipeline", is_flag=True,
              help="force the acoustic path even without an SNR setting")
@click.option("--timing", is_flag=True, help="include wall-clock timing in the report")
@click.option("--svg", "svg_path", type=click.Path(), default=None)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
def pipeline(ctx, scenario, config_file, eps, vth, kmin, kmax, budget,
             angle_constraint, angular_tol, allow_reflection, jobs,
             waveform_pipeline, timing, svg_path, output):
    """Simulate, detect and reconstruct a scenario; report errors vs truth."""
    try:
        spec = ScenarioSpec(**json.loads(Path(scenario).read_text()))
    except Exception as exc:
        raise click.ClickException(f"schema error in {scenario}: {exc}")
    cfg = _slam_config(config_file, eps, vth, kmin, kmax, budget, angle_constraint,
                       jobs, angular_tol, allow_reflection)
    req = PipelineRequest(
        scenario=spec, config=cfg, use_waveforms=waveform_pipeline,
        include_timing=timing,
    )
    data = _post(ctx, "/pipeline", req.model_dump(exclude_none=True))
    text = json.dumps(data, indent=2)
    if output:
        Path(output).write_text(text)
    click.echo(text)
    if svg_path and data.get("solution"):
        Path(svg_path).write_text(
            render_solution_svg(data["solution"], ghost=allow_reflection)
        )
    if data["status"] == "no_solution":
        sys.exit(EXIT_NO_SOLUTION)
    if data["status"] == "budget_exceeded":
        sys.exit(EXIT_BUDGET)


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
def ambiguity(ctx, seed, output):
    """Step-length knowledge table: which levels admit unique reconstruction."""
    data = _post(ctx, "/ambiguity", {"seed": seed})
    text = json.dumps(data, indent=2)
    if output:
        Path(output).write_text(text)
    for row in data["rows"]:
        knowledge = ", ".join(row["knowledge"]) or "none"
        click.echo(f"{knowledge:>16}: {'recoverable' if row['feasible'] else 'ambiguous'}")
    if output is None:
        click.echo(text)


@main.command()
@click.argument("n1", type=int)
@click.argument("n2", type=int)
@click.argument("n3", type=int)
@click.argument("k", type=int)
@click.pass_context
def count(ctx, n1, n2, n3, k):
    """Number of echo assignments to exhaust for K walls."""
    data = _post(ctx, "/count", {"n1": n1, "n2": n2, "n3": n3, "k": k})
    click.echo(str(data["count"]))


if __name__ == "__main__":
    main()
