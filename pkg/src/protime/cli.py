"""Command-line client for the certification service.

Each subcommand sends one request to the service and renders the
response; by default the service runs in-process, and --server points
the same commands at a remote instance.  Exit codes follow the service
contract: 0 pass, 1 fail, 2 inconclusive, 3 usage or parse error.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click

from .serialize import dumps


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service.app import app

    return TestClient(app)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        response = client.post(path, json=payload)
    if response.status_code != 200:
        click.echo(f"service error {response.status_code}: {response.text}", err=True)
        sys.exit(3)
    return response.json()


server_option = click.option("--server", default=None, metavar="URL",
                             help="remote service to talk to (default: in-process)")
seed_option = click.option("--seed", default=None, type=int, hidden=True,
                           help="reserved; runs are deterministic")
horizon_option = click.option("--horizon", default=None, type=int,
                              help="finite time window bound (default: PROTIME_HORIZON or 50)")


@click.group()
def main() -> None:
    """Typecheck, execute and certify timed message-passing protocols."""


@main.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@server_option
@seed_option
def check(path: Path, server: str | None, seed: int | None) -> None:
    """Typecheck every term in a protocol file."""
    data = _post(server, "/check", {"source": path.read_text(encoding="utf-8")})
    if data.get("error"):
        click.echo(f"parse error: {data['error']}")
    for rep in data.get("reports", []):
        if rep["ok"]:
            click.echo(f"{rep['name']}: ok ({rep['rule']}, revalidated={rep['revalidated']})")
        else:
            click.echo(f"{rep['name']}: FAIL [{rep['category']}] {rep['error']}")
    sys.exit(data["exit_code"])


@main.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@click.option("--name", default=None, help="term to run (default: first run directive)")
@click.option("--channel", default="a", help="providing channel for the root")
@click.option("--trace", "trace_out", default=None, type=click.Path(path_type=Path),
              help="write the executed trace (certificate + trajectory) here")
@horizon_option
@server_option
@seed_option
def run(path: Path, name: str | None, channel: str, trace_out: Path | None,
        horizon: int | None, server: str | None, seed: int | None) -> None:
    """Execute a closed program with the deterministic scheduler."""
    data = _post(server, "/run", {"source": path.read_text(encoding="utf-8"),
                                  "name": name, "channel": channel, "horizon": horizon})
    if data.get("error"):
        click.echo(data["error"])
        sys.exit(data["exit_code"])
    for t in sorted(data["ready"], key=int):
        click.echo(f"t={t}: offers {', '.join(data['ready'][t])}")
    for line in data["diagnosis"]:
        click.echo(f"note: {line}")
    if trace_out is not None:
        trace_out.write_text(dumps(data["trace"]), encoding="utf-8")
        click.echo(f"trace written to {trace_out}")
    sys.exit(data["exit_code"])


@main.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@click.option("--name", default=None, help="term to witness")
@click.option("-o", "--out", default=None, type=click.Path(path_type=Path),
              help="write the serialized trajectory certificate here")
@horizon_option
@server_option
@seed_option
def witness(path: Path, name: str | None, out: Path | None, horizon: int | None,
            server: str | None, seed: int | None) -> None:
    """Construct the compliance witness for a well-typed term."""
    data = _post(server, "/witness", {"source": path.read_text(encoding="utf-8"),
                                      "name": name, "horizon": horizon})
    if data.get("error"):
        click.echo(data["error"])
        sys.exit(data["exit_code"])
    for line in data["trail"]:
        click.echo(f"note: {line}")
    if data.get("certificate") is not None:
        text = dumps(data["certificate"])
        if out is not None:
            out.write_text(text, encoding="utf-8")
            click.echo(f"certificate written to {out}")
        else:
            click.echo(text, nl=False)
    sys.exit(data["exit_code"])


@main.command()
@click.argument("certfile", type=click.Path(exists=True, path_type=Path))
@server_option
@seed_option
def validate(certfile: Path, server: str | None, seed: int | None) -> None:
    """Re-check a serialized trajectory certificate from scratch."""
    cert = json.loads(certfile.read_text(encoding="utf-8"))
    data = _post(server, "/validate", {"certificate": cert})
    click.echo(data["detail"])
    sys.exit(data["exit_code"])


@main.command()
@click.argument("certfile", type=click.Path(exists=True, path_type=Path))
@click.option("--type", "type_text", required=True, help="session type to check against")
@click.option("--time", "at", default=0, type=int, help="membership instant")
@click.option("--mode", default="nostar", type=click.Choice(["star", "nostar"]),
              help="client (star) or provider (nostar) side")
@horizon_option
@server_option
@seed_option
def semcheck(certfile: Path, type_text: str, at: int, mode: str, horizon: int | None,
             server: str | None, seed: int | None) -> None:
    """Bounded semantic membership check of a certificate at a type."""
    cert = json.loads(certfile.read_text(encoding="utf-8"))
    data = _post(server, "/semcheck", {"certificate": cert, "type": type_text,
                                       "time": at, "mode": mode, "horizon": horizon})
    if data.get("error"):
        click.echo(data["error"])
        sys.exit(data["exit_code"])
    click.echo(data["verdict"])
    for line in data["trail"]:
        click.echo(f"  {line}")
    sys.exit(data["exit_code"])


@main.command()
@click.argument("query")
@server_option
@seed_option
def retype(query: str, server: str | None, seed: int | None) -> None:
    """Decide a retyping query: "A <| B @ T" (cut) or "A |> B @ T" (forward)."""
    data = _post(server, "/retype", {"query": query})
    if data.get("error"):
        click.echo(data["error"])
        sys.exit(data["exit_code"])
    click.echo("holds" if data["holds"] else f"fails: {data['reason']}")
    sys.exit(data["exit_code"])


@main.command()
@click.argument("name", required=False)
@server_option
def corpus(name: str | None, server: str | None) -> None:
    """List the bundled example protocols, or print one."""
    with _client(server) as client:
        if name is None:
            for entry in client.get("/corpus").json():
                click.echo(entry)
        else:
            click.echo(client.get(f"/corpus/{name}").json()["source"], nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host: str, port: int) -> None:
    """Run the certification service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
