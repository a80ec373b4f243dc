import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click
from pydantic import ValidationError
from rich.console import Console
from rich.json import JSON
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from tree_cover_toolkit import __version__
from tree_cover_toolkit.application import (
    BuildCoverUseCase,
    GenerateInstanceUseCase,
    HardnessWitnessUseCase,
    MetricStatsUseCase,
    NetsUseCase,
    RunConfig,
    VerificationFailedError,
    VerifyCoverUseCase,
)
from tree_cover_toolkit.config import settings
from tree_cover_toolkit.domain import TreeCoverError

console = Console()

EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2


def _handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Map failures to exit codes: 1 for a failed verification gate, 2 for bad input."""
    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except VerificationFailedError as e:
            console.print(f"[red]❌ Verification failed: {escape(str(e))}[/red]")
            _print_verification(e.report.to_dict())
            sys.exit(EXIT_VERIFICATION_FAILED)
        except ValidationError as e:
            console.print("[red]❌ Error: invalid parameters[/red]")
            console.print(str(e), markup=False)
            sys.exit(EXIT_INPUT_ERROR)
        except TreeCoverError as e:
            console.print(f"[red]❌ Error: {escape(str(e))}[/red]")
            sys.exit(EXIT_INPUT_ERROR)
    return wrapper


def _input_options(command: Callable[..., Any]) -> Callable[..., Any]:
    command = click.option(
        "--format", "input_format", type=click.Choice(["auto", "metric", "graph"]), default="auto",
        show_default=True, help="Input file format",
    )(command)
    command = click.option(
        "-i", "--input", "input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
        required=True, help="Distance matrix or edge-list file",
    )(command)
    return command


def _print_verification(verification: dict) -> None:
    table = Table(title="📐 Verification")
    table.add_column("Measure", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("Points", str(verification["num_points"]))
    table.add_row("Trees", str(verification["num_trees"]))
    table.add_row("Plain distortion", f"{verification['plain_distortion']:.6f}")
    if verification.get("ramsey_distortion") is not None:
        table.add_row("Ramsey distortion", f"{verification['ramsey_distortion']:.6f}")
        table.add_row("Home-tree distortion", f"{verification['home_tree_distortion']:.6f}")
    table.add_row("Claimed", f"{verification['claimed_distortion']:.6f}")
    dominated = "[green]✅ yes[/green]" if verification["domination_ok"] else "[red]❌ no[/red]"
    table.add_row("Dominating", dominated)
    met = "[green]✅ yes[/green]" if verification["claimed_met"] else "[red]❌ no[/red]"
    table.add_row("Claim met", met)
    console.print(table)

    worst = verification.get("worst_pairs", [])
    if worst:
        pairs = Table(title="Worst pairs")
        pairs.add_column("x", justify="right")
        pairs.add_column("y", justify="right")
        pairs.add_column("Distortion", justify="right")
        pairs.add_column("Tree", justify="right", style="dim")
        for p in worst[:5]:
            pairs.add_row(str(p["x"]), str(p["y"]), f"{p['distortion']:.6f}", str(p["best_tree"]))
        console.print(pairs)


@click.group()
@click.version_option(version=__version__)
def cli() -> None:
    """Tree Cover Toolkit - build and verify (Ramsey) tree covers of finite metrics."""
    settings.setup_logging()


@cli.command()
@click.argument("kind", type=click.Choice(list(GenerateInstanceUseCase.KINDS)))
@click.option("--n", "n", type=int, required=True, help="Cycle length N")
@click.option("--k", "k", type=int, default=1, show_default=True, help="Composition / recursion depth")
@click.option("--beta", type=float, default=0.5, show_default=True, help="Composition factor (>= 1/2)")
@click.option("-o", "--out", "out_file", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--size-cap", type=int, default=None, help="Largest instance allowed")
@_handle_errors
def gen(kind: str, n: int, k: int, beta: float, out_file: Path, size_cap: Optional[int]) -> None:
    """Generate a cycle, composition or recursive-cycle instance."""
    run = RunConfig(
        command="gen", n=n, k=k, beta=beta, out_file=out_file,
        size_cap=size_cap or settings.size_cap,
    )
    result = GenerateInstanceUseCase().execute(kind, run)
    console.print(
        f"[green]✅ {kind}[/green] ({result['format']}, {result['points']} points) → {result['path']}"
    )


@cli.command()
@click.argument("algorithm", type=click.Choice(["doubling", "planar", "hpf", "ramsey"]))
@_input_options
@click.option("--eps", type=float, default=None, help="Distortion slack (doubling, planar)")
@click.option("--alpha", type=float, default=None, help="Padding parameter (hpf)")
@click.option("--k", "k", type=int, default=None, help="Number of trees (ramsey)")
@click.option("--c", "c", type=float, default=None, help="Trees-per-path constant (planar)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--threads", type=int, default=None, help="Worker threads (default: settings)")
@click.option("--size-cap", type=int, default=None)
@_handle_errors
def cover(
    algorithm: str,
    input_path: Path,
    input_format: str,
    eps: Optional[float],
    alpha: Optional[float],
    k: Optional[int],
    c: Optional[float],
    seed: int,
    out_dir: Optional[Path],
    threads: Optional[int],
    size_cap: Optional[int],
) -> None:
    """Build a tree cover and verify it before reporting success."""
    run = RunConfig(
        command="cover", algorithm=algorithm, input_path=input_path, input_format=input_format,
        eps=eps, alpha=alpha, k=k, c=c, seed=seed, out_dir=out_dir,
        threads=threads or settings.threads, size_cap=size_cap or settings.size_cap,
    )
    console.print(f"\n[bold blue]🌲 {algorithm} cover[/bold blue] [dim]({input_path})[/dim]\n")
    with console.status(f"[bold green]Building {algorithm} cover..."):
        result = BuildCoverUseCase().execute(run)
    report = result["report"]
    _print_verification(report["verification"])
    console.print(Panel(JSON(json.dumps(report["build"], sort_keys=True, default=str)), title="Build"))
    console.print(f"[dim]Cover written to {result['out_dir']}[/dim]\n")


@cli.command()
@click.option(
    "--cover", "cover_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True,
    help="Cover directory written by `cover`",
)
@_input_options
@click.option("--histogram", is_flag=True, help="Also write the per-pair distortion histogram CSV")
@click.option("--threads", type=int, default=None)
@_handle_errors
def verify(
    cover_dir: Path,
    input_path: Path,
    input_format: str,
    histogram: bool,
    threads: Optional[int],
) -> None:
    """Re-verify a saved cover directory against its input."""
    run = RunConfig(
        command="verify", input_path=input_path, input_format=input_format, out_dir=cover_dir,
        threads=threads or settings.threads, size_cap=settings.size_cap,
    )
    with console.status("[bold green]Verifying..."):
        result = VerifyCoverUseCase().execute(run, histogram=histogram)
    _print_verification(result["report"]["verification"])
    for name, path in result["paths"].items():
        console.print(f"[dim]{name}: {path}[/dim]")


@cli.command()
@_input_options
@_handle_errors
def stats(input_path: Path, input_format: str) -> None:
    """Aspect ratio and doubling constant of an input."""
    run = RunConfig(
        command="stats", input_path=input_path, input_format=input_format, size_cap=settings.size_cap
    )
    result = MetricStatsUseCase().execute(run)
    table = Table(title=f"📊 {input_path.name}")
    table.add_column("Statistic", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in result.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)


@cli.command()
@_input_options
@click.option("--eps", type=float, required=True, help="Internal eps in (0, 1/8)")
@click.option("-o", "--out", "out_file", type=click.Path(dir_okay=False, path_type=Path), default=None)
@_handle_errors
def nets(input_path: Path, input_format: str, eps: float, out_file: Optional[Path]) -> None:
    """Dump the net ladder and sub-net classes as JSON."""
    run = RunConfig(command="nets", input_path=input_path, input_format=input_format, eps=eps,
                    size_cap=settings.size_cap)
    text = json.dumps(NetsUseCase().execute(run), indent=2, sort_keys=True)
    if out_file is None:
        console.print_json(text)
    else:
        out_file.write_text(text + "\n", encoding="utf-8")
        console.print(f"[green]✅ Ladder written to {out_file}[/green]")


@cli.command()
@click.option("--n", "n", type=int, required=True, help="Cycle length N of Z_k(N)")
@click.option("--k", "k", type=int, required=True, help="Number of trees and composition depth")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--beta", type=float, default=0.5, show_default=True)
@click.option("--size-cap", type=int, default=None)
@_handle_errors
def witness(n: int, k: int, seed: int, beta: float, size_cap: Optional[int]) -> None:
    """Run the Ramsey builder on Z_k(N) and compare with N/3 - 1."""
    run = RunConfig(
        command="witness", n=n, k=k, seed=seed, beta=beta, size_cap=size_cap or settings.size_cap
    )
    with console.status("[bold green]Building Ramsey cover on the composition..."):
        result = HardnessWitnessUseCase().execute(run)
    data = result["witness"]
    color = "green" if data["consistent"] else "yellow"
    console.print(
        f"[{color}]Z_{k}({n}), {data['points']} points: ramsey distortion "
        f"{data['ramsey_distortion']:.4f} vs N/3 - 1 = {data['threshold']:.4f}[/{color}]"
    )


@cli.command()
def config() -> None:
    """Show resolved configuration."""
    table = Table(title="⚙️  Configuration")
    table.add_column("Setting", style="cyan")
    table.add_column("Value")
    for key, value in settings.model_dump(mode="json").items():
        table.add_row(key, "(default)" if value is None else str(value))
    console.print(table)


if __name__ == "__main__":
    cli()
