"""Sweep doubling and Ramsey covers over random plane points; Ramsey rows show distortion / alpha and the envelope."""
import click
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from scipy.spatial.distance import pdist, squareform

from tree_cover_toolkit.application import CoverBuildService, VerificationFailedError
from tree_cover_toolkit.config import settings
from tree_cover_toolkit.domain import FiniteMetric, derive_rng, ramsey_alpha

console = Console()


def plane_metric(n: int, seed: int) -> FiniteMetric:
    points = derive_rng(seed, "calibration").uniform(0.0, 1.0, size=(n, 2))
    return FiniteMetric(squareform(pdist(points)))


@click.command()
@click.option("--points", "-n", default=40, show_default=True, help="Points per instance")
@click.option("--instances", default=3, show_default=True, help="Random instances per setting")
@click.option("--eps", "eps_values", multiple=True, type=float, default=(0.5, 0.25), show_default=True)
@click.option("--k", "k_values", multiple=True, type=int, default=(1, 2, 3), show_default=True)
def main(points: int, instances: int, eps_values: tuple[float, ...], k_values: tuple[int, ...]) -> None:
    settings.setup_logging()
    service = CoverBuildService(settings)

    table = Table(title=f"Calibration over {instances} x {points} plane points")
    table.add_column("Builder", style="cyan")
    table.add_column("Param", justify="right")
    table.add_column("Seed", justify="right")
    table.add_column("Trees", justify="right")
    table.add_column("Claimed", justify="right")
    table.add_column("Achieved", justify="right")
    table.add_column("Rescale", justify="right")
    table.add_column("Ratio", justify="right")
    table.add_column("Envelope", justify="right")

    for seed in range(instances):
        m = plane_metric(points, seed)
        for eps in eps_values:
            try:
                result = service.build_doubling(m, eps)
            except VerificationFailedError as e:
                console.print(f"[red]doubling eps={eps} seed={seed}: {escape(str(e))}[/red]")
                continue
            table.add_row(
                "doubling",
                f"eps={eps}",
                str(seed),
                str(result.cover.num_trees),
                f"{result.report.claimed_distortion:.3f}",
                f"{result.report.plain_distortion:.3f}",
                str(result.details.get("rescale", "-")),
                "-",
                "-",
            )
        try:
            ramsey = service.ramsey_sequence(m, list(k_values), seed)
        except VerificationFailedError as e:
            console.print(f"[red]ramsey seed={seed}: {escape(str(e))}[/red]")
            continue
        for k, result in ramsey.items():
            distortion = result.report.home_tree_distortion or 1.0
            table.add_row(
                "ramsey",
                f"k={k}",
                str(seed),
                str(result.cover.num_trees),
                f"{result.report.claimed_distortion:.3f}",
                f"{distortion:.3f}",
                "-",
                f"{distortion / ramsey_alpha(m.n, k):.3f}",
                f"{result.details.get('envelope', float('inf')):.3f}",
            )

    console.print(table)


if __name__ == "__main__":
    main()
