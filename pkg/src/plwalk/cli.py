"""Command-line surface: reproducible experiment runs with file outputs.

Exit codes: 0 success, 2 invalid invocation, 3 resource limit exceeded,
4 linear-solver failure.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import click

from .dyadic import Dyadic
from .greenfn import (
    DominationFailed,
    SolverFailure,
    comparison_check,
    truncated_green,
)
from .plmaps import MembershipError, OutOfDomain
from .report import (
    ExperimentSpec,
    lognorm_floor,
    render_frequency_figure,
    render_green_figure,
    render_series_figure,
    render_window_figure,
    write_csv,
)
from .schreier import EndKind, ResourceLimit, ball, export_csv, export_dot
from .walk import (
    DEFAULT_SKELETON_GAIN,
    DEFAULT_TAIL_WINDOW,
    WalkConfig,
    classify_trajectory_end,
    drift_estimate,
    end_field_sample,
    sample_walk,
)
from .words import PRESETS, StepDistribution, preset


def _measure(value: str) -> StepDistribution:
    if value in PRESETS:
        return preset(value)
    path = Path(value[1:] if value.startswith("@") else value)
    if path.is_file():
        try:
            return StepDistribution.load(path.read_text())
        except (ValueError, ZeroDivisionError) as exc:
            raise click.UsageError(f"bad measure file {path}: {exc}")
    raise click.UsageError(f"measure {value!r} is neither a preset {sorted(PRESETS)} nor a file")


def _dyadic(value: str) -> Dyadic:
    try:
        return Dyadic.parse(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(f"bad dyadic {value!r}: {exc}")


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v]
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",") if v]
    except ValueError as exc:
        raise click.UsageError(str(exc))


measure_option = click.option("-m", "--measure", default="uniform-K", show_default=True,
                              help="Preset name or measure file path.")
out_option = click.option("-o", "--out", default=".", show_default=True,
                          type=click.Path(file_okay=False), help="Output directory.")
figures_option = click.option("--figures/--no-figures", default=True, show_default=True,
                              help="Render figures alongside the CSV output.")
seed_option = click.option("--seed", type=int, required=True, help="RNG seed (mandatory).")
threads_option = click.option("--threads", type=click.IntRange(1), default=1, show_default=True,
                              help="Worker cap; results do not depend on it.")


@click.group()
def main():
    """Random walks on the dyadic Schreier graph of a PL group."""


@main.command()
@click.option("--center", default="0", show_default=True)
@click.option("--radius", type=click.IntRange(0), default=3, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "dot", "both"]), default="both",
              show_default=True)
@click.option("--max-vertices", type=click.IntRange(1), default=200_000, show_default=True)
@out_option
def graph(center, radius, fmt, max_vertices, out):
    """Export a labeled ball of the Schreier graph."""
    c = _dyadic(center)
    spec = ExperimentSpec.build("graph", center=c, radius=radius)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    b = ball(c, radius, max_vertices=max_vertices)
    if fmt in ("csv", "both"):
        text = export_csv(b).rstrip("\n").splitlines()
        write_csv(outdir / "ball_edges.csv", text[0], [r.split(",") for r in text[1:]], spec)
    if fmt in ("dot", "both"):
        (outdir / "ball.dot").write_text(export_dot(b) + f"// spec_hash={spec.digest()}\n")
    click.echo(f"ball: {len(b.vertices)} vertices, {len(b.edges)} edges")


@main.command()
@measure_option
@click.option("--length", type=click.IntRange(0), default=1000, show_default=True)
@click.option("--walks", type=click.IntRange(1), default=1, show_default=True)
@click.option("--start", "starts", multiple=True, default=("0",), show_default=True)
@seed_option
@out_option
@figures_option
def simulate(measure, length, walks, starts, seed, out, figures):
    """Sample walks; write position/log-norm traces and a drift summary."""
    mu = _measure(measure)
    start_pts = tuple(_dyadic(s) for s in starts)
    spec = ExperimentSpec.build("simulate", measure=measure, length=length, walks=walks,
                                starts=",".join(str(s) for s in start_pts), seed=seed)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    floor = lognorm_floor(length, max(abs(s.exp) for s in start_pts))
    rows, summary, first_series = [], [], {}
    for w in range(walks):
        trace = sample_walk(WalkConfig(mu=mu, length=length, seed=seed, walk_index=w,
                                       tracked_starts=start_pts, record_positions=True))
        for st in trace.starts:
            for step, (pos, ln) in enumerate(zip(st.positions, st.lognorms)):
                rows.append((w, step, st.start, pos, int(ln) if ln > floor else floor))
            summary.append((w, st.start, st.final, int(st.lognorms[-1]) if st.lognorms[-1] > floor
                            else floor, f"{drift_estimate(st.lognorms):.6g}"))
            if w == 0:
                first_series[str(st.start)] = st.lognorms
    write_csv(outdir / "trace.csv", "walk_id,step,start,position,lognorm", rows, spec)
    write_csv(outdir / "drift_summary.csv",
              "walk_id,start,final_position,final_lognorm,drift_estimate", summary, spec)
    if figures:
        render_series_figure(outdir / "lognorm.png", first_series, floor)
    click.echo(f"simulate: {walks} walk(s) x {length} steps written to {outdir}")


@main.command()
@measure_option
@click.option("--walks", type=click.IntRange(1), default=100, show_default=True)
@click.option("--length", type=click.IntRange(1), default=100_000, show_default=True)
@click.option("--starts", default="0", show_default=True, help="Comma-separated start points.")
@click.option("--tail-window", type=click.IntRange(1), default=DEFAULT_TAIL_WINDOW,
              show_default=True)
@click.option("--skeleton-gain", type=click.IntRange(0), default=DEFAULT_SKELETON_GAIN,
              show_default=True)
@seed_option
@threads_option
@out_option
@figures_option
def ends(measure, walks, length, starts, tail_window, skeleton_gain, seed, threads, out, figures):
    """Classify limit ends of sampled walks; write the end field and the
    component frequencies."""
    mu = _measure(measure)
    start_pts = tuple(_dyadic(s) for s in starts.split(","))
    spec = ExperimentSpec.build("ends", measure=measure, walks=walks, length=length,
                                starts=",".join(str(s) for s in start_pts), seed=seed,
                                tail_window=tail_window, skeleton_gain=skeleton_gain)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    fields = end_field_sample(mu, start_pts, length, walks, seed,
                              tail_window=tail_window, skeleton_gain=skeleton_gain,
                              threads=threads)
    rows = []
    counts = {kind: 0 for kind in EndKind}
    for w, f in enumerate(fields):
        for s in start_pts:
            e = f[s]
            rows.append((w, s, e.kind.value, e.payload()))
            counts[e.kind] += 1
    total = walks * len(start_pts)
    freq = {kind.value: counts[kind] / total for kind in EndKind}
    write_csv(outdir / "end_field.csv", "walk_id,start,end_kind,end_payload", rows, spec)
    write_csv(outdir / "frequencies.csv", "end_kind,frequency",
              [(k, f"{v:.6g}") for k, v in freq.items()], spec)
    if figures:
        render_frequency_figure(outdir / "frequencies.png", freq)
    click.echo(" ".join(f"{k}={v:.3g}" for k, v in freq.items()))


@main.command()
@measure_option
@click.option("--length", type=click.IntRange(1), default=100_000, show_default=True)
@click.option("--walk-index", type=click.IntRange(0), default=0, show_default=True)
@click.option("--window-denominator", type=click.IntRange(1), default=8, show_default=True,
              help="Power of two; window points are multiples of its reciprocal.")
@click.option("--window-lo", default="-2", show_default=True)
@click.option("--window-hi", default="2", show_default=True)
@click.option("--checkpoint-every", type=click.IntRange(0), default=0, show_default=True,
              help="Also materialize the group element at these steps and cross-check.")
@seed_option
@out_option
@figures_option
def configs(measure, length, walk_index, window_denominator, window_lo, window_hi,
            checkpoint_every, seed, out, figures):
    """Track slope-jump configuration values over a window of points."""
    den = window_denominator
    if den & (den - 1):
        raise click.UsageError("window denominator must be a power of two")
    lo, hi = _dyadic(window_lo), _dyadic(window_hi)
    if not lo < hi:
        raise click.UsageError("need window-lo < window-hi")
    k = den.bit_length() - 1
    first = (lo.as_fraction() * den).__ceil__()
    last = (hi.as_fraction() * den).__floor__()
    window = tuple(Dyadic(n, k) for n in range(first, last + 1))
    mu = _measure(measure)
    spec = ExperimentSpec.build("configs", measure=measure, length=length,
                                walk_index=walk_index, seed=seed, den=den, lo=lo, hi=hi,
                                checkpoint_every=checkpoint_every or None)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    trace = sample_walk(WalkConfig(mu=mu, length=length, seed=seed, walk_index=walk_index,
                                   window=window, record_lognorms=False,
                                   checkpoint_every=checkpoint_every,
                                   retain_final_element=bool(checkpoint_every)))
    if checkpoint_every:
        cfg = trace.final_element.configuration()
        for rep in trace.window:
            if cfg[rep.point] != rep.final_value:
                raise RuntimeError(
                    f"incremental value {rep.final_value} at {rep.point} disagrees with the "
                    f"materialized group element ({cfg[rep.point]})"
                )
    write_csv(outdir / "stabilization.csv", "window_point,last_change_step,final_value",
              [(r.point, r.last_change, r.final_value) for r in trace.window], spec)
    if figures:
        render_window_figure(outdir / "stabilization.png", trace.window)
    changed = sum(1 for r in trace.window if r.last_change)
    click.echo(f"configs: {len(window)} window points, {changed} with changes, "
               f"max last-change {max((r.last_change for r in trace.window), default=0)}")


@main.command()
@measure_option
@click.option("--center", default="0", show_default=True)
@click.option("--radii", default="8,12,16", show_default=True)
@click.option("--lambdas", default="1.0", show_default=True)
@click.option("--compare", "compare_measure", default=None,
              help="Second measure; runs the domination check against it.")
@click.option("--epsilon", default="1/2", show_default=True,
              help="Exact domination constant for --compare.")
@click.option("--method", type=click.Choice(["solve", "iterate"]), default="solve",
              show_default=True)
@out_option
@figures_option
def green(measure, center, radii, lambdas, compare_measure, epsilon, method, out, figures):
    """Truncated lambda-Green values, optionally with the comparison check."""
    mu = _measure(measure)
    c = _dyadic(center)
    radii_l = _int_list(radii)
    lambdas_l = _float_list(lambdas)
    if not radii_l or not lambdas_l:
        raise click.UsageError("need at least one radius and one lambda")
    spec = ExperimentSpec.build("green", measure=measure, center=c, radii=radii,
                                lambdas=lambdas, compare=compare_measure,
                                epsilon=epsilon if compare_measure else None, method=method)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    if compare_measure:
        mu2 = _measure(compare_measure)
        try:
            eps = Fraction(epsilon)
        except (ValueError, ZeroDivisionError) as exc:
            raise click.UsageError(f"bad epsilon {epsilon!r}: {exc}")
        for r in radii_l:
            for lam in lambdas_l:
                rep = comparison_check(mu, mu2, eps, c, r, lam)
                rows.append((r, lam, f"{rep.green_base:.12g}", f"{rep.green_prime:.12g}",
                             f"{rep.bound:.12g}", rep.passed))
    else:
        for r in radii_l:
            for lam in lambdas_l:
                g = truncated_green(mu, c, r, lam, method=method)
                rows.append((r, lam, f"{g:.12g}", "", "", ""))
    write_csv(outdir / "green.csv", "radius,lambda,green_base,green_prime,bound,passed",
              rows, spec)
    if figures:
        render_green_figure(outdir / "green.png",
                            [(r[0], r[1], float(r[2])) for r in rows])
    click.echo("\n".join(",".join(str(c_) for c_ in row) for row in rows))


@main.command()
@measure_option
def predict(measure):
    """Exact drift parameters and the predicted end component."""
    from .words import predict_end_component

    mu = _measure(measure)
    d = mu.barycenters()
    case = predict_end_component(d)
    click.echo(f"alpha={d.alpha} beta={d.beta} case={case.value}")


def run():
    try:
        main.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(2)
    except (OutOfDomain, MembershipError, DominationFailed, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except ResourceLimit as exc:
        click.echo(f"resource limit: {exc}", err=True)
        sys.exit(3)
    except SolverFailure as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(4)


if __name__ == "__main__":
    run()
