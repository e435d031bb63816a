"""Command line front end.

Exit codes: 0 on success, 2 for invalid input, 3 when an estimator is not
applicable to the data, 4 for numeric failures.
"""
from __future__ import annotations

import functools
import json
import os
import sys
from types import SimpleNamespace

import click
import numpy as np

from .errors import (
    EstimationError,
    IncompleteFieldError,
    DegenerateTestError,
    NotEstimableError,
    NumericError,
    UnreachableSiteError,
)
from .experiment import (
    ESTIMATOR_NAMES,
    ExperimentConfig,
    load_experiment_config,
    run_experiment,
)
from .kriging import ImputationDistances, impute_network, network_mean_from_field
from .metrics import compute_metrics, paired_t_test
from .mfd import build_mfd, fit_quadratic_with_ci
from .network import NETWORK_COLUMNS, load_detector_sites, load_network
from .sensing import (
    aggregate_to_links,
    edie_network_truth,
    load_coverage_plan,
    load_readings,
    sample_coverage,
    sample_coverage_counts,
    save_coverage_plan,
    write_readings,
)
from .scaling import (
    HierarchyPartition,
    UNIFORM_MODES,
    hierarchical_scaled_mean,
    uniform_scaled_mean,
)
from .synth import (
    DEFAULT_DIURNAL,
    SyntheticScenario,
    generate_scenario,
    load_scenario,
    save_scenario,
)
from .tableio import delimiter_for, iter_rows, parse_float, parse_int, parse_str, write_table
from .variogram import (
    MODEL_KINDS,
    VariogramModel,
    distance_bin_edges,
    empirical_variogram,
    fit_variogram,
)
from .network import site_distance_matrix

EXIT_VALIDATION = 2
EXIT_NOT_ESTIMABLE = 3
EXIT_NUMERIC = 4

ESTIMATES_HEADER = (
    "bin_index", "method", "variable", "value", "ttd_or_ttt", "hierarchy_count"
)


def _abort(exc, code):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def guarded(func):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except NotEstimableError as exc:
            _abort(exc, EXIT_NOT_ESTIMABLE)
        except NumericError as exc:
            _abort(exc, EXIT_NUMERIC)
        except UnreachableSiteError as exc:
            _abort(exc, EXIT_VALIDATION)
        except (EstimationError, ValueError) as exc:
            _abort(exc, EXIT_VALIDATION)

    return wrapper


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--output-dir", type=click.Path(file_okay=False), default=".",
    show_default=True, help="Directory for generated files.",
)
@click.option(
    "--format", "fmt", type=click.Choice(("csv", "tsv")), default="csv",
    show_default=True, help="Delimiter family of written tables.",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--bins", "n_bins", type=int, default=24, show_default=True,
    help="Number of time bins for synthetic data.",
)
@click.pass_context
def main(ctx, output_dir, fmt, seed, n_bins):
    """Estimate network-wide traffic flow, density and MFDs from sparse sensors."""
    ctx.obj = SimpleNamespace(
        output_dir=output_dir,
        fmt=fmt,
        delim=delimiter_for(fmt),
        seed=seed,
        n_bins=n_bins,
    )


def _out(obj, name):
    os.makedirs(obj.output_dir, exist_ok=True)
    return os.path.join(obj.output_dir, name)


def _table(obj, stem):
    return _out(obj, f"{stem}.{obj.fmt}")


@main.command()
@click.argument("network_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sites", "sites_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--readings", "readings_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@guarded
def ingest(obj, network_file, sites_file, readings_file):
    """Validate input tables and print a summary."""
    network = load_network(network_file, obj.delim)
    lengths = network.length_by_hierarchy()
    click.echo(
        f"network: {len(network.links)} links, {len(network.nodes)} nodes, "
        f"{network.total_length_km:.3f} km"
    )
    for h in sorted(network.hierarchy_set):
        click.echo(
            f"  hierarchy {h}: {len(network.links_of_hierarchy(h))} links, "
            f"{lengths[h]:.3f} km"
        )
    if sites_file:
        sites = load_detector_sites(sites_file, network=network, delimiter=obj.delim)
        per = {}
        for site in sites:
            h = network.link(site.link_id).hierarchy
            per[h] = per.get(h, 0) + 1
        breakdown = ", ".join(f"{h}: {per[h]}" for h in sorted(per))
        click.echo(f"sites: {len(sites)} detectors ({breakdown})")
    if readings_file:
        readings = load_readings(readings_file, obj.delim)
        detectors = {r.detector_id for r in readings}
        bins = {r.bin_index for r in readings}
        click.echo(
            f"readings: {len(readings)} rows, {len(detectors)} detectors, "
            f"{len(bins)} bins"
        )
    click.echo("ok")


def _parse_counts(text):
    counts = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        if not value:
            raise ValueError(f"counts entry '{part}' is not of the form hierarchy=count")
        counts[int(key.strip())] = int(value.strip())
    return counts


@main.command()
@click.argument("network_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("sites_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--fraction", type=float, help="Coverage fraction in (0, 1].")
@click.option("--counts", help='Explicit per-hierarchy counts, e.g. "1=12,2=22,3=8".')
@click.pass_obj
@guarded
def sample(obj, network_file, sites_file, fraction, counts):
    """Select a reproducible stratified detector subsample."""
    if (fraction is None) == (counts is None):
        raise click.UsageError("give exactly one of --fraction or --counts")
    network = load_network(network_file, obj.delim)
    sites = load_detector_sites(sites_file, network=network, delimiter=obj.delim)
    if counts is not None:
        plan, retained = sample_coverage_counts(
            sites, network, _parse_counts(counts), obj.seed
        )
    else:
        plan, retained = sample_coverage(sites, network, fraction, obj.seed)
    plan_path = save_coverage_plan(plan, _out(obj, "plan.json"))
    sites_path = write_table(
        _table(obj, "retained_sites"),
        ("detector_id", "link_id", "offset_fraction"),
        [(s.detector_id, s.link_id, s.offset_fraction) for s in retained],
        obj.delim,
    )
    summary = ", ".join(
        f"{h}: {c}" for h, c in sorted(plan.per_hierarchy_counts.items())
    )
    click.echo(f"retained {len(retained)} of {len(sites)} detectors ({summary})")
    click.echo(f"wrote {plan_path} and {sites_path}")


def _retained_from_plan(plan_file, sites):
    plan = load_coverage_plan(plan_file)
    by_id = {s.detector_id: s for s in sites}
    missing = [d for d in plan.retained_detectors if d not in by_id]
    if missing:
        raise EstimationError(
            f"plan references detectors missing from the site table: {missing[:5]}"
        )
    return [by_id[d] for d in plan.retained_detectors]


@main.command()
@click.argument("network_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("sites_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("readings_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--plan", "plan_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--fraction", type=float, help="Sample a fresh subset at this coverage.")
@click.option(
    "--method", type=click.Choice(("uniform", "hierarchical", "both")), default="both",
    show_default=True,
)
@click.option(
    "--uniform-mode", type=click.Choice(UNIFORM_MODES), default="exact", show_default=True,
)
@click.option("--duration-h", type=float, default=1.0, show_default=True)
@click.pass_obj
@guarded
def scale(obj, network_file, sites_file, readings_file, plan_file, fraction,
          method, uniform_mode, duration_h):
    """Scale equipped observations to per-bin network means."""
    network = load_network(network_file, obj.delim)
    sites = load_detector_sites(sites_file, network=network, delimiter=obj.delim)
    readings = load_readings(readings_file, obj.delim)
    if plan_file is not None and fraction is not None:
        raise click.UsageError("give at most one of --plan or --fraction")
    if plan_file is not None:
        retained = _retained_from_plan(plan_file, sites)
    elif fraction is not None:
        _, retained = sample_coverage(sites, network, fraction, obj.seed)
    else:
        retained = sites
    retained_ids = {s.detector_id for s in retained}
    observations = aggregate_to_links(
        [r for r in readings if r.detector_id in retained_ids], retained
    )
    by_bin = {}
    for obs in observations:
        by_bin.setdefault(obs.bin_index, []).append(obs)

    rows = []
    for b in sorted(by_bin):
        obs = by_bin[b]
        estimates = []
        if method in ("uniform", "both"):
            for variable in ("flow", "density"):
                estimates.append(
                    uniform_scaled_mean(
                        obs, network, variable, mode=uniform_mode, duration_h=duration_h
                    )
                )
        if method in ("hierarchical", "both"):
            partition = HierarchyPartition.from_network(
                network, [o.link_id for o in obs]
            )
            for variable in ("flow", "density"):
                estimates.append(
                    hierarchical_scaled_mean(obs, partition, variable, duration_h=duration_h)
                )
        rows.extend(
            (e.bin_index, e.method, e.variable, e.value, e.ttd_or_ttt, e.hierarchy_count)
            for e in estimates
        )
    path = write_table(_table(obj, "estimates"), ESTIMATES_HEADER, rows, obj.delim)
    click.echo(f"wrote {path} ({len(rows)} rows over {len(by_bin)} bins)")


def _known_for_bin(network, sites, observations, bin_index, variable):
    obs = [o for o in observations if o.bin_index == bin_index]
    if not obs:
        raise NotEstimableError(f"bin {bin_index}: no equipped observation")
    field = "flow_veh_per_h" if variable == "flow" else "density_veh_per_km"
    by_link = {o.link_id: float(getattr(o, field)) for o in obs}
    known = [s for s in sites if s.link_id in by_link]
    values = np.array([by_link[s.link_id] for s in known])
    return obs, known, values


@main.command()
@click.argument("network_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("sites_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("readings_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--bin-index", type=int, default=0, show_default=True)
@click.option("--variable", type=click.Choice(("flow", "density")), default="flow",
              show_default=True)
@click.option("--lag-bins", type=int, default=15, show_default=True)
@click.option("--min-pairs", type=int, default=5, show_default=True)
@click.option("--kind", "kinds", multiple=True, type=click.Choice(MODEL_KINDS),
              help="Candidate model shapes; default all three.")
@click.option("--fixed-range-km", type=float, help="Pin the range instead of fitting it.")
@click.pass_obj
@guarded
def variogram(obj, network_file, sites_file, readings_file, bin_index, variable,
              lag_bins, min_pairs, kinds, fixed_range_km):
    """Estimate and fit a variogram from one bin of equipped data."""
    network = load_network(network_file, obj.delim)
    sites = load_detector_sites(sites_file, network=network, delimiter=obj.delim)
    readings = load_readings(readings_file, obj.delim)
    observations = aggregate_to_links(readings, sites)
    _, known, values = _known_for_bin(network, sites, observations, bin_index, variable)
    distances = site_distance_matrix(network, known)
    edges = distance_bin_edges(distances, n_bins=lag_bins)
    empirical = empirical_variogram(values, distances, edges)
    model = fit_variogram(
        empirical, kinds=kinds or MODEL_KINDS, min_pairs=min_pairs,
        fixed_range_km=fixed_range_km,
    )

    emp_path = write_table(
        _table(obj, "variogram"),
        ("lag_low_km", "lag_high_km", "lag_center_km", "gamma", "pair_count"),
        [
            (
                empirical.bin_edges[i], empirical.bin_edges[i + 1],
                empirical.centers[i],
                empirical.gamma_hat[i] if empirical.pair_counts[i] > 0 else None,
                int(empirical.pair_counts[i]),
            )
            for i in range(empirical.pair_counts.size)
        ],
        obj.delim,
    )
    model_path = write_table(
        _table(obj, "variogram_model"),
        ("kind", "nugget", "sill", "range_km", "rss", "bin_index"),
        [(model.kind, model.nugget, model.sill, model.range_km, model.rss, bin_index)],
        obj.delim,
    )
    note = " (degenerate: no spatial structure)" if model.degenerate else ""
    click.echo(
        f"fitted {model.kind}: nugget {model.nugget:.4g}, sill {model.sill:.4g}, "
        f"range {model.range_km:.4g} km, rss {model.rss:.4g}{note}"
    )
    click.echo(f"wrote {emp_path} and {model_path}")


def _read_model_table(path, delimiter):
    rows = list(iter_rows(path, ("kind", "nugget", "sill", "range_km"), delimiter))
    if not rows:
        raise EstimationError(f"model table '{path}' has no rows")
    lineno, row = rows[0]
    return VariogramModel(
        kind=parse_str(row, "kind", lineno),
        nugget=parse_float(row, "nugget", lineno),
        sill=parse_float(row, "sill", lineno),
        range_km=parse_float(row, "range_km", lineno),
    )


@main.command()
@click.argument("network_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("sites_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("readings_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--bin-index", type=int, help="Impute one bin; default all bins.")
@click.option("--variable", type=click.Choice(("flow", "density")), default="flow",
              show_default=True)
@click.option("--model-file", type=click.Path(exists=True, dir_okay=False),
              help="Variogram model table; fitted per bin when omitted.")
@click.option("--max-neighbors", type=int, default=16, show_default=True)
@click.option("--min-neighbors", type=int, default=3, show_default=True)
@click.option("--lag-bins", type=int, default=15, show_default=True)
@click.option("--min-pairs", type=int, default=5, show_default=True)
@click.option("--min-length-coverage", type=float, default=0.95, show_default=True)
@click.pass_obj
@guarded
def impute(obj, network_file, sites_file, readings_file, bin_index, variable,
           model_file, max_neighbors, min_neighbors, lag_bins, min_pairs,
           min_length_coverage):
    """Krige every unobserved link and report per-bin network means."""
    network = load_network(network_file, obj.delim)
    sites = load_detector_sites(sites_file, network=network, delimiter=obj.delim)
    readings = load_readings(readings_file, obj.delim)
    observations = aggregate_to_links(readings, sites)
    bins = [bin_index] if bin_index is not None else sorted(
        {o.bin_index for o in observations}
    )
    model = _read_model_table(model_file, obj.delim) if model_file else None
    geometry = ImputationDistances.build(network, sites)

    rows = []
    failures = 0
    last_error = None
    for b in bins:
        obs = [o for o in observations if o.bin_index == b]
        field = impute_network(
            network, obs, sites,
            distances=geometry, model=model, variable=variable,
            lag_bins=lag_bins, min_pairs=min_pairs,
            max_neighbors=max_neighbors, min_neighbors=min_neighbors,
        )
        for link in network.links:
            rows.append(
                (link.id, b, variable, field.values.get(link.id),
                 field.provenance.get(link.id))
            )
        try:
            value, covered = network_mean_from_field(
                field, network, min_length_coverage
            )
            click.echo(
                f"bin {b}: network {variable} {value:.4g} "
                f"({covered:.1%} of length covered, {field.failed_count} links failed)"
            )
        except IncompleteFieldError as exc:
            failures += 1
            last_error = exc
            click.echo(f"bin {b}: not estimable ({exc})")
    path = write_table(
        _table(obj, "field"),
        ("link_id", "bin_index", "variable", "value", "provenance"),
        rows,
        obj.delim,
    )
    click.echo(f"wrote {path}")
    if failures == len(bins) and last_error is not None:
        raise last_error


def _read_estimates(path, delimiter, method=None):
    kept = []
    methods = set()
    for lineno, row in iter_rows(path, ESTIMATES_HEADER[:4], delimiter):
        row_method = parse_str(row, "method", lineno)
        if method is not None and row_method != method:
            continue
        methods.add(row_method)
        kept.append((lineno, row))
    if method is None and len(methods) > 1:
        raise EstimationError(
            f"table '{path}' mixes methods {sorted(methods)}; pick one with --method"
        )
    series = {}
    for lineno, row in kept:
        variable = parse_str(row, "variable", lineno)
        b = parse_int(row, "bin_index", lineno)
        key = (variable, b)
        if key in series:
            raise EstimationError(
                f"duplicate entry for variable '{variable}' bin {b} in '{path}'"
            )
        series[key] = parse_float(row, "value", lineno)
    flow = {b: v for (variable, b), v in series.items() if variable == "flow"}
    density = {b: v for (variable, b), v in series.items() if variable == "density"}
    return flow, density


@main.command()
@click.argument("estimates_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", help="Restrict to one method when the table mixes several.")
@click.option("--band-samples", type=int, default=50, show_default=True)
@click.pass_obj
@guarded
def mfd(obj, estimates_file, method, band_samples):
    """Build MFD points from an estimates table and fit a parabola."""
    flow, density = _read_estimates(estimates_file, obj.delim, method)
    points = build_mfd(flow, density)
    points_path = write_table(
        _table(obj, "mfd_points"),
        ("bin_index", "density_veh_per_km", "flow_veh_per_h", "speed_km_per_h"),
        [
            (p.bin_index, p.density_veh_per_km, p.flow_veh_per_h, p.speed_km_per_h)
            for p in points
        ],
        obj.delim,
    )
    k = [p.density_veh_per_km for p in points]
    q = [p.flow_veh_per_h for p in points]
    fit = fit_quadratic_with_ci(k, q)
    grid = np.linspace(min(k), max(k), band_samples)
    fitted, low, high = fit.band(grid)
    fit_path = write_table(
        _table(obj, "mfd_fit"),
        ("x", "y_fit", "ci_low", "ci_high"),
        list(zip(grid, fitted, low, high)),
        obj.delim,
    )
    c0, c1, c2 = fit.coefficients
    click.echo(
        f"fit: q = {c0:.4g} + {c1:.4g} k + {c2:.4g} k^2 over {fit.n_points} points"
    )
    click.echo(f"wrote {points_path} and {fit_path}")


@main.command()
@click.argument("estimated_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("actual_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--variable", type=click.Choice(("flow", "density")), default="flow",
              show_default=True)
@click.option("--method", help="Method filter for the estimated table.")
@click.option("--actual-method", help="Method filter for the reference table.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.pass_obj
@guarded
def evaluate(obj, estimated_file, actual_file, variable, method, actual_method, alpha):
    """Compare an estimated series against a reference series."""
    est_flow, est_density = _read_estimates(estimated_file, obj.delim, method)
    act_flow, act_density = _read_estimates(actual_file, obj.delim, actual_method)
    est = est_flow if variable == "flow" else est_density
    act = act_flow if variable == "flow" else act_density
    if set(est) != set(act):
        raise EstimationError(
            f"bin sets differ (estimated only: {sorted(set(est) - set(act))[:8]}, "
            f"reference only: {sorted(set(act) - set(est))[:8]})"
        )
    bins = sorted(est)
    est_series = [est[b] for b in bins]
    act_series = [act[b] for b in bins]
    report = compute_metrics(est_series, act_series)
    mape = f"{report.mape_percent:.4g}%" if report.mape_percent is not None else "n/a"
    r2 = f"{report.r2:.6g}" if report.r2 is not None else "n/a"
    click.echo(
        f"{variable}: rmse {report.rmse:.6g}, mae {report.mae:.6g}, "
        f"mape {mape}, r2 {r2} over {report.n_points} bins"
    )
    payload = {
        "variable": variable,
        "rmse": report.rmse,
        "mae": report.mae,
        "mape_percent": report.mape_percent,
        "r2": report.r2,
        "n_points": report.n_points,
        "mape_skipped": report.mape_skipped,
    }
    try:
        test = paired_t_test(est_series, act_series, alpha=alpha)
        verdict = "differ" if test.reject else "do not differ"
        click.echo(
            f"paired test: t {test.t_statistic:.4f}, df {test.degrees_of_freedom}, "
            f"p {test.p_value:.4g}; series {verdict} at alpha {alpha:g}"
        )
        payload["t_test"] = {
            "t_statistic": test.t_statistic,
            "degrees_of_freedom": test.degrees_of_freedom,
            "p_value": test.p_value,
            "reject": test.reject,
        }
    except DegenerateTestError as exc:
        click.echo(f"paired test undefined: {exc}")
        payload["t_test"] = None
    path = _out(obj, "evaluation.json")
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    click.echo(f"wrote {path}")


def _diurnal_profile(n_bins):
    if n_bins == len(DEFAULT_DIURNAL):
        return DEFAULT_DIURNAL
    base = np.arange(len(DEFAULT_DIURNAL), dtype=float)
    target = np.linspace(0, len(DEFAULT_DIURNAL) - 1, n_bins)
    return tuple(float(v) for v in np.interp(target, base, DEFAULT_DIURNAL))


@main.command()
@click.option("--scenario", "scenario_file", type=click.Path(exists=True, dir_okay=False),
              help="Scenario description; defaults to the built-in three-class grid.")
@click.pass_obj
@guarded
def synth(obj, scenario_file):
    """Generate a synthetic network with full detector coverage."""
    if scenario_file:
        scenario = load_scenario(scenario_file)
    else:
        scenario = SyntheticScenario(
            seed=obj.seed, diurnal=_diurnal_profile(obj.n_bins)
        )
    data = generate_scenario(scenario)
    network_path = write_table(
        _table(obj, "network"),
        NETWORK_COLUMNS,
        [
            (l.id, l.from_node, l.to_node, l.length_km, l.hierarchy)
            for l in data.network.links
        ],
        obj.delim,
    )
    sites_path = write_table(
        _table(obj, "sites"),
        ("detector_id", "link_id", "offset_fraction"),
        [(s.detector_id, s.link_id, s.offset_fraction) for s in data.sites],
        obj.delim,
    )
    readings_path = write_readings(_table(obj, "readings"), data.readings, obj.delim)
    truth_rows = []
    for b in sorted({o.bin_index for o in data.observations}):
        q, k = edie_network_truth(data.observations, data.network, b)
        truth_rows.append((b, "edie", "flow", q, q * data.network.total_length_km, 0))
        truth_rows.append((b, "edie", "density", k, k * data.network.total_length_km, 0))
    truth_path = write_table(
        _table(obj, "truth"), ESTIMATES_HEADER, truth_rows, obj.delim
    )
    save_scenario(scenario, _out(obj, "scenario.json"))
    click.echo(
        f"generated {len(data.network.links)} links x {len(data.bins)} bins "
        f"(seed {scenario.seed}, {data.clamped_count} draws clamped at zero)"
    )
    click.echo(
        f"wrote {network_path}, {sites_path}, {readings_path}, {truth_path}"
    )


@main.command()
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="Experiment description; defaults to a small synthetic grid.")
@click.option("--coverage", "coverages", multiple=True, type=float,
              help="Coverage fractions for the default grid.")
@click.pass_obj
@guarded
def experiment(obj, config_file, coverages):
    """Run a coverage-seed-estimator grid and write every table."""
    if config_file:
        config = load_experiment_config(config_file)
    else:
        config = ExperimentConfig(
            coverages=tuple(coverages) or (0.3, 0.2, 0.1),
            seeds=(obj.seed,),
            estimators=ESTIMATOR_NAMES,
            scenario=SyntheticScenario(
                seed=obj.seed, diurnal=_diurnal_profile(obj.n_bins)
            ),
        )
    os.makedirs(obj.output_dir, exist_ok=True)
    result = run_experiment(config, output_dir=obj.output_dir, fmt=obj.fmt)
    for cell in result.cells:
        note = f" ({cell.message})" if cell.message else ""
        click.echo(f"{cell.name}: {cell.status}{note}")
    click.echo(f"wrote {os.path.join(os.fspath(obj.output_dir), 'manifest.json')}")


if __name__ == "__main__":
    main()
