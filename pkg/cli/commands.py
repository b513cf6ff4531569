"""
Subcommands of the hjortic CLI.

Each handler takes the parsed arguments and the loaded HjorticConfig, writes
its CSV plot data under the output directory and returns the result block of
the JSON summary. main.run wraps that block with the subcommand name and a
config_echo and writes <out>/<subcommand>.json.
"""
import argparse
import itertools
import json
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hjortic_lib import HjorticConfig, write_json, write_rows
from inference import confid, modelsel, monitor
from inference.confid import ConfidenceDistribution
from inference.modelsel import FocusSpec
from liver import hsicopula
from liver.hsicopula import CopulaModel, FishPairs
from tsmodel import argauss
from tsmodel.argauss import ArxSpec
from tsmodel.frame import Frame, load_csv, write_csv
from tsmodel.tvar import fit_tvar_local

from .synth import SKREI_COPULA, SYNTH_MODELS, kola_winter, load_monthly, synthesize

Handler = Callable[[argparse.Namespace, HjorticConfig], Dict[str, Any]]
Z_95 = 1.959963984540054


# ---------------------------------------------------------------------------
# argument helpers

def parse_covariate(text: str) -> Tuple[str, int]:
    """'name' or 'name:lag' -> (name, lag)."""
    name, _, lag = text.partition(":")
    name = name.strip()
    if not name:
        raise ValueError(f"Malformed covariate '{text}'")
    try:
        k = int(lag) if lag.strip() else 0
    except ValueError:
        raise ValueError(f"Malformed covariate lag in '{text}'") from None
    return name, k


def parse_spec(descriptor: str, response: str) -> ArxSpec:
    """
    Model descriptor: tokens separated by ';', e.g. 'ar=2;trend;kola:1;length'.

    Tokens: 'ar=K' (AR order, default 0), 'trend', 'nointercept', and
    covariates as name[:lag].
    """
    ar_order = 0
    trend = False
    intercept = True
    regressors = []
    for token in (t.strip() for t in descriptor.split(";")):
        if not token:
            continue
        if token.startswith("ar="):
            try:
                ar_order = int(token[3:])
            except ValueError:
                raise ValueError(f"Malformed AR order in '{descriptor}'") from None
        elif token == "trend":
            trend = True
        elif token == "nointercept":
            intercept = False
        else:
            regressors.append(parse_covariate(token))
    return ArxSpec(response=response, regressors=tuple(regressors), include_intercept=intercept,
                   include_linear_trend=trend, ar_order=ar_order)


def spec_from_args(args: argparse.Namespace, config: HjorticConfig) -> ArxSpec:
    trend = config.include_trend if args.trend is None else args.trend
    ar_order = config.ar_order if args.ar_order is None else args.ar_order
    regressors = tuple(parse_covariate(c) for c in (args.covariate or []))
    return ArxSpec(response=args.response, regressors=regressors,
                   include_linear_trend=bool(trend), ar_order=int(ar_order))


def parse_focus(descriptor: str, frame: Frame, response: str, threshold: Optional[str] = None) -> FocusSpec:
    """
    Focus descriptor; with --threshold, 'thresh:h1,h2' lists only horizons and
    the level comes from the flag ('mean' is the observed response mean).
    """
    _, values = frame[response].observed()
    data_mean = float(values.mean()) if values.size else None
    if threshold is not None and descriptor.startswith("thresh:"):
        descriptor = f"thresh:{threshold},{descriptor[len('thresh:'):]}"
    return FocusSpec.parse(descriptor, data_mean=data_mean)


def nested_candidates(wide: ArxSpec, limit: int) -> List[ArxSpec]:
    """Every submodel of wide: regressor subsets, trend on/off, AR orders 0..k."""
    trends = (False, True) if wide.include_linear_trend else (False,)
    out = []
    for size in range(len(wide.regressors) + 1):
        for regs in itertools.combinations(wide.regressors, size):
            for trend in trends:
                for k in range(wide.ar_order + 1):
                    out.append(ArxSpec(response=wide.response, regressors=regs,
                                       include_intercept=wide.include_intercept,
                                       include_linear_trend=trend, ar_order=k))
    if len(out) > limit:
        raise ValueError(f"Wide model '{wide.label}' has {len(out)} submodels, above the limit of {limit}; "
                         f"pass --candidate explicitly")
    return out


def output_path(args: argparse.Namespace, config: HjorticConfig, filename: str) -> str:
    return os.path.join(args.out or config.output_dir, filename)


def load_future(args: argparse.Namespace) -> Optional[Frame]:
    return load_csv(args.future) if getattr(args, "future", None) else None


def _rows_out(args, config, filename: str, header: Sequence[str], rows) -> str:
    path = output_path(args, config, filename)
    write_rows(path, header, rows, digits=config.significant_digits)
    return path


# ---------------------------------------------------------------------------
# handlers

def cmd_fit(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    spec = spec_from_args(args, config)
    fit = argauss.fit(spec, frame)
    resid = argauss.residuals(fit, frame)
    _rows_out(args, config, "fit_residuals.csv", ["year", "residual"],
              zip(resid.years.tolist(), resid.values.tolist()))

    confidence = []
    for i, descriptor in enumerate(args.focus or [], start=1):
        focus = parse_focus(descriptor, frame, spec.response, args.threshold)
        cd = confid.cd_from_fit(fit, frame, focus, origin=args.origin, future=load_future(args))
        write_json(output_path(args, config, f"cd_{i}.json"), cd.to_dict(), digits=config.significant_digits)
        _rows_out(args, config, f"cd_{i}.csv", ["theta", "C", "cc"], cd.grid_rows())
        lo, hi = confid.interval(cd, config.cd_level)
        confidence.append({**cd.to_dict(), "level": config.cd_level, "interval": [lo, hi]})

    return {
        "label": spec.label,
        "fit": fit.to_dict(),
        "parameters": fit.summary(),
        "aic": modelsel.aic(fit),
        "bic": modelsel.bic(fit),
        "r_squared": fit.r_squared,
        "r_squared_adj": fit.r_squared_adj,
        "stationary": argauss.is_stationary(fit.rho),
        "confidence": confidence,
    }


def cmd_forecast(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    spec = spec_from_args(args, config)
    fit = argauss.fit(spec, frame)
    points = argauss.forecast(fit, frame, args.horizon, origin=args.origin, future=load_future(args))
    origin = args.origin if args.origin is not None else int(frame[spec.response].observed()[0][-1])
    rows = [(origin + j, p.mean, p.sd, p.mean - Z_95 * p.sd, p.mean + Z_95 * p.sd)
            for j, p in enumerate(points, start=1)]
    _rows_out(args, config, "forecast.csv", ["year", "mean", "sd", "lo95", "hi95"], rows)
    return {
        "label": spec.label,
        "origin": origin,
        "horizon": args.horizon,
        "forecast": [{"year": r[0], "mean": r[1], "sd": r[2]} for r in rows],
    }


def cmd_select(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    if args.candidate:
        candidates = [parse_spec(d, args.response) for d in args.candidate]
    else:
        base = spec_from_args(args, config)
        candidates = [ArxSpec(response=base.response, regressors=base.regressors,
                              include_linear_trend=base.include_linear_trend, ar_order=k)
                      for k in range(args.max_ar_order + 1)]
    rows = modelsel.score_table(candidates, frame)
    _rows_out(args, config, "select_scores.csv",
              ["label", "n_params", "n_effective", "loglik_max", "aic", "bic", "best_aic", "best_bic"],
              [(r.label, r.n_params, r.n_effective, r.loglik_max, r.aic, r.bic, r.best_aic, r.best_bic)
               for r in rows])
    result: Dict[str, Any] = {"table": [r.to_dict() for r in rows]}

    if args.race_start is not None:
        baseline = parse_spec(args.baseline, args.response) if args.baseline else candidates[0]
        race = modelsel.sequential_scores(candidates, frame, baseline, args.race_start)
        _rows_out(args, config, "select_race.csv", ["year"] + race.labels, race.to_rows())
        result["race"] = {"baseline": race.baseline, "labels": race.labels,
                          "first_year": int(race.years[0]), "last_year": int(race.years[-1])}
    return result


def cmd_fic(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    wide = parse_spec(args.wide, args.response) if args.wide else spec_from_args(args, config)
    if args.candidate:
        candidates = [parse_spec(d, args.response) for d in args.candidate]
    else:
        candidates = nested_candidates(wide, config.fic_max_candidates)
    future = load_future(args)
    reports = []
    for i, descriptor in enumerate(args.focus, start=1):
        focus = parse_focus(descriptor, frame, args.response, args.threshold)
        report = modelsel.fic(candidates, wide, frame, focus, origin=args.origin, future=future)
        _rows_out(args, config, f"fic_{i}.csv",
                  ["label", "n_params", "focus_estimate", "sd", "bias", "fic_score"],
                  [(e.label, e.n_params, e.focus_estimate, float(np.sqrt(e.variance)), e.bias, e.fic_score)
                   for e in report.entries])
        reports.append({**report.to_dict(), "best": report.best.label})
    return {"wide": wide.label, "n_candidates": len(candidates), "reports": reports}


def cmd_monitor(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    spec = spec_from_args(args, config)
    start = args.start_year if args.start_year is not None else monitor.first_monitor_year(spec, frame)
    window = args.naive_window or config.monitor_naive_window
    pred = monitor.one_step_predictions(spec, frame, start)
    m = monitor.monitoring_values(pred.standardized_errors)
    m[~pred.available] = np.nan
    _rows_out(args, config, "monitor.csv", ["year", "observed", "predicted", "pred_sd", "m"],
              zip(pred.years.tolist(), pred.observed.tolist(), pred.predicted.tolist(),
                  pred.pred_sd.tolist(), m.tolist()))
    model_mae, naive_mae = monitor.mean_abs_error_compare(spec, frame, start, window)
    return {
        "label": spec.label,
        "start_year": int(pred.years[0]),
        "n_predicted": int(pred.available.sum()),
        "mean_m": float(np.nanmean(m)) if np.any(pred.available) else float("nan"),
        "naive_window": window,
        "model_mae": model_mae,
        "naive_mae": naive_mae,
    }


def cmd_bridge(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    spec = spec_from_args(args, config)
    path = monitor.bridge(spec, frame, centre=not args.no_centre)
    _rows_out(args, config, "bridge.csv", ["year", "bridge", "loglik"],
              [(y, b, l) for (y, b), l in zip(path.to_rows(), path.loglik_path.tolist())])
    return {"label": spec.label, **path.to_summary()}


def _column(args: argparse.Namespace) -> str:
    return args.column or args.response


def cmd_adf(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    column = _column(args)
    max_lag = args.max_lag if args.max_lag is not None else config.adf_max_lag
    result = monitor.adf_test(frame[column], max_lag=max_lag)
    return {"column": column, **result.to_dict()}


def cmd_rollsd(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    column = _column(args)
    bandwidth = args.bandwidth or config.rolling_bandwidth
    sd = monitor.rolling_sd(frame[column], bandwidth=bandwidth)
    _rows_out(args, config, "rollsd.csv", ["year", column, "sd"],
              zip(sd.years.tolist(), frame[column].values.tolist(), sd.values.tolist()))
    return {"column": column, "bandwidth": bandwidth,
            "sd_range": [float(np.min(sd.values)), float(np.max(sd.values))]}


def cmd_reconstruct(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    spec = spec_from_args(args, config)
    fit = argauss.fit(spec, frame)
    rec = confid.reconstruct_missing(frame[spec.response], fit, frame)
    observed = frame[spec.response]
    filled = set(rec.filled_years)
    _rows_out(args, config, "reconstruct.csv", ["year", "observed", "value", "cond_sd", "filled"],
              [(int(y), observed.value_at(int(y)), v, s, int(y) in filled)
               for y, v, s in zip(rec.series.years, rec.series.values, rec.cond_sd.values)])
    return {"label": spec.label, "filled_years": rec.filled_years,
            "filled": [{"year": y, "value": rec.series.value_at(y), "cond_sd": rec.cond_sd.value_at(y)}
                       for y in rec.filled_years]}


def _read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def cmd_combine(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    cds: List[ConfidenceDistribution] = [ConfidenceDistribution.from_dict(_read_json(p)) for p in args.cd or []]
    label = args.label or (cds[0].focus_label if cds else "theta")
    level = args.level or config.cd_level
    for text in args.interval or []:
        try:
            lo, hi = (float(v) for v in text.split(","))
        except ValueError:
            raise ValueError(f"Malformed interval '{text}' (expected lo,hi)") from None
        cds.append(confid.normal_from_interval(label, lo, hi, level))
    combined = confid.combine(cds)
    _rows_out(args, config, "combine.csv", ["theta", "C", "cc"], combined.grid_rows())
    lo, hi = confid.interval(combined, level)
    return {
        "inputs": [cd.to_dict() for cd in cds],
        "combined": combined.to_dict(),
        "level": level,
        "interval": [lo, hi],
    }


def _copula_model(args: argparse.Namespace) -> CopulaModel:
    if args.params:
        values = [float(v) for v in args.params.split(",")]
        if len(values) != 5:
            raise ValueError(f"--params needs a1,b1,a2,b2,rho, got '{args.params}'")
        return CopulaModel(*values)
    if args.model:
        data = _read_json(args.model)
        if "result" in data:
            data = data["result"]["model"]
        return CopulaModel.from_dict(data)
    return SKREI_COPULA


def cmd_copula(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    n_fish = args.n_fish or config.copula_n_fish
    n_reps = args.n_reps or config.copula_n_reps
    seed = args.seed if args.seed is not None else config.seed

    if args.action == "fit":
        if not args.pairs:
            raise ValueError("copula fit needs --pairs")
        pairs = FishPairs.from_csv(args.pairs)
        model = hsicopula.fit_copula(pairs)
        return {"action": "fit", "n_pairs": len(pairs), "model": model.to_dict(),
                "margin_means": list(model.margin_means),
                "hsi_bulk": hsicopula.hsi_bulk(pairs), "hsi_ind": hsicopula.hsi_ind(pairs)}

    model = _copula_model(args)
    sim = hsicopula.simulate_copula(model, n_fish, n_reps, seed)
    _rows_out(args, config, f"copula_{args.action}.csv", ["replicate", "hsi_ind", "hsi_bulk"], sim.to_rows())
    result = {"action": args.action, "model": model.to_dict(), "simulation": sim.summary()}
    if args.action == "translate":
        line = hsicopula.translation_from_simulation(sim)
        result["translation"] = line.to_dict()
        if args.apply:
            result["applied"] = [{"hsi_ind": x, "hsi_bulk": float(b)}
                                 for x, b in zip(args.apply, hsicopula.apply_translation(line, args.apply))]
    return result


def cmd_tvar(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    frame = load_csv(args.input)
    column = _column(args)
    bandwidth = args.bandwidth or config.tvar_bandwidth
    fit = fit_tvar_local(frame[column], args.order, bandwidth=bandwidth)
    _rows_out(args, config, "tvar.csv", fit.header(), fit.to_rows())
    return {"column": column, **fit.summary()}


def cmd_kola_winter(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    monthly = load_monthly(args.input, args.year_column, args.month_column, args.value_column)
    winter = kola_winter(monthly, name=args.name)
    path = output_path(args, config, "kola_winter.csv")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    write_csv(Frame.of(winter), path, digits=config.significant_digits)
    return {"name": args.name, "first_year": winter.start_year, "last_year": winter.end_year,
            "n_complete": winter.observed_count, "path": path}


def cmd_synth(args: argparse.Namespace, config: HjorticConfig) -> Dict[str, Any]:
    seed = args.seed if args.seed is not None else config.seed
    table = synthesize(args.model, args.n, seed, args.start_year)
    path = args.output or output_path(args, config, f"synth_{args.model}.csv")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    table.to_csv(path, index=False, float_format=f"%.{config.significant_digits}g", na_rep="NA",
                 encoding="utf-8")
    logging.info(f"Wrote {path}")
    return {"model": args.model, "rows": int(len(table)), "columns": list(table.columns), "path": path}


# ---------------------------------------------------------------------------
# parser

def _add_input(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument("--input", required=required, help="Input CSV (year column plus series)")


def _add_spec(parser: argparse.ArgumentParser):
    _add_input(parser)
    parser.add_argument("--response", default="hsi", help="Response series name (default hsi)")
    parser.add_argument("--covariate", action="append", metavar="NAME:LAG",
                        help="Covariate with lag, repeatable (e.g. kola:1)")
    parser.add_argument("--ar-order", type=int, default=None, help="AR order 0..6 (default from config)")
    trend = parser.add_mutually_exclusive_group()
    trend.add_argument("--trend", dest="trend", action="store_true", default=None, help="Include a linear trend")
    trend.add_argument("--no-trend", dest="trend", action="store_false", default=None, help="No linear trend")


def _add_focus(parser: argparse.ArgumentParser, required: bool):
    parser.add_argument("--focus", action="append", required=required,
                        metavar="pred:h|slope:y1,y2[,raw]|thresh:level,h1,...",
                        help="Focus descriptor, repeatable")
    parser.add_argument("--threshold", default=None,
                        help="Threshold level for thresh foci, a number or 'mean'; "
                             "thresh descriptors then list horizons only")
    parser.add_argument("--origin", type=int, default=None, help="Forecast origin year")
    parser.add_argument("--future", default=None, help="CSV of future covariate values")


EXAMPLES: Dict[str, List[str]] = {
    "fit": ["fit --input data.csv --covariate kola:1 --ar-order 2 --focus pred:1"],
    "forecast": ["forecast --input data.csv --ar-order 2 --horizon 5"],
    "select": ["select --input data.csv --max-ar-order 4 --race-start 1950"],
    "fic": ["fic --input data.csv --covariate kola:1 --ar-order 2 --focus thresh:1,2,3 --threshold mean"],
    "monitor": ["monitor --input data.csv --ar-order 2 --start-year 1950"],
    "bridge": ["bridge --input data.csv --ar-order 2"],
    "adf": ["adf --input data.csv --column hsi --max-lag 2"],
    "rollsd": ["rollsd --input data.csv --bandwidth 5"],
    "reconstruct": ["reconstruct --input data.csv --covariate kola:1 --ar-order 1"],
    "combine": ["combine --interval 3.1,4.4 --interval 3.3,4.5 --label kola-winter"],
    "copula": ["copula fit --pairs pairs.csv", "copula translate --params 2.51,6.52,3.99,0.63,0.83 --apply 6"],
    "tvar": ["tvar --input data.csv --order 1 --bandwidth 0.15"],
    "kola-winter": ["kola-winter --input kola_monthly.csv --value-column temp"],
    "synth": ["synth --model ar2 --n 154 --seed 7 --out out"],
}


def _subcommand(subparsers, name: str, parents: Sequence[argparse.ArgumentParser],
                help: str) -> argparse.ArgumentParser:
    lines = "\n".join(f"  python main.py {line}" for line in EXAMPLES[name])
    return subparsers.add_parser(name, parents=list(parents), help=help, description=help,
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 epilog=f"Contoh:\n{lines}\n")


def register(subparsers, parents: Sequence[argparse.ArgumentParser] = ()) -> Dict[str, Handler]:
    """Add every subcommand to an argparse subparsers object; parents carry the shared flags."""
    parents = list(parents)
    p = _subcommand(subparsers, "fit", parents, "Fit an AR-with-covariates model")
    _add_spec(p)
    _add_focus(p, required=False)
    p.set_defaults(handler=cmd_fit)

    p = _subcommand(subparsers, "forecast", parents, "h-step forecasts with prediction sds")
    _add_spec(p)
    p.add_argument("--horizon", type=int, default=10, help="Forecast horizon in years (default 10)")
    p.add_argument("--origin", type=int, default=None, help="Forecast origin year")
    p.add_argument("--future", default=None, help="CSV of future covariate values")
    p.set_defaults(handler=cmd_forecast)

    p = _subcommand(subparsers, "select", parents, "AIC/BIC table and sequential score race")
    _add_spec(p)
    p.add_argument("--candidate", action="append", metavar="DESCRIPTOR",
                   help="Candidate model, e.g. 'ar=2;trend;kola:1' (default: AR ladder)")
    p.add_argument("--max-ar-order", type=int, default=4, help="Top of the default AR ladder")
    p.add_argument("--race-start", type=int, default=None, help="First year of the AIC race")
    p.add_argument("--baseline", default=None, help="Race baseline descriptor (default first candidate)")
    p.set_defaults(handler=cmd_select)

    p = _subcommand(subparsers, "fic", parents, "Focused information criterion over nested candidates")
    _add_spec(p)
    _add_focus(p, required=True)
    p.add_argument("--wide", default=None, metavar="DESCRIPTOR",
                   help="Wide model descriptor (default: the --covariate/--ar-order/--trend model)")
    p.add_argument("--candidate", action="append", metavar="DESCRIPTOR",
                   help="Candidate model, repeatable (default: every submodel of the wide model)")
    p.set_defaults(handler=cmd_fic)

    p = _subcommand(subparsers, "monitor", parents, "Prediction monitoring values and MAE comparison")
    _add_spec(p)
    p.add_argument("--start-year", type=int, default=None, help="First monitored year")
    p.add_argument("--naive-window", type=int, default=None, help="Years in the naive moving-average predictor")
    p.set_defaults(handler=cmd_monitor)

    p = _subcommand(subparsers, "bridge", parents, "Likelihood monitoring bridge")
    _add_spec(p)
    p.add_argument("--no-centre", action="store_true",
                   help="Use the raw log-likelihood maxima without small-sample centring")
    p.set_defaults(handler=cmd_bridge)

    p = _subcommand(subparsers, "adf", parents, "Augmented Dickey-Fuller unit-root test")
    _add_input(p)
    p.add_argument("--response", default="hsi", help="Response series name (default hsi)")
    p.add_argument("--column", default=None, help="Series to test (default the response)")
    p.add_argument("--max-lag", type=int, default=None, help="Largest augmentation lag (default from config)")
    p.set_defaults(handler=cmd_adf)

    p = _subcommand(subparsers, "rollsd", parents, "Gaussian-kernel rolling standard deviation")
    _add_input(p)
    p.add_argument("--response", default="hsi", help="Response series name (default hsi)")
    p.add_argument("--column", default=None, help="Series to use (default the response)")
    p.add_argument("--bandwidth", type=float, default=None, help="Kernel sd in years (>= 3)")
    p.set_defaults(handler=cmd_rollsd)

    p = _subcommand(subparsers, "reconstruct", parents, "Fill missing years by conditional means")
    _add_spec(p)
    p.set_defaults(handler=cmd_reconstruct)

    p = _subcommand(subparsers, "combine", parents, "Combine confidence distributions for one focus")
    p.add_argument("--cd", action="append", metavar="JSON", help="Confidence distribution file, repeatable")
    p.add_argument("--interval", action="append", metavar="LO,HI", help="Reported interval, repeatable")
    p.add_argument("--level", type=float, default=None, help="Level of --interval inputs and the output interval")
    p.add_argument("--label", default=None, help="Focus label for --interval inputs")
    p.set_defaults(handler=cmd_combine)

    p = _subcommand(subparsers, "copula", parents, "Gamma-copula liver/weight model")
    p.add_argument("action", choices=["fit", "simulate", "translate"], help="Fit pairs, simulate indices or translate an index")
    p.add_argument("--pairs", default=None, help="CSV with liver_kg and fish_kg columns (fit)")
    p.add_argument("--model", default=None, help="Copula model JSON (a copula fit summary works)")
    p.add_argument("--params", default=None, metavar="A1,B1,A2,B2,RHO", help="Copula parameters given directly")
    p.add_argument("--n-fish", type=int, default=None, help="Fish per simulated sample (default from config)")
    p.add_argument("--n-reps", type=int, default=None, help="Simulated samples (default from config)")
    p.add_argument("--apply", type=float, action="append", metavar="HSI_IND",
                   help="Per-fish index to translate to the bulk scale, repeatable")
    p.set_defaults(handler=cmd_copula)

    p = _subcommand(subparsers, "tvar", parents, "Local kernel fit of a time-varying AR model")
    _add_input(p)
    p.add_argument("--response", default="hsi", help="Response series name (default hsi)")
    p.add_argument("--column", default=None, help="Series to use (default the response)")
    p.add_argument("--order", type=int, default=1, help="tvAR order (default 1)")
    p.add_argument("--bandwidth", type=float, default=None, help="Kernel sd as a fraction of the span")
    p.set_defaults(handler=cmd_tvar)

    p = _subcommand(subparsers, "kola-winter", parents, "Monthly temperatures to October-March winter averages")
    _add_input(p)
    p.add_argument("--year-column", default="year", help="Year column (default year)")
    p.add_argument("--month-column", default="month", help="Month column 1..12 (default month)")
    p.add_argument("--value-column", default="temp", help="Temperature column (default temp)")
    p.add_argument("--name", default="kola", help="Name of the output series (default kola)")
    p.set_defaults(handler=cmd_kola_winter)

    p = _subcommand(subparsers, "synth", parents, "Generate synthetic data")
    p.add_argument("--model", required=True, choices=sorted(SYNTH_MODELS), help="Synthetic data set")
    p.add_argument("--n", type=int, default=None, help="Number of years (default per model)")
    p.add_argument("--start-year", type=int, default=None, help="Year label of the first row (default per model)")
    p.add_argument("--output", default=None, help="CSV path (default <out>/synth_<model>.csv)")
    p.set_defaults(handler=cmd_synth)

    return {name: parser.get_default("handler") for name, parser in subparsers.choices.items()}
