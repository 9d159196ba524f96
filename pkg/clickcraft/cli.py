import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar, cast

import attr
import click
import numpy as np

from . import __version__, _log
from .convert import (
    ALL_CLICKS,
    ClickPairs,
    Clicks,
    format_number,
    format_percent,
    parse_click_pairs,
    parse_clicks,
    parse_grid,
    parse_int_list,
    parse_state,
)
from .fock import (
    DensityMatrix,
    TwoModeDensityMatrix,
    make_state,
    photon_distribution,
    suggest_cutoff,
)
from .pfunc import (
    MAX_CANCELLATION,
    GridSpec,
    PhaseSpaceMixture,
    cancellation,
    evaluate_grid,
    from_state_spec,
    moment,
)
from .povm import binomial_parameter, click_statistics, operator_norm_distance
from .processes import (
    AdditionSpec,
    AmplifySpec,
    SubtractionSpec,
    add,
    amplify,
    herald,
    herald_tmsv_distribution,
    normalize,
    oracle_add,
    oracle_subtract,
    probability_addition_displaced_thermal,
    probability_subtraction_displaced_thermal,
    probability_table,
    subtract,
)
from .report import (
    FORMATS,
    Format,
    write_grid,
    write_manifest,
    write_matrix,
    write_table,
)
from .types import (
    BeamSplitterConfig,
    ClickcraftError,
    ConfigError,
    DetectorConfig,
    Parameters,
    ProcessOutcome,
    RunConfig,
    SqueezerConfig,
    StateSpec,
    ValidationError,
)

CONFIG_SCHEMA = 1

handler = logging.StreamHandler()
handler.setFormatter(logging.Formatter("%(levelname)s - %(message)s"))
_log.addHandler(handler)

F = TypeVar("F", bound=Callable[..., Any])


def print_version(ctx: click.Context, param: str, value: str) -> None:
    if not value or ctx.resilient_parsing:
        return
    click.echo(f"Version {__version__}")
    ctx.exit()


def guarded(func: F) -> F:
    """Report library errors on stderr and exit with their code."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except ClickcraftError as e:
            _log.debug("run aborted", exc_info=True)
            click.echo(f"ERROR - {e}", err=True)
            sys.exit(e.exit_code)

    return cast(F, wrapper)


def load_config(filename: str, protocol: str) -> Dict[str, Any]:
    """Read a JSON run description and flatten it into option defaults."""
    try:
        with open(filename) as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {filename}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{filename} is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise ConfigError(f"{filename} must hold a JSON object")
    if document.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(
            f"{filename} has schema {document.get('schema')!r}, "
            f"expected {CONFIG_SCHEMA}"
        )
    if document.get("protocol", protocol) != protocol:
        raise ConfigError(
            f"{filename} describes a {document['protocol']} run, not {protocol}"
        )

    defaults: Dict[str, Any] = {}
    for key, value in document.items():
        if key in ("schema", "protocol"):
            continue
        if key == "input":
            defaults["state"] = value
        elif key in ("clicks", "grid", "cutoff"):
            defaults[key] = value
        elif key in ("detector", "optics"):
            defaults.update(_section(filename, key, value))
        elif key == "detectors":
            if not isinstance(value, list) or len(value) != 2:
                raise ConfigError(f"{filename}: detectors must list two detectors")
            for i, section in enumerate(value, start=1):
                detector = _section(filename, key, section)
                defaults.update({f"{name}{i}": v for name, v in detector.items()})
        elif key == "output":
            output = _section(filename, key, value)
            renamed = {"dir": "out", "format": "fmt", "manifest": "manifest"}
            for name, v in output.items():
                if name not in renamed:
                    raise ConfigError(f"{filename}: unknown output setting {name!r}")
                defaults[renamed[name]] = v
        else:
            raise ConfigError(f"{filename}: unknown setting {key!r}")
    return defaults


def _section(filename: str, key: str, value: Any) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"{filename}: {key} must be a JSON object")
    return dict(value)


def config_option(protocol: str) -> Callable[[F], F]:
    def configure(ctx: click.Context, param: click.Parameter, filename: str) -> None:
        """Use a config file for the parameters"""
        if filename is None:
            return
        try:
            defaults = load_config(filename, protocol)
            names = {p.name for p in ctx.command.params}
            foreign = sorted(set(defaults) - names)
            if foreign:
                raise ConfigError(
                    f"{filename}: {protocol} has no option for {', '.join(foreign)}"
                )
            ctx.default_map = defaults
        except ConfigError as e:
            click.echo(f"ERROR - {e}", err=True)
            ctx.exit(e.exit_code)

    return click.option(
        "--config",
        type=click.Path(dir_okay=False),
        default=None,
        callback=configure,
        is_eager=True,
        expose_value=False,
        help="Read option defaults from the specified JSON file",
    )


class _Parsed(click.ParamType):
    def __init__(
        self, name: str, parse: Callable[[Any], Any], kind: Optional[type] = None
    ) -> None:
        self.name = name
        self.parse = parse
        self.kind = kind

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Any:
        if self.kind is not None and isinstance(value, self.kind):
            return value
        try:
            return self.parse(value)
        except click.BadParameter as e:
            self.fail(e.message, param, ctx)
        except ValidationError as e:
            self.fail(str(e), param, ctx)


STATE = _Parsed("state", parse_state, StateSpec)
GRID = _Parsed("grid", parse_grid, GridSpec)
CLICKS = _Parsed("clicks", parse_clicks)
CLICK_PAIRS = _Parsed("pairs", parse_click_pairs)
INT_LIST = _Parsed("integers", parse_int_list)


def table_options(func: F) -> F:
    func = click.option(
        "--manifest",
        is_flag=True,
        default=False,
        help="Also write the resolved parameters to manifest.json",
    )(func)
    func = click.option(
        "--format",
        "fmt",
        type=click.Choice(FORMATS),
        default="csv",
        help="Format of the result files",
        show_default=True,
    )(func)
    func = click.option(
        "--out",
        type=click.Path(file_okay=False),
        default=".",
        help="Directory receiving the result files",
        show_default=True,
    )(func)
    return func


def output_options(func: F) -> F:
    func = click.option(
        "--grid",
        type=GRID,
        default=None,
        help="Evaluate output P functions on re0,re1,im0,im1,nre,nim",
    )(func)
    return table_options(func)


def detector_options(func: F) -> F:
    func = click.option(
        "--eta",
        type=click.FloatRange(0.0, 1.0),
        default=1.0,
        help="Quantum efficiency of the detector",
        show_default=True,
    )(func)
    func = click.option(
        "--N",
        "N",
        type=click.IntRange(min=1),
        default=4,
        help="Number of on/off detectors the signal is split over",
        show_default=True,
    )(func)
    return func


def stage_detector_options(stage: int, name: str) -> Callable[[F], F]:
    def decorator(func: F) -> F:
        func = click.option(
            f"--eta{stage}",
            f"eta{stage}",
            type=click.FloatRange(0.0, 1.0),
            default=0.5,
            help=f"Quantum efficiency of the {name} detectors",
            show_default=True,
        )(func)
        func = click.option(
            f"--N{stage}",
            f"N{stage}",
            type=click.IntRange(min=1),
            default=4,
            help=f"Number of on/off detectors of the {name} stage",
            show_default=True,
        )(func)
        return func

    return decorator


def _run_config(ctx: click.Context, protocol: str) -> RunConfig:
    params: Parameters = ctx.obj
    out = Path(ctx.params["out"])
    out.mkdir(parents=True, exist_ok=True)
    parameters = {
        name: attr.asdict(v) if attr.has(type(v)) else v
        for name, v in ctx.params.items()
    }
    run = RunConfig(protocol, out, ctx.params["fmt"], params.threads, parameters)
    if ctx.params.get("manifest"):
        write_manifest(out, protocol, {**parameters, "threads": params.threads})
    return run


def _click_numbers(clicks: Clicks, det: DetectorConfig) -> List[int]:
    ks = list(range(det.N + 1)) if clicks == ALL_CLICKS else list(clicks)
    for k in ks:
        det.check_clicks(k)
    return ks


def _squeezer(mu: Optional[float], xi: Optional[float]) -> SqueezerConfig:
    if xi is not None:
        return SqueezerConfig(xi)
    if mu is not None:
        return SqueezerConfig.from_mu(mu)
    raise ValidationError("the squeezer needs either --mu or --xi")


def _resolved(name: str, outcome: ProcessOutcome) -> bool:
    """Whether the normalized P function of `outcome` keeps its accuracy."""
    if outcome.probability <= 0.0:
        _log.warning("%(name)s has zero probability", {"name": name})
        return False
    P = cast(PhaseSpaceMixture, outcome.state)
    ratio = cancellation(P, outcome.probability)
    if ratio > MAX_CANCELLATION:
        _log.warning(
            "%(name)s: the terms of its P function outweigh the probability "
            "%(p)s by %(ratio).1e, skipping its moments and grid",
            {"name": name, "p": outcome.probability, "ratio": ratio},
        )
        return False
    return True


def _write_outcome_grid(
    run: RunConfig, name: str, outcome: ProcessOutcome, grid: Optional[GridSpec]
) -> None:
    if grid is None or not _resolved(name, outcome):
        return
    P = cast(PhaseSpaceMixture, normalize(outcome))
    values = evaluate_grid(P, grid, run.threads)
    write_grid(run.out / name, grid, values, P, cast(Format, run.fmt))


@click.group()
@click.option(
    "-v",
    "--verbose",
    "verbose",
    count=True,
    default=0,
    help="Increase verbosity -v (info)/-vv (debug)",
    show_default=False,
)
@click.option(
    "--version", is_flag=True, callback=print_version, expose_value=False, is_eager=True
)
@click.option(
    "--threads",
    "threads",
    type=click.IntRange(min=1),
    default=1,
    envvar="CLICKCRAFT_THREADS",
    help="Worker threads for probability tables and grids",
    show_default=True,
)
@click.pass_context
def main(ctx: click.Context, verbose: int, threads: int) -> None:
    """Conditional quantum state engineering with arrays of on/off detectors."""
    if verbose >= 2:
        _log.setLevel(logging.DEBUG)
    elif verbose == 1:
        _log.setLevel(logging.INFO)
    else:
        _log.setLevel(logging.WARNING)
    ctx.obj = Parameters(threads, verbose)


@main.command(name="herald")
@config_option("herald")
@click.option(
    "--input",
    "state",
    type=STATE,
    default="phase_diffused_tmsv:omega=0.25",
    help="Two-mode source, kind:key=value,...",
    show_default=True,
)
@detector_options
@click.option(
    "--clicks",
    type=CLICKS,
    default=ALL_CLICKS,
    help="Click numbers to herald on",
    show_default=True,
)
@click.option(
    "--cutoff",
    type=click.IntRange(min=1),
    default=None,
    help="Also condition a truncated Fock state with this many levels per mode",
)
@click.option(
    "--dump-state",
    is_flag=True,
    default=False,
    help="Write the conditioned Fock state, requires --cutoff",
)
@table_options
@click.pass_context
@guarded
def herald_cmd(
    ctx: click.Context,
    state: StateSpec,
    N: int,
    eta: float,
    clicks: Clicks,
    cutoff: Optional[int],
    dump_state: bool,
    out: str,
    fmt: str,
    manifest: bool,
) -> None:
    """Herald one mode of a phase-diffused two-mode squeezed vacuum.

    For every click number the photon number distribution of the heralded
    mode is written, together with the click probability and the fidelity
    with the Fock state of as many photons as clicks.
    """
    if state.kind != "phase_diffused_tmsv":
        raise ValidationError(
            f"heralding needs a phase_diffused_tmsv source, got {state.kind}"
        )
    if dump_state and cutoff is None:
        raise ValidationError("--dump-state needs --cutoff")
    run = _run_config(ctx, "herald")
    det = DetectorConfig(N, eta)
    ks = _click_numbers(clicks, det)

    fock_state = None
    if cutoff is not None:
        fock_state = cast(TwoModeDensityMatrix, make_state(state, cutoff))

    header = ["k", "probability", "percent", "fock_fidelity"]
    if fock_state is not None:
        header.append("oracle_probability")
    rows: List[List[Any]] = []
    distribution: List[List[Any]] = []
    for k in ks:
        heralded = herald_tmsv_distribution(state.omega, det, k)
        fidelity = heralded.normalized[k] if k < len(heralded.normalized) else 0.0
        row = [k, heralded.probability, format_percent(heralded.probability), fidelity]
        if fock_state is not None:
            outcome = herald(fock_state, det, k)
            row.append(outcome.probability)
            if dump_state:
                entries = cast(DensityMatrix, outcome.state).entries
                write_matrix(run.out / f"herald_state_k{k}", entries)
        rows.append(row)
        distribution.extend(
            [k, n, p, q]
            for n, (p, q) in enumerate(zip(heralded.unnormalized, heralded.normalized))
        )
    write_table(run.out / "herald_probabilities", header, rows, cast(Format, run.fmt))
    write_table(
        run.out / "herald_distribution",
        ["k", "n", "probability", "normalized"],
        distribution,
        cast(Format, run.fmt),
    )


def _single_stage(
    ctx: click.Context,
    protocol: str,
    state: StateSpec,
    det: DetectorConfig,
    clicks: Clicks,
    cutoff: Optional[int],
    grid: Optional[GridSpec],
    stage: Callable[[int], Tuple[Any, Callable[..., ProcessOutcome]]],
) -> None:
    run = _run_config(ctx, protocol)
    P_in = from_state_spec(state)
    fock_state = None
    if cutoff is not None:
        fock_state = cast(DensityMatrix, make_state(state, cutoff))

    header = ["k", "probability", "percent", "closed_form", "mean_photon_number"]
    if fock_state is not None:
        header.append("oracle_probability")
    rows: List[List[Any]] = []
    for k in _click_numbers(clicks, det):
        spec, closed_form = stage(k)
        outcome = subtract(P_in, spec) if protocol == "subtract" else add(P_in, spec)
        name = f"{protocol}_grid_k{k}"
        resolved = _resolved(name, outcome)
        mean = None
        if resolved:
            normalized = cast(PhaseSpaceMixture, normalize(outcome))
            mean = moment(normalized, 1, 1).real
        row = [
            k,
            outcome.probability,
            format_percent(outcome.probability),
            closed_form(state.alpha, state.nbar, spec),
            mean,
        ]
        if fock_state is not None:
            oracle = oracle_subtract if protocol == "subtract" else oracle_add
            row.append(oracle(fock_state, spec).probability)
        rows.append(row)
        if resolved:
            _write_outcome_grid(run, name, outcome, grid)
    write_table(
        run.out / f"{protocol}_probabilities", header, rows, cast(Format, run.fmt)
    )


@main.command(name="subtract")
@config_option("subtract")
@click.option(
    "--input",
    "state",
    type=STATE,
    default="vacuum",
    help="Input state, kind:key=value,...",
    show_default=True,
)
@detector_options
@click.option(
    "--t",
    "t",
    type=float,
    default=0.9,
    help="Beam splitter transmissivity amplitude",
    show_default=True,
)
@click.option(
    "--clicks",
    type=CLICKS,
    default=ALL_CLICKS,
    help="Click numbers to condition on",
    show_default=True,
)
@click.option(
    "--cutoff",
    type=click.IntRange(min=1),
    default=None,
    help="Cross-check probabilities in a Fock space with this many levels",
)
@output_options
@click.pass_context
@guarded
def subtract_cmd(
    ctx: click.Context,
    state: StateSpec,
    N: int,
    eta: float,
    t: float,
    clicks: Clicks,
    cutoff: Optional[int],
    out: str,
    fmt: str,
    grid: Optional[GridSpec],
    manifest: bool,
) -> None:
    """Multi-photon subtraction: tap the input on a beam splitter and count
    clicks on the reflected beam."""
    det = DetectorConfig(N, eta)
    bs = BeamSplitterConfig(t)
    _single_stage(
        ctx,
        "subtract",
        state,
        det,
        clicks,
        cutoff,
        grid,
        lambda k: (
            SubtractionSpec(bs, det, k),
            probability_subtraction_displaced_thermal,
        ),
    )


@main.command(name="add")
@config_option("add")
@click.option(
    "--input",
    "state",
    type=STATE,
    default="vacuum",
    help="Input state, kind:key=value,...",
    show_default=True,
)
@detector_options
@click.option("--mu", type=float, default=None, help="Squeezer gain cosh(xi)")
@click.option("--xi", type=float, default=None, help="Squeezing parameter")
@click.option(
    "--clicks",
    type=CLICKS,
    default=ALL_CLICKS,
    help="Click numbers to condition on",
    show_default=True,
)
@click.option(
    "--cutoff",
    type=click.IntRange(min=1),
    default=None,
    help="Cross-check probabilities in a Fock space with this many levels",
)
@output_options
@click.pass_context
@guarded
def add_cmd(
    ctx: click.Context,
    state: StateSpec,
    N: int,
    eta: float,
    mu: Optional[float],
    xi: Optional[float],
    clicks: Clicks,
    cutoff: Optional[int],
    out: str,
    fmt: str,
    grid: Optional[GridSpec],
    manifest: bool,
) -> None:
    """Multi-photon addition: amplify the input with a two-mode squeezer and
    count clicks on the idler."""
    det = DetectorConfig(N, eta)
    sq = _squeezer(mu, xi)
    if cutoff is not None:
        _log.info(
            "a cutoff of %(cutoff)s is suggested for this input and squeezer",
            {"cutoff": suggest_cutoff(state, squeezer=sq)},
        )
    _single_stage(
        ctx,
        "add",
        state,
        det,
        clicks,
        cutoff,
        grid,
        lambda k: (AdditionSpec(sq, det, k), probability_addition_displaced_thermal),
    )


@main.command(name="amplify")
@config_option("amplify")
@click.option(
    "--input",
    "state",
    type=STATE,
    default="coherent:alpha=1",
    help="Coherent input state, kind:key=value,...",
    show_default=True,
)
@stage_detector_options(1, "addition")
@stage_detector_options(2, "subtraction")
@click.option("--mu", type=float, default=None, help="Squeezer gain cosh(xi)")
@click.option("--xi", type=float, default=None, help="Squeezing parameter")
@click.option(
    "--t",
    "t",
    type=float,
    default=0.9,
    help="Beam splitter transmissivity amplitude",
    show_default=True,
)
@click.option(
    "--clicks",
    type=CLICK_PAIRS,
    default=ALL_CLICKS,
    help="(k1, k2) pairs written k1:k2,... whose P functions go on the grid",
    show_default=True,
)
@output_options
@click.pass_context
@guarded
def amplify_cmd(
    ctx: click.Context,
    state: StateSpec,
    N1: int,
    eta1: float,
    N2: int,
    eta2: float,
    mu: Optional[float],
    xi: Optional[float],
    t: float,
    clicks: ClickPairs,
    out: str,
    fmt: str,
    grid: Optional[GridSpec],
    manifest: bool,
) -> None:
    """Noiseless amplification: photon addition followed by photon subtraction.

    Writes the probability of every (k1, k2) click pair for a coherent input
    and prints it as a table of percentages.
    """
    if state.kind not in ("vacuum", "coherent"):
        raise ValidationError(f"the amplifier needs a coherent input, got {state.kind}")
    run = _run_config(ctx, "amplify")
    template = AmplifySpec(
        AdditionSpec(_squeezer(mu, xi), DetectorConfig(N1, eta1), 0),
        SubtractionSpec(BeamSplitterConfig(t), DetectorConfig(N2, eta2), 0),
    )
    table = probability_table(template, state.alpha, workers=run.threads)
    rows = [
        [k1, k2, p, format_percent(p)]
        for (k1, k2), p in np.ndenumerate(table)
    ]
    write_table(
        run.out / "amplify_probabilities",
        ["k1", "k2", "probability", "percent"],
        rows,
        cast(Format, run.fmt),
    )
    for k1, row in enumerate(table):
        click.echo(f"k1={k1}: " + " ".join(format_percent(p) for p in row))

    if grid is None:
        return
    if clicks == ALL_CLICKS:
        pairs = [(k1, k2) for k1 in range(N1 + 1) for k2 in range(N2 + 1)]
    else:
        pairs = list(clicks)
    for k1, k2 in pairs:
        spec = AmplifySpec(
            attr.evolve(template.add, k=k1), attr.evolve(template.sub, k=k2)
        )
        outcome = amplify(state.alpha, spec)
        _write_outcome_grid(run, f"amplify_grid_k{k1}-{k2}", outcome, grid)


@main.command(name="clickstats")
@config_option("clickstats")
@click.option(
    "--input",
    "state",
    type=STATE,
    default="vacuum",
    help="Measured state, kind:key=value,...",
    show_default=True,
)
@click.option(
    "--distribution",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file with a photon number distribution, replaces --input",
)
@detector_options
@click.option(
    "--cutoff",
    type=click.IntRange(min=1),
    default=None,
    help="Fock levels of the input, chosen from its tail when omitted",
)
@table_options
@click.pass_context
@guarded
def clickstats_cmd(
    ctx: click.Context,
    state: StateSpec,
    distribution: Optional[str],
    N: int,
    eta: float,
    cutoff: Optional[int],
    out: str,
    fmt: str,
    manifest: bool,
) -> None:
    """Click statistics of a state measured with N on/off detectors.

    Prints every nonzero click probability as c_k=value.
    """
    run = _run_config(ctx, "clickstats")
    det = DetectorConfig(N, eta)
    if distribution is not None:
        photon_dist = _read_distribution(distribution)
    else:
        levels = cutoff if cutoff is not None else suggest_cutoff(state)
        fock_state = make_state(state, levels)
        if isinstance(fock_state, TwoModeDensityMatrix):
            fock_state = fock_state.reduced_a()
        photon_dist = photon_distribution(fock_state)

    stats = click_statistics(photon_dist, det)
    for k, p in enumerate(stats.probs):
        if p != 0.0:
            click.echo(f"c_{k}={format_number(p)}")
    if 0.0 < stats.mean() < det.N:
        _log.info(
            "binomial parameter Q_B=%(q)s", {"q": binomial_parameter(stats)}
        )
    write_table(
        run.out / "clickstats_distribution",
        ["k", "probability"],
        [[k, p] for k, p in enumerate(stats.probs)],
        cast(Format, run.fmt),
    )


def _read_distribution(filename: str) -> np.ndarray:
    try:
        with open(filename) as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read a photon distribution from {filename}: {e}")
    if isinstance(document, dict):
        document = document.get("probabilities")
    if not isinstance(document, list) or not document:
        raise ConfigError(f"{filename} must hold a list of photon probabilities")
    return np.array(document, dtype=float)


@main.command(name="errorbound")
@config_option("errorbound")
@click.option(
    "--eta",
    type=click.FloatRange(0.0, 1.0),
    default=1.0,
    help="Quantum efficiency of the detectors",
    show_default=True,
)
@click.option(
    "--k",
    "clicks",
    type=click.IntRange(min=0),
    default=1,
    help="Click number of the compared elements",
    show_default=True,
)
@click.option(
    "--N",
    "N",
    type=INT_LIST,
    default="2,4,8,16,32,64",
    help="Detector counts, comma separated with a-b ranges",
    show_default=True,
)
@click.option(
    "--cutoff",
    type=click.IntRange(min=1),
    default=64,
    help="Fock levels scanned before the tail bound takes over",
    show_default=True,
)
@table_options
@click.pass_context
@guarded
def errorbound_cmd(
    ctx: click.Context,
    eta: float,
    clicks: int,
    N: List[int],
    cutoff: int,
    out: str,
    fmt: str,
    manifest: bool,
) -> None:
    """Operator norm distance between the click and the photoelectric POVM
    elements, as a function of the number of detectors."""
    run = _run_config(ctx, "errorbound")
    rows: List[List[Any]] = []
    for n in N:
        distance = operator_norm_distance(DetectorConfig(n, eta), clicks, cutoff)
        click.echo(f"N={n} distance={format_number(distance.value)}")
        rows.append(
            [
                n,
                distance.value,
                distance.sup,
                distance.argmax,
                distance.tail_bound,
                distance.cutoff,
            ]
        )
    write_table(
        run.out / "errorbound",
        ["N", "distance", "sup", "argmax", "tail_bound", "cutoff"],
        rows,
        cast(Format, run.fmt),
    )
