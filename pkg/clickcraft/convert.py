import re
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any, Dict, List, Tuple, Union

import click

from .pfunc import GridSpec
from .types import STATE_KINDS, StateSpec, ValidationError

ALL_CLICKS = "all"
Clicks = Union[str, List[int]]
ClickPairs = Union[str, List[Tuple[int, int]]]


def parse_complex(value: Union[str, complex, float, List[float]]) -> complex:
    """Parse a complex number written with i or j.

    >>> parse_complex('0.8+0.3i')
    (0.8+0.3j)
    >>> parse_complex('1.4142135623730951')
    (1.4142135623730951+0j)
    >>> parse_complex([0.5, -1.0])
    (0.5-1j)
    >>> parse_complex('one')
    Traceback (most recent call last):
    ...
    click.exceptions.BadParameter: Invalid complex number 'one'
    """
    if isinstance(value, (complex, float, int)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    text = re.sub(r"\s+", "", str(value)).replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise click.BadParameter(f"Invalid complex number {value!r}")


def parse_int_list(value: Union[str, List[int]]) -> List[int]:
    """Parse a comma separated list of integers, ranges written a-b.

    >>> parse_int_list('2,4,8')
    [2, 4, 8]
    >>> parse_int_list('0-3, 16')
    [0, 1, 2, 3, 16]
    >>> parse_int_list('1.5')
    Traceback (most recent call last):
    ...
    click.exceptions.BadParameter: Invalid integer list '1.5'
    """
    if isinstance(value, list):
        return [int(v) for v in value]
    result: List[int] = []
    for item in re.split(r"\s*,\s*", str(value).strip()):
        match = re.fullmatch(r"(\d+)(?:-(\d+))?", item)
        if match is None:
            raise click.BadParameter(f"Invalid integer list {value!r}")
        start = int(match.group(1))
        stop = int(match.group(2)) if match.group(2) is not None else start
        result.extend(range(start, stop + 1))
    return result


def parse_clicks(value: Union[str, int, List[int]]) -> Clicks:
    """Click numbers to condition on, or "all".

    >>> parse_clicks('all')
    'all'
    >>> parse_clicks(2)
    [2]
    >>> parse_clicks('0,1,4,16')
    [0, 1, 4, 16]
    """
    if isinstance(value, int):
        return [value]
    if isinstance(value, str) and value.strip() == ALL_CLICKS:
        return ALL_CLICKS
    return parse_int_list(value)


def parse_grid(value: Union[str, List[float]]) -> GridSpec:
    """Parse re0,re1,im0,im1,nre,nim.

    >>> parse_grid('-2,2,-1,1,4,2')
    GridSpec(re_min=-2.0, re_max=2.0, im_min=-1.0, im_max=1.0, n_re=4, n_im=2)
    >>> parse_grid('-2,2,-1,1')
    Traceback (most recent call last):
    ...
    click.exceptions.BadParameter: A grid needs re0,re1,im0,im1,nre,nim
    """
    items = value if isinstance(value, list) else re.split(r"\s*,\s*", value.strip())
    if len(items) != 6:
        raise click.BadParameter("A grid needs re0,re1,im0,im1,nre,nim")
    try:
        bounds = [float(v) for v in items[:4]]
        counts = [int(v) for v in items[4:]]
    except ValueError:
        raise click.BadParameter(f"Invalid grid {value!r}")
    try:
        return GridSpec(*bounds, *counts)
    except ValidationError as e:
        raise click.BadParameter(str(e))


STATE_FIELDS = {"alpha": parse_complex, "nbar": float, "omega": float, "n": int}


def parse_state(value: Union[str, Dict[str, Any]]) -> StateSpec:
    """Parse an input state written kind:key=value,... (or a config mapping).

    >>> parse_state('coherent:alpha=0.8+0.3i')
    StateSpec(kind='coherent', alpha=(0.8+0.3j), nbar=0.0, omega=0.0, n=0)
    >>> parse_state('vacuum')
    StateSpec(kind='vacuum', alpha=0j, nbar=0.0, omega=0.0, n=0)
    >>> parse_state({'kind': 'thermal', 'nbar': 0.5}).nbar
    0.5
    >>> parse_state('squeezed:r=1')
    Traceback (most recent call last):
    ...
    click.exceptions.BadParameter: Unknown state kind 'squeezed'
    """
    if isinstance(value, dict):
        fields = dict(value)
        kind = str(fields.pop("kind", ""))
    else:
        kind, _, rest = str(value).strip().partition(":")
        fields = {}
        for item in filter(None, re.split(r"\s*,\s*", rest)):
            key, sep, raw = item.partition("=")
            if not sep:
                raise click.BadParameter(f"Invalid state parameter {item!r}")
            fields[key] = raw
    if kind not in STATE_KINDS:
        raise click.BadParameter(f"Unknown state kind {kind!r}")

    parsed: Dict[str, Any] = {}
    for key, raw in fields.items():
        try:
            parsed[key] = STATE_FIELDS[key](raw)
        except KeyError:
            raise click.BadParameter(f"Unknown state parameter {key!r}")
        except ValueError:
            raise click.BadParameter(f"Invalid value {raw!r} for {key}")
    return StateSpec(kind, **parsed)  # type: ignore[arg-type]


def format_number(value: float) -> str:
    """Seventeen significant digits, enough to round-trip any double.

    >>> format_number(0.1)
    '0.10000000000000001'
    >>> format_number(1.0)
    '1'
    """
    return format(value, ".17g")


def format_percent(probability: float) -> str:
    """Percentage with two decimals, ties rounded to even.

    >>> format_percent(0.16797)
    '16.80'
    >>> format_percent(0.00125)
    '0.12'
    >>> format_percent(0.00135)
    '0.14'
    """
    percent = Decimal(repr(float(probability))) * 100
    return str(percent.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def parse_click_pairs(value: Union[str, List[List[int]]]) -> ClickPairs:
    """(k1, k2) click pairs written k1:k2,..., or "all".

    >>> parse_click_pairs('1:0, 4:3')
    [(1, 0), (4, 3)]
    >>> parse_click_pairs([[0, 0]])
    [(0, 0)]
    >>> parse_click_pairs('1-0')
    Traceback (most recent call last):
    ...
    click.exceptions.BadParameter: Invalid click pairs '1-0'
    """
    if isinstance(value, list):
        return [(int(k1), int(k2)) for k1, k2 in value]
    if value.strip() == ALL_CLICKS:
        return ALL_CLICKS
    pairs = []
    for item in re.split(r"\s*,\s*", value.strip()):
        match = re.fullmatch(r"(\d+):(\d+)", item)
        if match is None:
            raise click.BadParameter(f"Invalid click pairs {value!r}")
        pairs.append((int(match.group(1)), int(match.group(2))))
    return pairs
