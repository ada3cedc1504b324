"""
config.py

This module defines the classes holding the input and run configuration of carpet-lab:

- IfsDocument: the IFS input document (a JSON object with a "maps" list), parsed with
  exact rationals for every coefficient.
- SliceConfiguration, ScalesConfiguration, TangentConfiguration, DimensionConfiguration:
  per-command sections of a preset.
- Preset: a named JSON file shipped in carpet_lab/presets holding an optional inline IFS and
  the sections above.
- RunConfiguration: the merge of the command line, the preset and the CARPET_LAB_BUDGET
  environment variable.

Coefficients may be JSON numbers (decimals are read exactly, 0.2 is 1/5), strings such as
"3/5", or {"num": 3, "den": 5} objects.

See README.md for the document format.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import IO
from carpet_lab.errors import InputParseError
from carpet_lab.ifs_core import AffineMap2D
from carpet_lab.ifs_core import to_exact
from carpet_lab.ifs_core import word_budget

PRESET_DIR = Path(__file__).parent / 'presets'


def _encode(value):
    if isinstance(value, Fraction):
        return str(value)
    if hasattr(value, '__dict__'):
        return vars(value)
    return str(value)


def to_json(value) -> str:
    """Sorted, indented JSON rendering used by every configuration class."""

    return json.dumps(value, default=_encode, indent=2, sort_keys=True)


def parse_number(value) -> Fraction:
    """Parse one coefficient of the input document."""

    if isinstance(value, dict):
        try:
            return Fraction(int(value['num']), int(value['den']))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as error:
            raise InputParseError(f"invalid rational object: {value!r}") from error
    return to_exact(value)


class IfsDocument:
    """The IFS input document."""

    def __init__(self) -> None:
        self.maps = []
        self.certification_depth = None

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()

    def load(self,
             input_stream: IO[str]) -> None:
        """Load the document from an input stream."""

        try:
            document = json.load(input_stream, parse_float=Fraction)
        except json.JSONDecodeError as error:
            raise InputParseError(f"malformed IFS document: {error}") from error
        self.load_dict(document)

    def load_dict(self, document: dict) -> None:
        """Load the document from an already parsed JSON object."""

        if not isinstance(document, dict) or not isinstance(document.get('maps'), list):
            raise InputParseError("the IFS document needs a 'maps' list")
        maps = []
        for index, entry in enumerate(document['maps'], start=1):
            if not isinstance(entry, dict):
                raise InputParseError(f"map {index} is not an object")
            try:
                maps.append(AffineMap2D(parse_number(entry['a1']),
                                        parse_number(entry['a2']),
                                        parse_number(entry.get('b1', 0)),
                                        parse_number(entry.get('b2', 0))))
            except KeyError as error:
                raise InputParseError(f"map {index} misses the coefficient {error}") from error
        self.maps = maps
        depth = document.get('certification_depth')
        if depth is not None and (not isinstance(depth, int) or depth < 1):
            raise InputParseError(f"invalid certification_depth: {depth!r}")
        self.certification_depth = depth


class SliceConfiguration:
    """Configuration for the slice command."""

    def __init__(self,
                 config: dict) -> None:
        self.count = int(config.get('count', 20))
        self.depth = int(config.get('depth', 8))
        self.grid = int(config.get('grid', 8))
        self.abscissae = [float(x) for x in config.get('abscissae', [])]

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()


class ScalesConfiguration:
    """Configuration for the scales command."""

    def __init__(self,
                 config: dict) -> None:
        self.count = int(config.get('count', 100))
        self.seed = int(config.get('seed', 0))
        self.cert_depth = int(config.get('cert_depth', 6))
        t_range = config.get('t_range')
        self.t_range = None if t_range is None else (float(t_range[0]), float(t_range[1]))

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()


class TangentConfiguration:
    """Configuration for the tangent command."""

    def __init__(self,
                 config: dict) -> None:
        self.levels = [int(k) for k in config.get('levels', [2, 3, 4])]
        self.windows = int(config.get('windows', 10))
        self.fit_scales = int(config.get('fit_scales', 4))
        self.first_fit_scale = int(config.get('first_fit_scale', 3))

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()


class DimensionConfiguration:
    """Configuration for the dim command."""

    def __init__(self,
                 config: dict) -> None:
        self.levels = tuple(int(n) for n in config.get('levels', [3, 9]))
        self.assouad_samples = int(config.get('assouad_samples', 16))
        self.seed = int(config.get('seed', 0))
        self.microset_levels = tuple(int(n) for n in config.get('microset_levels', [3, 7]))
        self.window_budget = int(config.get('window_budget', 2))
        self.schedule = [((float(c[0]), float(c[1])), float(big), float(small))
                         for c, big, small in config.get('schedule', [])]

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()


class Preset:
    """A named preset: an optional inline IFS plus per-command sections."""

    def __init__(self) -> None:
        self.name = None
        self.description = ''
        self.ifs = None
        self.depth = 3
        self.slice = SliceConfiguration({})
        self.scales = ScalesConfiguration({})
        self.tangent = TangentConfiguration({})
        self.dimension = DimensionConfiguration({})

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()

    def load(self,
             input_stream: IO[str]) -> None:
        """Load the preset from an input stream."""

        try:
            preset = json.load(input_stream, parse_float=Fraction)
        except json.JSONDecodeError as error:
            raise InputParseError(f"malformed preset: {error}") from error

        self.name = preset.get('name')
        self.description = preset.get('description', '')
        if 'ifs' in preset:
            self.ifs = IfsDocument()
            self.ifs.load_dict(preset['ifs'])
        self.depth = int(preset.get('depth', 3))
        self.slice = SliceConfiguration(preset.get('slice', {}))
        self.scales = ScalesConfiguration(preset.get('scales', {}))
        self.tangent = TangentConfiguration(preset.get('tangent', {}))
        self.dimension = DimensionConfiguration(preset.get('dim', {}))

    @classmethod
    def named(cls, name: str) -> 'Preset':
        """Load one of the presets shipped with the package."""

        path = PRESET_DIR / f'{name}.json'
        if not path.is_file():
            available = ', '.join(sorted(p.stem for p in PRESET_DIR.glob('*.json')))
            raise InputParseError(f"unknown preset {name!r} (available: {available})")
        preset = cls()
        with path.open(encoding='utf-8') as stream:
            preset.load(stream)
        return preset


class RunConfiguration:
    """Configuration of one command-line run."""

    def __init__(self,
                 command: str,
                 input_path: str | None = None,
                 preset: str | None = None,
                 out: str = '.',
                 depth: int | None = None,
                 tolerance: float = 1e-12) -> None:
        self.command = command
        self.input_path = input_path
        self.preset_name = preset
        self.out = out
        self.tolerance = tolerance
        self.budget = word_budget()
        self.preset = Preset.named(preset) if preset else Preset()
        self.depth = self.preset.depth if depth is None else depth

        if input_path is None and self.preset.ifs is None:
            raise InputParseError("no IFS given: use --input or a preset with an inline IFS")
        if self.depth < 0:
            raise InputParseError(f"depth must be non-negative, got {self.depth}")
        if not 0 < self.tolerance < 1:
            raise InputParseError(f"tolerance must lie in (0, 1), got {self.tolerance}")

    def __str__(self) -> str:
        return to_json(self)

    def __repr__(self) -> str:
        return self.__str__()

    def load_document(self, stdin: IO[str]) -> IfsDocument:
        """The IFS document from --input (a path or '-' for stdin) or from the preset."""

        if self.input_path is None:
            return self.preset.ifs
        document = IfsDocument()
        if self.input_path == '-':
            document.load(stdin)
            return document
        try:
            with open(self.input_path, encoding='utf-8') as stream:
                document.load(stream)
        except OSError as error:
            raise InputParseError(f"cannot read {self.input_path}: {error}") from error
        return document
