"""Key-value run configuration.

    # comment
    [params]
    d = 3
    b = 1/2
    alpha = 3/2

Sections and keys are fixed by SCHEMA; anything else is an error.
"""
import logging
from collections import OrderedDict, namedtuple

from ..diagnostics import OBSERVABLES
from ..errors import ConfigError, InlsError
from ..grid import make_grid
from ..params import (Params, StrichartzPair, as_exponent, as_rational,
                      exponent_label, format_rational)
from ..solver import InitialData, RunConfig

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

Key = namedtuple('Key', 'parse format default')
REQUIRED = object()


def _rational(text):
    return as_rational(text)


def _real(text):
    return float(as_rational(text))


def _optional_real(text):
    if text.strip().lower() in ('', 'none', 'auto'):
        return None
    return _real(text)


def _integer(text):
    value = as_rational(text)
    if value.denominator != 1:
        raise ValueError('Not an integer: {!r}'.format(text))
    return int(value)


def _sign(text):
    value = _integer(text)
    if value not in (1, -1):
        raise ValueError('Expected +1 or -1, got {!r}'.format(text))
    return value


def _boolean(text):
    lowered = text.strip().lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True
    if lowered in ('false', 'no', 'off', '0'):
        return False
    raise ValueError('Not a boolean: {!r}'.format(text))


def _words(text):
    return tuple(word for word in text.replace(',', ' ').split() if word)


def _vector(text):
    return tuple(_real(word) for word in _words(text))


def _exponents(text):
    return tuple(as_exponent(word) for word in _words(text))


def _pairs(text):
    return tuple(StrichartzPair.from_text(word) for word in _words(text))


def _text(text):
    return text.strip()


def _show(value):
    return str(value)


def _show_real(value):
    return 'none' if value is None else repr(float(value))


def _show_words(values):
    return ', '.join(str(value) for value in values)


def _show_vector(values):
    return ', '.join(repr(float(value)) for value in values)


def _show_exponents(values):
    return ', '.join(exponent_label(value) for value in values)


def _show_pairs(values):
    return ', '.join(pair.label for pair in values)


def _show_boolean(value):
    return 'true' if value else 'false'


SCHEMA = OrderedDict([
    ('params', OrderedDict([
        ('d', Key(_integer, _show, REQUIRED)),
        ('b', Key(_rational, format_rational, REQUIRED)),
        ('alpha', Key(_rational, format_rational, REQUIRED)),
        ('mu', Key(_sign, _show, -1)),
    ])),
    ('grid', OrderedDict([
        ('L', Key(_real, _show_real, REQUIRED)),
        ('n', Key(_integer, _show, REQUIRED)),
        ('offset', Key(_boolean, _show_boolean, True)),
    ])),
    ('run', OrderedDict([
        ('dt', Key(_real, _show_real, REQUIRED)),
        ('t_end', Key(_real, _show_real, REQUIRED)),
        ('sample_every', Key(_integer, _show, 1)),
        ('checkpoint_every', Key(_integer, _show, 1)),
        ('direction', Key(_text, _show, 'forward')),
        ('linear', Key(_boolean, _show_boolean, False)),
        ('t_transient', Key(_real, _show_real, 1.0)),
        ('t_wrap', Key(_optional_real, _show_real, None)),
    ])),
    ('initial', OrderedDict([
        ('kind', Key(_text, _show, 'gaussian')),
        ('amplitude', Key(_real, _show_real, 1.0)),
        ('width', Key(_real, _show_real, 1.0)),
        ('velocity', Key(_vector, _show_vector, ())),
        ('center', Key(_vector, _show_vector, ())),
        ('seed', Key(_integer, _show, 0)),
        ('cutoff', Key(_real, _show_real, 4.0)),
    ])),
    ('diagnostics', OrderedDict([
        ('observables', Key(_words, _show_words, OBSERVABLES)),
        ('lq', Key(_exponents, _show_exponents, (as_exponent(4),))),
        ('weights', Key(_words, _show_words, ('quadratic', 'smoothed-abs', 'abs'))),
        ('smoothing', Key(_optional_real, _show_real, None)),
        ('pairs', Key(_pairs, _show_pairs, ())),
    ])),
])


def read_sections(text):
    """Parse text into {section: {key: (raw value, line)}}.

    :raises ConfigError: on syntax errors, unknown sections or keys and
        duplicates
    """
    sections = OrderedDict()
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('['):
            if not line.endswith(']'):
                raise ConfigError('unterminated section header {!r}'.format(line), number)
            current = line[1:-1].strip()
            if current not in SCHEMA:
                raise ConfigError('unknown section [{}]'.format(current), number)
            if current in sections:
                raise ConfigError('duplicate section [{}]'.format(current), number)
            sections[current] = OrderedDict()
            continue
        if '=' not in line:
            raise ConfigError('expected "key = value", got {!r}'.format(line), number)
        if current is None:
            raise ConfigError('key outside of any section', number)
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in SCHEMA[current]:
            raise ConfigError('unknown key {!r} in [{}]'.format(key, current), number)
        if key in sections[current]:
            raise ConfigError('duplicate key {!r} in [{}]'.format(key, current), number)
        sections[current][key] = (value, number)
    return sections


def resolve(sections, overrides=None):
    """Apply the schema: convert values, fill defaults, apply overrides.

    :overrides: {(section, key): raw text}, e.g. from --seed
    :returns: {section: {key: value}}
    """
    overrides = overrides or {}
    values = OrderedDict()
    for section, keys in SCHEMA.items():
        given = sections.get(section, {})
        values[section] = OrderedDict()
        for key, spec in keys.items():
            if (section, key) in overrides:
                raw, line = overrides[(section, key)], None
            elif key in given:
                raw, line = given[key]
            elif spec.default is REQUIRED:
                raise ConfigError('missing key {!r} in [{}]'.format(key, section))
            else:
                values[section][key] = spec.default
                continue
            try:
                values[section][key] = spec.parse(str(raw))
            except ValueError as e:
                raise ConfigError('bad value for {}: {}'.format(key, e), line)
    return values


def build(values):
    """RunConfig from resolved values."""
    params = Params(**values['params'])
    grid = make_grid(params.d, **values['grid'])
    run = values['run']
    diagnostics = values['diagnostics']
    return RunConfig(params=params, grid=grid,
                     initial=InitialData(**values['initial']),
                     observables=diagnostics['observables'],
                     lq=diagnostics['lq'],
                     weights=diagnostics['weights'],
                     smoothing=diagnostics['smoothing'],
                     pairs=diagnostics['pairs'],
                     **run)


def parse_config(text, overrides=None):
    """Fully validated RunConfig from config text."""
    values = resolve(read_sections(text), overrides)
    try:
        config = build(values)
    except ConfigError:
        raise
    except (InlsError, ValueError) as e:
        raise ConfigError(str(e))
    logger.debug("Parsed config for d={} b={} alpha={}".format(
        config.params.d, config.params.b, config.params.alpha))
    return config


def canonical(config):
    """{section: {key: text}} for every schema key, defaults included."""
    sources = {
        'params': config.params.to_dict(),
        'grid': {'L': config.grid.L, 'n': config.grid.n,
                 'offset': config.grid.offset},
        'run': {name: getattr(config, name) for name in SCHEMA['run']},
        'initial': {name: getattr(config.initial, name)
                    for name in SCHEMA['initial']},
        'diagnostics': {name: getattr(config, name)
                        for name in SCHEMA['diagnostics']},
    }
    sources['params'].update(b=config.params.b, alpha=config.params.alpha)
    echo = OrderedDict()
    for section, keys in SCHEMA.items():
        echo[section] = OrderedDict(
            (key, spec.format(sources[section][key])) for key, spec in keys.items())
    return echo


def dump_config(config):
    """Config text that parses back to an equal RunConfig."""
    lines = []
    for section, keys in canonical(config).items():
        if lines:
            lines.append('')
        lines.append('[{}]'.format(section))
        lines.extend('{} = {}'.format(key, value) for key, value in keys.items())
    return '\n'.join(lines) + '\n'
