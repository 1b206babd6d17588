import argparse
import logging
from collections import OrderedDict
from dataclasses import dataclass
from functools import partial, wraps

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


def argument(*names, **options):
    """Describe one argparse argument for a registered command."""
    return names, options


class SkipCheck(Exception):

    """Raised by a check that does not apply to the run at hand."""


@dataclass
class CheckResult(object):

    name: str
    passed: bool
    value: object = None
    limit: object = None
    detail: str = ''
    skipped: bool = False

    @property
    def status(self):
        if self.skipped:
            return 'skip'
        return 'pass' if self.passed else 'fail'

    def to_dict(self):
        return OrderedDict([('name', self.name), ('status', self.status),
                            ('value', self.value), ('limit', self.limit),
                            ('detail', self.detail)])


def within(value, limit, detail=''):
    """Result of a check passing when value <= limit."""
    return CheckResult(name=None, passed=bool(value <= limit), value=float(value),
                       limit=float(limit), detail=detail)


class Dispatcher(object):

    """Manage subcommands and verification checks for a command line"""

    def __init__(self, prog=None, description=None):
        """Constructor

        :prog: program name shown in usage
        :description: text shown in --help
        """
        self.commands = OrderedDict()
        self.checks = OrderedDict()
        self._prog = prog
        self._description = description
        self._global_arguments = []
        logger.debug("Initialised Dispatcher")

    def _register(self, registry, function, name, entry):
        """Store entry under name, defaulting to the function's name.

        :returns: the function itself, so it stays callable
        """
        if name is None:
            name = function.__name__.lower().replace('_', '-')
        if name in registry:
            raise ValueError('{!r} is already registered'.format(name))
        logger.debug("Registering %s" % name)
        registry[name] = entry
        return function

    def global_argument(self, *names, **options):
        self._global_arguments.append((names, options))

    def command(self, func=None, *, name=None, arguments=()):
        """Register func as a subcommand taking the parsed arguments.

        :name: defaults to the function name with dashes
        :arguments: argument(...) descriptions
        """
        if func is None:
            return partial(self.command, name=name, arguments=arguments)
        doc = (func.__doc__ or '').strip().splitlines()
        entry = {'handler': func, 'arguments': tuple(arguments),
                 'help': doc[0] if doc else None}
        return self._register(self.commands, func, name, entry)

    def check(self, func=None, *, name=None):
        """Register func(context) -> CheckResult as an identity check.

        Exceptions raised by the check are logged and reported as failures.
        """
        if func is None:
            return partial(self.check, name=name)
        check_name = name or func.__name__.lower()

        @wraps(func)
        def run_check(context):
            logger.debug("Running check {!r}".format(check_name))
            try:
                result = func(context)
            except SkipCheck as e:
                return CheckResult(check_name, True, detail=str(e), skipped=True)
            except Exception as e:
                logger.error("Problem running check {}".format(check_name),
                             exc_info=True)
                return CheckResult(check_name, False,
                                   detail='{}: {}'.format(type(e).__name__, e))
            result.name = check_name
            logger.debug("Check {} returned {!r}".format(check_name, result))
            return result

        self._register(self.checks, func, check_name, run_check)
        return func

    def build_parser(self):
        parser = argparse.ArgumentParser(prog=self._prog,
                                         description=self._description)
        for names, options in self._global_arguments:
            parser.add_argument(*names, **options)
        subparsers = parser.add_subparsers(dest='command', metavar='command')
        subparsers.required = True
        for name, entry in self.commands.items():
            subparser = subparsers.add_parser(name, help=entry['help'],
                                              description=entry['help'])
            for names, options in entry['arguments']:
                subparser.add_argument(*names, **options)
            subparser.set_defaults(handler=entry['handler'])
        return parser

    def parse(self, argv=None):
        return self.build_parser().parse_args(argv)

    def dispatch(self, args):
        """Call the handler selected by parsed args and return its result."""
        logger.info("Running command {}".format(args.command))
        return args.handler(args)

    def run_checks(self, context, names=None):
        """Run the registered checks (all of them unless names is given)."""
        if names is None:
            names = list(self.checks)
        unknown = [name for name in names if name not in self.checks]
        if unknown:
            raise ValueError('Unknown checks: {}'.format(', '.join(unknown)))
        results = [self.checks[name](context) for name in names]
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.warning("Failed checks: {}".format(', '.join(failed)))
        return results
