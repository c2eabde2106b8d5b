"""
graphrecover command-line entry point.

Maps the hyphenated subcommand names onto the management commands of
this app and turns CommandError into an exit code instead of a traceback.

AIDEV-NOTE: exit-codes; 0 success, 1 usage or validation error, 2 infeasible program
"""

import os
import sys
from typing import List, Optional, TextIO

SUBCOMMANDS = {
    'recover': 'recover',
    'select-global': 'select_global',
    'select-local': 'select_local',
    'lwce-curve': 'lwce_curve',
    'experiment': 'experiment',
    'synth': 'synth',
}
PROG = 'graphrecover'


def usage() -> str:
    return f'usage: {PROG} {{{",".join(SUBCOMMANDS)}}} [flags]\n'


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments after the program name (default sys.argv[1:])
        stdout: Stream for results (default sys.stdout)
        stderr: Stream for usage and error messages (default sys.stderr)

    Returns:
        Process exit code
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    if not argv or argv[0] in ('-h', '--help'):
        (stdout if argv else stderr).write(usage())
        return 0 if argv else 1
    name = SUBCOMMANDS.get(argv[0])
    if name is None:
        stderr.write(f'{PROG}: unknown subcommand {argv[0]!r}\n{usage()}')
        return 1

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    import django
    django.setup()
    from django.core.management import call_command, load_command_class
    from django.core.management.base import CommandError

    command = load_command_class('cli', name)
    try:
        call_command(command, *argv[1:], stdout=stdout, stderr=stderr)
    except CommandError as e:
        message = str(e)
        stderr.write(f'{PROG} {argv[0]}: {message}\n')
        if message.startswith('Error: '):
            stderr.write(command.create_parser(PROG, argv[0]).format_usage())
        return e.returncode
    except SystemExit as e:
        # --help inside a subcommand
        return int(e.code or 0)
    return 0
