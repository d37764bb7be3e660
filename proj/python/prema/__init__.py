"""Python front end for the prema requirements toolchain.

Every analysis returns plain dicts decoded from the same JSON the CLI and
the HTTP service produce.
"""

import json

from . import _prema
from ._prema import PremaError, Project

__all__ = [
    "PremaError",
    "Project",
    "check",
    "compile_markdown",
    "error_code",
    "graph",
    "load",
    "model",
    "simulate",
    "smtlib",
    "summary",
    "testgen",
    "verify",
]


def load(config):
    """Compile the project described by a prema.json file."""
    return _prema.load(str(config))


def compile_markdown(text, name="doc", int_min=-32768, int_max=32767):
    """Compile a single in-memory Markdown document."""
    return _prema.compile_markdown(text, name, int_min, int_max)


def summary(project):
    return json.loads(_prema.summary(project))


def check(project):
    return json.loads(_prema.check(project))


def model(project):
    return json.loads(_prema.model(project))


def graph(project, kind, var, depth=0):
    """DOT text of the state diagram ("state") or dependency graph ("deps") of var."""
    if kind == "state":
        return _prema.state_diagram(project, var)
    if kind == "deps":
        return _prema.dependency_diagram(project, var, depth)
    raise ValueError(f"unknown graph kind {kind!r}")


def simulate(project, csv, tasks=None):
    """Run input rows (CSV text). Returns schedule, blocking diagnostics and trace."""
    return json.loads(_prema.simulate(project, csv, tasks))


def testgen(project, task=None):
    return json.loads(_prema.testgen(project, task))


def verify(project, prop="", assume="", tasks=None, depth=1, runtime_safety=False):
    return json.loads(_prema.verify(project, prop, assume, tasks, depth, runtime_safety))


def smtlib(project, prop, assume="", tasks=None, depth=1):
    """SMT-LIB script that is sat exactly when verify() finds a counterexample."""
    return _prema.smtlib(project, prop, assume, tasks, depth)


def error_code(exc):
    """Diagnostic code ("E002", ...) carried by a PremaError."""
    return exc.args[0] if exc.args else None
