"""Exception hierarchy shared by all modules."""

import os

DEFAULT_DENSE_CAP = 12


class VqocError(Exception):
    """Base class for toolkit errors."""


class DimensionMismatchError(VqocError, ValueError):
    """Operands act on different qubit counts or have incompatible shapes."""


class ResourceLimitError(VqocError):
    """A dense realization would exceed the configured qubit cap."""


class UnboundParameterError(VqocError, KeyError):
    """A circuit parameter was referenced without a value."""

    def __str__(self):
        return Exception.__str__(self)


class UndeterminedError(VqocError):
    """A controllability verdict was requested from a truncated closure."""


class ParseError(VqocError, ValueError):
    """Malformed input file; carries the 1-based line (and column when known)."""

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)


def dense_cap():
    """Qubit cap for dense matrices; ``VQOC_DENSE_CAP`` overrides the default of 12.

    A dense n-qubit complex matrix takes 16 * 4**n bytes (256 MiB at n = 12).
    """
    value = os.environ.get("VQOC_DENSE_CAP")
    if value is None:
        return DEFAULT_DENSE_CAP
    return int(value)


def check_dense(n, cap=None):
    cap = dense_cap() if cap is None else cap
    if n > cap:
        raise ResourceLimitError(
            f"{n} qubits exceeds the dense cap of {cap} "
            f"({16 * 4 ** n / 2 ** 20:.0f} MiB per matrix)"
        )
