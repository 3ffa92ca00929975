"""Working-precision control and canonical decimal serialization.

All arithmetic in this package runs on gmpy2 (MPFR/MPC) numbers under an
explicitly activated context.  A :class:`PrecisionContext` carries the
reporting precision ``digits`` (P significant decimal digits) and a number
of ``guard`` digits (g) carried internally, so every scalar operation is
performed at P+g digits and results are only ever *reported* at P digits.

Persisted data never uses binary floating formats: values are serialized
as decimal strings of exactly P significant digits, and parsing such a
string back under the same context reproduces the identical string.
MPFR's correctly rounded arithmetic makes every result bit-reproducible
across platforms for a fixed context.
"""

from __future__ import annotations

import os
import threading

import gmpy2

from .errors import ContractViolation

GUARD_DIGITS_ENV = "HI_SPECTRA_GUARD_DIGITS"
DEFAULT_GUARD_DIGITS = 15

# bits per decimal digit, rounded up generously when converting below
_LOG2_10 = 3.321928094887362


def default_guard_digits() -> int:
    """Guard-digit default, overridable through HI_SPECTRA_GUARD_DIGITS."""
    raw = os.environ.get(GUARD_DIGITS_ENV)
    if raw is None:
        return DEFAULT_GUARD_DIGITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ContractViolation(f"{GUARD_DIGITS_ENV} must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ContractViolation(f"{GUARD_DIGITS_ENV} must be >= 0, got {value}")
    return value


class PrecisionContext:
    """Decimal working precision for every operation in the package.

    ``digits``  significant decimal digits P at which results are reported
                and serialized (P >= 16).
    ``guard``   extra digits g carried by all internal arithmetic; defaults
                to 15, or the HI_SPECTRA_GUARD_DIGITS environment variable.

    Instances are immutable and double as context managers activating a
    gmpy2 context of ceil((P+g)*log2(10)) bits:

        ctx = PrecisionContext(85)
        with ctx:
            x = gmpy2.mpfr("0.1")
    """

    __slots__ = ("digits", "guard", "work_digits", "bits")

    def __init__(self, digits: int, guard: int | None = None):
        if digits < 16:
            raise ContractViolation(f"precision must be at least 16 digits, got {digits}")
        guard = default_guard_digits() if guard is None else guard
        if guard < 0:
            raise ContractViolation(f"guard digits must be >= 0, got {guard}")
        object.__setattr__(self, "digits", int(digits))
        object.__setattr__(self, "guard", int(guard))
        object.__setattr__(self, "work_digits", self.digits + self.guard)
        object.__setattr__(self, "bits", int(self.work_digits * _LOG2_10) + 4)

    def __setattr__(self, name, value):
        raise AttributeError("PrecisionContext is immutable")

    def __repr__(self):
        return f"PrecisionContext(digits={self.digits}, guard={self.guard})"

    def __eq__(self, other):
        return (
            isinstance(other, PrecisionContext)
            and self.digits == other.digits
            and self.guard == other.guard
        )

    def __hash__(self):
        return hash((self.digits, self.guard))

    def gmpy_context(self):
        return gmpy2.context(precision=self.bits)

    def __enter__(self):
        ctx = self.gmpy_context()
        ctx.__enter__()
        self._stack().append(ctx)
        return self

    def __exit__(self, exc_type, exc, tb):
        return self._stack().pop().__exit__(exc_type, exc, tb)

    # gmpy2 context objects are not reentrant, so each activation gets a
    # fresh one; the stack is thread-local (instances stay immutable and
    # shareable, activations do not leak across threads).
    _local = threading.local()

    @classmethod
    def _stack(cls):
        stack = getattr(cls._local, "stack", None)
        if stack is None:
            stack = cls._local.stack = []
        return stack

    # -- convenience scales -------------------------------------------------

    def working_eps(self):
        """10**-(P+g), the relative error scale of working arithmetic."""
        return gmpy2.mpfr(10) ** (-self.work_digits)

    def report_eps(self):
        """10**(1-P), the roundoff floor at reporting precision."""
        return gmpy2.mpfr(10) ** (1 - self.digits)


def as_mpfr(value) -> gmpy2.mpfr:
    """Coerce to mpfr under the active context.

    Strings are parsed as (correctly rounded) decimal literals and are the
    preferred spelling for non-integers: a Python float like 0.01 carries
    binary double rounding and is converted exactly as the double it is.
    """
    if isinstance(value, gmpy2.mpfr):
        return +value
    if isinstance(value, str):
        return gmpy2.mpfr(value)
    if isinstance(value, (int, float)):
        return gmpy2.mpfr(value)
    raise ContractViolation(f"cannot interpret {type(value).__name__} as a real scalar")


def format_decimal(x, digits: int) -> str:
    """Canonical scientific decimal string with exactly ``digits`` significant digits.

    The form is ``[-]d.ddd...e<sign><exp>`` with a non-zero leading digit;
    zero serializes as ``"0"``.  Rounding is MPFR round-to-nearest-even.
    """
    if digits < 1:
        raise ContractViolation("need at least one significant digit")
    x = gmpy2.mpfr(x)
    if not gmpy2.is_finite(x):
        raise ContractViolation(f"cannot serialize non-finite value {x!r}")
    if x == 0:
        return "0"
    mantissa, exp10, _ = x.digits(10, digits)
    sign = ""
    if mantissa.startswith("-"):
        sign, mantissa = "-", mantissa[1:]
    if len(mantissa) == 1:
        return f"{sign}{mantissa}e{exp10 - 1:+d}"
    return f"{sign}{mantissa[0]}.{mantissa[1:]}e{exp10 - 1:+d}"


def format_plain(x, digits: int) -> str:
    """Decimal string at ``digits`` significant digits, fixed-point when compact.

    Used for report tables; falls back to :func:`format_decimal` when the
    exponent would force long zero runs.
    """
    x = gmpy2.mpfr(x)
    if x == 0:
        return "0." + "0" * (digits - 1)
    mantissa, exp10, _ = x.digits(10, digits)
    sign = ""
    if mantissa.startswith("-"):
        sign, mantissa = "-", mantissa[1:]
    if 0 < exp10 <= digits:
        head, tail = mantissa[:exp10], mantissa[exp10:]
        return f"{sign}{head}.{tail}" if tail else f"{sign}{head}"
    if -4 < exp10 <= 0:
        return f"{sign}0.{'0' * -exp10}{mantissa}"
    return format_decimal(x, digits)


def parse_decimal(text: str) -> gmpy2.mpfr:
    """Parse a decimal string under the active context (correctly rounded)."""
    try:
        return gmpy2.mpfr(text.strip())
    except ValueError as exc:
        raise ContractViolation(f"malformed decimal string {text!r}") from exc


def quantize(x, digits: int) -> gmpy2.mpfr:
    """Round to exactly ``digits`` significant decimal digits.

    Implemented as serialize-then-parse so the result is the value every
    consumer of a P-digit decimal string will reconstruct.
    """
    return parse_decimal(format_decimal(x, digits))


def quantize_complex(z, digits: int):
    """Componentwise :func:`quantize` for mpc values."""
    return gmpy2.mpc(quantize(z.real, digits), quantize(z.imag, digits))
