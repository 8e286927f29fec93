"""Working-precision contexts.

Numerical kernels that must reach high convergence orders accept an
optional ``ctx`` argument.  ``None`` means IEEE double (``mpmath.fp``,
whose numbers are plain ``float``/``complex``); an ``mpmath.MPContext``
runs the same code in extended precision.
"""

import mpmath


def working_context(dps=None):
    """Return ``mpmath.fp`` for ``dps=None``, else a private context with ``dps`` digits."""
    if dps is None:
        return mpmath.fp
    ctx = mpmath.MPContext()
    ctx.dps = int(dps)
    return ctx


def resolve(ctx):
    return mpmath.fp if ctx is None else ctx


def is_double(ctx):
    return ctx is None or ctx is mpmath.fp


def machine_eps(ctx=None):
    ctx = resolve(ctx)
    return float(ctx.eps)


def rational(ctx, q):
    """Convert a ``Fraction`` (or int) into a number of ``ctx``."""
    ctx = resolve(ctx)
    num = getattr(q, "numerator", q)
    den = getattr(q, "denominator", 1)
    if ctx is mpmath.fp:
        return num / den
    return ctx.mpf(num) / den
