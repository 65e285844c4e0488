"""Monte Carlo trial loop, compiled when the extension was built.

``BACKEND`` names the implementation picked at import: ``"cython"`` when
``telesim._kernel`` imports, otherwise ``"python"``.
"""

from __future__ import annotations

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

PROTOCOL_CODES = {
    "standard": _kernel_py.STANDARD,
    "singlet-only": _kernel_py.SINGLET_ONLY,
    "conclusive": _kernel_py.CONCLUSIVE,
    "conclusive-singlet-only": _kernel_py.CONCLUSIVE_SINGLET_ONLY,
}


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def run_trials(protocol, alpha, beta, seed, start, n, fixed_input=None, kraus=None, backend=None):
    """Simulate trials ``start .. start+n-1`` of ``protocol``.

    ``kraus`` holds the three 2x2 USD Kraus factors (u, v, inconclusive) and is
    required by the two conclusive protocols.
    """
    code = PROTOCOL_CODES[protocol]
    if code in (_kernel_py.CONCLUSIVE, _kernel_py.CONCLUSIVE_SINGLET_ONLY) and kraus is None:
        raise ValueError(f"protocol {protocol!r} needs the USD Kraus factors")
    backend = backend or BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        impl = _compiled.run_trials
    elif backend == "python":
        impl = _kernel_py.run_trials
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if fixed_input is not None:
        fixed_input = (complex(fixed_input[0]), complex(fixed_input[1]))
    return impl(code, float(alpha), float(beta), int(seed), int(start), int(n), fixed_input, kraus)
