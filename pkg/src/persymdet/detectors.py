"""GLR, two-step GLR (Per-ACE), Rao and Wald detection statistics.

Each statistic is exposed in direct form, evaluated from the quadratic-form
pair ``(psi0, psi1)``, and (except Rao) in a form that consumes only the
maximal invariant ``t = (t1, t2, t3)``. The two forms agree to round-off;
tests exercise the identities explicitly. The Rao statistic is invariant as
well but has no closed expression in ``t`` here, so only its direct form is
provided.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateStatisticError,
    NearSingularDenominatorError,
    UnsupportedFormError,
)
from .statistics import MISVector, PsiPair, _gamma_hat, compute_psi, mis, scale_estimates

_RAO_DENOMINATOR_TOL = 1e-12


class DetectorKind(Enum):
    GLR = "glr"
    TWO_STEP_GLR = "2s-glr"
    RAO = "rao"
    WALD = "wald"


class DetectorForm(Enum):
    DIRECT = "direct"
    MIS_FORM = "mis"


#: Detectors with an evaluator that consumes only the maximal invariant.
MIS_FORM_KINDS = frozenset({DetectorKind.GLR, DetectorKind.TWO_STEP_GLR, DetectorKind.WALD})

#: Scale-sensitive statistic used as a negative control in CFAR experiments.
NEGATIVE_CONTROL = "trace-psi0"

STATISTIC_NAMES = tuple(k.value for k in DetectorKind) + (NEGATIVE_CONTROL,)


@dataclass(frozen=True)
class DetectorOutput:
    """A detector value plus the diagnostics it was computed from."""

    value: float
    kind: DetectorKind
    form: DetectorForm
    gamma0_hat: float | None
    gamma1_hat: float | None
    eigenvalues: tuple


def _trace_det(psi: np.ndarray):
    tr = psi[..., 0, 0] + psi[..., 1, 1]
    det = psi[..., 0, 0] * psi[..., 1, 1] - psi[..., 0, 1] * psi[..., 1, 0]
    return tr, det


def _first_bad(mask, index_base: int) -> int:
    return index_base + int(np.argmax(mask))


def _batch_values(name: str, psi0, psi1, k, n, index_base: int = 0) -> np.ndarray:
    """Vectorized detector evaluation over stacked (..., 2, 2) psi pairs.

    All scalar entry points funnel through here, so the Monte Carlo engine
    and the public API share one set of formulas. ``index_base`` offsets
    instance numbers in error messages (trial indices in long runs).
    """
    tr0, det0 = _trace_det(np.asarray(psi0, dtype=float))
    tr1, det1 = _trace_det(np.asarray(psi1, dtype=float))
    if name == NEGATIVE_CONTROL:
        return np.asarray(tr0, dtype=float)
    if name == DetectorKind.TWO_STEP_GLR.value:
        bad = tr1 <= 0.0
        if np.any(bad):
            raise DegenerateStatisticError(
                f"instance {_first_bad(bad, index_base)}: Tr[psi1] is not positive"
            )
        return tr0 / tr1
    for tr, which in ((tr0, "psi0"), (tr1, "psi1")):
        bad = tr <= 0.0
        if np.any(bad):
            raise DegenerateStatisticError(
                f"instance {_first_bad(bad, index_base)}: Tr[{which}] is not positive"
            )
    g0, _ = _gamma_hat(tr0, det0, k, n)
    g1, _ = _gamma_hat(tr1, det1, k, n)
    if name == DetectorKind.WALD.value:
        return g1 * (tr0 - tr1)
    if name == DetectorKind.GLR.value:
        # log domain: gamma^(-N/(K+1)) spans orders of magnitude for large K;
        # det(I + g psi) - 1 = g (tr + g det) >= 0, so log1p is exact there.
        expo = -n / (k + 1.0)
        logval = (
            expo * (np.log(g0) - np.log(g1))
            + np.log1p(g0 * (tr0 + g0 * det0))
            - np.log1p(g1 * (tr1 + g1 * det1))
        )
        return np.exp(logval)
    if name == DetectorKind.RAO.value:
        psi0 = np.asarray(psi0, dtype=float)
        psi1 = np.asarray(psi1, dtype=float)
        a = np.zeros_like(psi0)
        a[..., 0, 0] = 1.0 + g0 * psi0[..., 0, 0]
        a[..., 0, 1] = g0 * psi0[..., 0, 1]
        a[..., 1, 0] = g0 * psi0[..., 1, 0]
        a[..., 1, 1] = 1.0 + g0 * psi0[..., 1, 1]
        det_a = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        inv = np.empty_like(a)
        inv[..., 0, 0] = a[..., 1, 1]
        inv[..., 1, 1] = a[..., 0, 0]
        inv[..., 0, 1] = -a[..., 0, 1]
        inv[..., 1, 0] = -a[..., 1, 0]
        inv /= det_a[..., None, None]
        diff = psi0 - psi1
        tr_d_inv = np.einsum("...ij,...ji->...", diff, inv)
        tr_d_inv2 = np.einsum("...ij,...ji->...", diff, inv @ inv)
        den = 1.0 - g0 * tr_d_inv
        bad = np.abs(den) <= _RAO_DENOMINATOR_TOL
        if np.any(bad):
            raise NearSingularDenominatorError(
                f"instance {_first_bad(bad, index_base)}: Rao denominator is "
                "numerically zero"
            )
        return g0 * tr_d_inv2 / den
    raise ValueError(f"unknown statistic {name!r}")


def _scalar(name: str, psis: PsiPair, k, n) -> float:
    return float(_batch_values(name, psis.psi0[None], psis.psi1[None], k, n)[0])


def glr(psis: PsiPair, k: int, n: int) -> float:
    """Generalized likelihood ratio, evaluated internally in log domain."""
    return _scalar(DetectorKind.GLR.value, psis, k, n)


def two_step_glr(psis: PsiPair) -> float:
    """Two-step GLR (Per-ACE): the trace ratio ``Tr[psi0] / Tr[psi1]``."""
    return _scalar(DetectorKind.TWO_STEP_GLR.value, psis, None, None)


def rao(psis: PsiPair, k: int, n: int) -> float:
    """Rao statistic; may be negative, thresholding is still valid."""
    return _scalar(DetectorKind.RAO.value, psis, k, n)


def wald(psis: PsiPair, k: int, n: int) -> float:
    """Wald statistic ``gamma1_hat (Tr[psi0] - Tr[psi1])``; nonnegative."""
    return _scalar(DetectorKind.WALD.value, psis, k, n)


def _g_gamma(ratio: float, k: int, n: int) -> float:
    # (largest eigenvalue) * (scale MLE) is invariant under common scaling of
    # the eigenvalue pair, so it is a function of the ratio alone: evaluate
    # the MLE on the representative pair (ratio, 1).
    ratio = float(ratio)
    if ratio < 1.0 - 1e-12:
        raise ValueError(f"eigenvalue ratio must be >= 1, got {ratio!r}")
    ratio = max(ratio, 1.0)
    g, _ = _gamma_hat(ratio + 1.0, ratio, k, n)
    return float(ratio * g)


def g_gamma_num(ratio: float, k: int, n: int) -> float:
    """Auxiliary function of ``t1/t2`` equal to ``l1 * gamma0_hat``."""
    return _g_gamma(ratio, k, n)


def g_gamma_den(t3: float, k: int, n: int) -> float:
    """Auxiliary function of ``t3`` equal to ``l3 * gamma1_hat``."""
    return _g_gamma(t3, k, n)


def mis_form(kind, t, k: int, n: int) -> float:
    """Detector value from the maximal invariant alone.

    Available for GLR, two-step GLR and Wald; the Rao statistic has no
    closed invariant-form expression here and raises
    :class:`UnsupportedFormError`.
    """
    kind = DetectorKind(kind)
    if isinstance(t, MISVector):
        t1, t2, t3 = t.t1, t.t2, t.t3
    else:
        t1, t2, t3 = (float(x) for x in t)
    if kind is DetectorKind.TWO_STEP_GLR:
        return (t1 + t2) / (1.0 + t3)
    if kind is DetectorKind.WALD:
        gd = _g_gamma(t3, k, n)
        return gd * ((t1 / t3) + (t2 / t3) - (1.0 + 1.0 / t3))
    if kind is DetectorKind.GLR:
        gn = _g_gamma(t1 / t2, k, n)
        gd = _g_gamma(t3, k, n)
        expo = -n / (k + 1.0)
        logval = (
            expo * (np.log(t3) + np.log(gn) - np.log(t1) - np.log(gd))
            + np.log1p(gn)
            + np.log1p((t2 / t1) * gn)
            - np.log1p(gd)
            - np.log1p(gd / t3)
        )
        return float(np.exp(logval))
    raise UnsupportedFormError("the Rao statistic has no MIS-only form")


def evaluate(kind, stat, form=DetectorForm.DIRECT) -> DetectorOutput:
    """Evaluate a detector on a :class:`SufficientStatistic`.

    Computes the quadratic forms, dispatches to the requested form, and
    returns the value together with the eigenvalues and scale estimates used.
    """
    kind = DetectorKind(kind)
    form = DetectorForm(form)
    psis = compute_psi(stat)
    if form is DetectorForm.MIS_FORM:
        value = mis_form(kind, mis(psis), stat.k, stat.n)
    elif kind is DetectorKind.GLR:
        value = glr(psis, stat.k, stat.n)
    elif kind is DetectorKind.TWO_STEP_GLR:
        value = two_step_glr(psis)
    elif kind is DetectorKind.RAO:
        value = rao(psis, stat.k, stat.n)
    else:
        value = wald(psis, stat.k, stat.n)
    if kind is DetectorKind.TWO_STEP_GLR:
        g0 = g1 = None
    else:
        est = scale_estimates(psis, stat.k, stat.n)
        g0, g1 = est.gamma0_hat, est.gamma1_hat
    return DetectorOutput(
        value=float(value),
        kind=kind,
        form=form,
        gamma0_hat=g0,
        gamma1_hat=g1,
        eigenvalues=psis.lam,
    )
