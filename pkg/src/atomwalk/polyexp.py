"""Exact algebra on polynomial-exponential functions of one variable.

A :class:`PolyExp` is a finite sum ``sum_k p_k(t) * exp(-lambda_k t)`` whose
exponents live on the two-generator lattice ``a*gamma + b*mu`` with
``mu = kappa + i*delta``.  Keeping exponents as integer pairs makes the
resonant (secular) case of a first-order decay ODE exact.  Once functions
are conjugated or mixed, exponents leave the lattice and are carried by
:class:`NumericPolyExp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Coefficients whose L1 weight falls below this fraction of the largest
# weight in the function are dropped.
COEFF_FLOOR = 1e-14
# Distinct exponents closer than this (times the basis scale) are an error in
# the keyed layer and are merged in the numeric layer.
COLLISION_TOL = 1e-12

Key = tuple[int, int]


class NumericCollision(ValueError):
    """Two distinct lattice exponents have (numerically) the same value."""


class Divergent(ValueError):
    """An improper integral over [0, inf) does not converge."""


@dataclass(frozen=True)
class ExpBasis:
    """Generators of the exponent lattice: ``gamma`` and ``mu = kappa + i delta``."""

    gamma: float
    mu: complex

    def value(self, key: Key) -> complex:
        return key[0] * self.gamma + key[1] * self.mu


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c[:0]
    return c[: nz[-1] + 1]


def _l1_weights(c: np.ndarray, lam: complex) -> np.ndarray:
    # log of |c_j| * int_0^inf t^j e^{-Re(lam) t} dt, the natural size of a monomial
    j = np.arange(c.size)
    logw = np.array([math.lgamma(k + 1) for k in j]) - (j + 1) * math.log(lam.real)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(c)) + logw


def _apply_floor(terms: dict, values: Mapping) -> dict:
    """Zero tiny coefficients (log-weight comparison) and trim trailing zeros.

    Terms that do not decay have no finite weight; they are kept as they are
    and do not set the scale for the others.
    """
    logs = {k: _l1_weights(c, values[k]) for k, c in terms.items() if c.size and values[k].real > 0}
    finite = [float(np.max(v)) for v in logs.values()]
    top = max(finite) if finite else -math.inf
    cut = top + math.log(COEFF_FLOOR) if np.isfinite(top) else math.inf
    out = {}
    for k, c in terms.items():
        if not c.size:
            continue
        if k in logs:
            c = np.where(logs[k] < cut, 0.0, c)
        c = _trim(c)
        if c.size:
            out[k] = c
    return out


def _polyval(c: np.ndarray, t):
    # Horner, low-to-high coefficient order
    acc = np.zeros_like(np.asarray(t, dtype=complex))
    for cj in c[::-1]:
        acc = acc * t + cj
    return acc


class PolyExp:
    """Sum of ``p_key(t) * exp(-value(key) t)`` with integer lattice keys.

    ``terms`` maps ``(a, b)`` to the coefficient vector of ``t^0, t^1, ...``.
    Instances are treated as immutable.
    """

    __slots__ = ("basis", "terms")

    def __init__(self, basis: ExpBasis, terms: Mapping[Key, Sequence[complex]] | None = None):
        self.basis = basis
        raw = {}
        for k, c in (terms or {}).items():
            arr = np.asarray(c, dtype=complex).ravel()
            if arr.size:
                raw[(int(k[0]), int(k[1]))] = arr
        self.terms: dict[Key, np.ndarray] = _apply_floor(
            raw, {k: basis.value(k) for k in raw}
        )

    @classmethod
    def zero(cls, basis: ExpBasis) -> "PolyExp":
        return cls(basis)

    @classmethod
    def monomial(cls, basis: ExpBasis, key: Key, coeff: complex = 1.0, power: int = 0) -> "PolyExp":
        c = np.zeros(power + 1, dtype=complex)
        c[power] = coeff
        return cls(basis, {key: c})

    # -- algebra -----------------------------------------------------------
    def _check(self, other: "PolyExp") -> None:
        if other.basis != self.basis:
            raise ValueError("PolyExp operands use different exponent bases")

    def __add__(self, other: "PolyExp") -> "PolyExp":
        if not isinstance(other, PolyExp):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            if k in out:
                a = out[k]
                n = max(a.size, c.size)
                s = np.zeros(n, dtype=complex)
                s[: a.size] += a
                s[: c.size] += c
                out[k] = s
            else:
                out[k] = c
        return PolyExp(self.basis, out)

    def __neg__(self) -> "PolyExp":
        return self.scale(-1.0)

    def __sub__(self, other: "PolyExp") -> "PolyExp":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PolyExp):
            self._check(other)
            out: dict[Key, np.ndarray] = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    k = (k1[0] + k2[0], k1[1] + k2[1])
                    prod = np.convolve(c1, c2)
                    if k in out:
                        a = out[k]
                        n = max(a.size, prod.size)
                        s = np.zeros(n, dtype=complex)
                        s[: a.size] += a
                        s[: prod.size] += prod
                        out[k] = s
                    else:
                        out[k] = prod
            return PolyExp(self.basis, out)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def scale(self, c: complex) -> "PolyExp":
        if c == 0:
            return PolyExp(self.basis)
        return PolyExp(self.basis, {k: v * c for k, v in self.terms.items()})

    def derivative(self) -> "PolyExp":
        out = {}
        for k, c in self.terms.items():
            lam = self.basis.value(k)
            d = -lam * c
            if c.size > 1:
                d[:-1] += c[1:] * np.arange(1, c.size)
            out[k] = d
        return PolyExp(self.basis, out)

    # -- evaluation --------------------------------------------------------
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("PolyExp is defined for t >= 0")
        acc = np.zeros(t.shape, dtype=complex)
        for k, c in self.terms.items():
            acc = acc + _polyval(c, t) * np.exp(-self.basis.value(k) * t)
        return acc if acc.ndim else complex(acc)

    def is_zero(self) -> bool:
        return not self.terms

    def keys(self) -> set[Key]:
        return set(self.terms)

    def degree(self) -> int:
        return max((c.size - 1 for c in self.terms.values()), default=-1)

    def max_abs_coeff(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.terms.values()), default=0.0)

    def to_numeric(self) -> "NumericPolyExp":
        return NumericPolyExp(
            [(self.basis.value(k), c) for k, c in sorted(self.terms.items())],
            scale=self.basis.gamma,
        )

    def __repr__(self) -> str:
        parts = [f"{k}: {np.round(c, 12).tolist()}" for k, c in sorted(self.terms.items())]
        return f"PolyExp({{{', '.join(parts)}}})"


def pe_sum(fs: Iterable[PolyExp], basis: ExpBasis) -> PolyExp:
    """Sum of many functions with a single normalization pass."""
    acc: dict[Key, np.ndarray] = {}
    for f in fs:
        for k, c in f.terms.items():
            a = acc.get(k)
            if a is None:
                acc[k] = c.copy()
            elif a.size >= c.size:
                a[: c.size] += c
            else:
                c = c.copy()
                c[: a.size] += a
                acc[k] = c
    return PolyExp(basis, acc)


def check_collisions(basis: ExpBasis, keys: Iterable[Key]) -> None:
    keys = sorted(set(keys))
    vals = [basis.value(k) for k in keys]
    tol = COLLISION_TOL * basis.gamma
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            if abs(vals[i] - vals[j]) < tol:
                raise NumericCollision(
                    f"exponents {keys[i]} and {keys[j]} coincide numerically "
                    f"({vals[i]!r}); perturb kappa or delta"
                )


def solve_decay_ode(rate: Key, forcing: PolyExp) -> PolyExp:
    """Solve ``y' = -value(rate) y + forcing`` with ``y(0) = 0`` exactly.

    Off-resonant forcing terms keep their key (plus a compensating constant
    at ``rate``); a forcing term at ``rate`` itself is integrated, raising the
    polynomial degree by one.
    """
    rate = (int(rate[0]), int(rate[1]))
    if rate == (0, 0):
        raise ValueError("decay rate key must be nonzero")
    basis = forcing.basis
    check_collisions(basis, list(forcing.terms) + [rate])
    r = basis.value(rate)
    out: dict[Key, np.ndarray] = {}
    at_rate = np.zeros(1, dtype=complex)
    for k, p in forcing.terms.items():
        if k == rate:
            anti = np.zeros(p.size + 1, dtype=complex)
            anti[1:] = p / np.arange(1, p.size + 1)
            n = max(anti.size, at_rate.size)
            s = np.zeros(n, dtype=complex)
            s[: anti.size] += anti
            s[: at_rate.size] += at_rate
            at_rate = s
            continue
        # q' + d q = p  =>  q = sum_m (-1)^m p^(m) / d^(m+1)
        d = r - basis.value(k)
        q = np.zeros(p.size, dtype=complex)
        deriv = p.copy()
        sign = 1.0
        for m in range(p.size):
            q[: deriv.size] += sign * deriv / d ** (m + 1)
            deriv = deriv[1:] * np.arange(1, deriv.size)
            sign = -sign
        out[k] = q
        at_rate[0] -= q[0]
    out[rate] = at_rate
    return PolyExp(basis, out)


class NumericPolyExp:
    """Polynomial-exponential function with arbitrary complex exponents.

    ``terms`` is a list of ``(lam, coeffs)``; value is
    ``sum coeffs[j] t^j exp(-lam t)``.  Exponents within
    ``COLLISION_TOL * scale`` of each other are merged.
    """

    __slots__ = ("scale", "terms")

    def __init__(self, terms: Iterable[tuple[complex, Sequence[complex]]] = (), scale: float = 1.0):
        self.scale = float(scale)
        merged: list[list] = []
        tol = COLLISION_TOL * self.scale
        for lam, c in terms:
            lam = complex(lam)
            c = np.asarray(c, dtype=complex).ravel()
            for slot in merged:
                if abs(slot[0] - lam) <= tol:
                    a = slot[1]
                    n = max(a.size, c.size)
                    s = np.zeros(n, dtype=complex)
                    s[: a.size] += a
                    s[: c.size] += c
                    slot[1] = s
                    break
            else:
                merged.append([lam, c.copy()])
        self.terms: list[tuple[complex, np.ndarray]] = [
            (lam, _trim(c)) for lam, c in merged if _trim(c).size
        ]

    def conj(self) -> "NumericPolyExp":
        return NumericPolyExp(
            [(lam.conjugate(), np.conj(c)) for lam, c in self.terms], scale=self.scale
        )

    def __add__(self, other: "NumericPolyExp") -> "NumericPolyExp":
        return NumericPolyExp(list(self.terms) + list(other.terms), scale=self.scale)

    def __mul__(self, other):
        if isinstance(other, NumericPolyExp):
            return NumericPolyExp(
                [
                    (l1 + l2, np.convolve(c1, c2))
                    for l1, c1 in self.terms
                    for l2, c2 in other.terms
                ],
                scale=self.scale,
            )
        if isinstance(other, (int, float, complex, np.number)):
            return NumericPolyExp([(l, c * other) for l, c in self.terms], scale=self.scale)
        return NotImplemented

    __rmul__ = __mul__

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros(t.shape, dtype=complex)
        for lam, c in self.terms:
            acc = acc + _polyval(c, t) * np.exp(-lam * t)
        return acc if acc.ndim else complex(acc)

    def exponents(self) -> list[complex]:
        return [lam for lam, _ in self.terms]

    def is_zero(self) -> bool:
        return not self.terms

    def integrate(self) -> complex:
        """``int_0^inf f(t) dt`` in closed form."""
        total = 0j
        for lam, c in self.terms:
            if lam.real <= 0:
                raise Divergent(f"exponent {lam!r} has nonpositive real part")
            j = np.arange(c.size)
            fact = np.array([math.factorial(k) for k in j], dtype=float)
            total += complex(np.sum(c * fact / lam ** (j + 1)))
        return total

    def __repr__(self) -> str:
        return f"NumericPolyExp({[(lam, c.tolist()) for lam, c in self.terms]})"


def npe_integrate_inf(f: NumericPolyExp) -> complex:
    return f.integrate()


# -- packed (vectorized) representation -------------------------------------
@dataclass
class Packed:
    """A family of functions sharing one exponent list.

    ``coef[i, e, j]`` is the ``t^j`` coefficient of function ``i`` at exponent
    ``exps[e]``.
    """

    exps: np.ndarray
    coef: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        powers = t ** np.arange(self.coef.shape[2])
        return np.einsum("iej,j,e->i", self.coef, powers, np.exp(-self.exps * t))


def pack(funcs: Sequence[NumericPolyExp], scale: float = 1.0) -> Packed:
    exps: list[complex] = []
    tol = COLLISION_TOL * scale
    deg = 1
    index: list[list[int]] = []
    for f in funcs:
        idx = []
        for lam, c in f.terms:
            for e, known in enumerate(exps):
                if abs(known - lam) <= tol:
                    break
            else:
                exps.append(lam)
                e = len(exps) - 1
            idx.append(e)
            deg = max(deg, c.size)
        index.append(idx)
    coef = np.zeros((len(funcs), max(len(exps), 1), deg), dtype=complex)
    for i, f in enumerate(funcs):
        for e, (_, c) in zip(index[i], f.terms):
            coef[i, e, : c.size] += c
    if not exps:
        exps = [1.0]
    return Packed(np.array(exps, dtype=complex), coef)


def _moment_matrix(lam: complex, d1: int, d2: int) -> np.ndarray:
    """``W[j, k] = int_0^inf t^(j+k) exp(-lam t) dt``."""
    if lam.real <= 0:
        raise Divergent(f"exponent {lam!r} has nonpositive real part")
    s = np.add.outer(np.arange(d1), np.arange(d2))
    logfact = np.array([math.lgamma(k + 1) for k in range(d1 + d2)])
    return np.exp(logfact[s] - (s + 1) * np.log(lam))


def gram(a: Packed, b: Packed) -> np.ndarray:
    """``G[i, k] = int_0^inf a_i(t) conj(b_k(t)) dt`` for packed families."""
    out = np.zeros((a.coef.shape[0], b.coef.shape[0]), dtype=complex)
    da = a.coef.shape[2]
    db = b.coef.shape[2]
    for e1, l1 in enumerate(a.exps):
        A = a.coef[:, e1, :]
        if not A.any():
            continue
        for e2, l2 in enumerate(b.exps):
            B = b.coef[:, e2, :]
            if not B.any():
                continue
            W = _moment_matrix(l1 + np.conj(l2), da, db)
            out += A @ W @ B.conj().T
    return out


def quadratic_curve(m: np.ndarray, p: Packed, scale: float = 1.0) -> NumericPolyExp:
    """``sum_{k,l} m[k, l] p_k(t) conj(p_l(t))`` as a :class:`NumericPolyExp`."""
    terms = []
    d = p.coef.shape[2]
    for e1, l1 in enumerate(p.exps):
        for e2, l2 in enumerate(p.exps):
            z = p.coef[:, e1, :].T @ m @ p.coef[:, e2, :].conj()
            c = np.array([np.trace(np.fliplr(z), offset=d - 1 - s) for s in range(2 * d - 1)])
            terms.append((l1 + np.conj(l2), c))
    return NumericPolyExp(terms, scale=scale)
