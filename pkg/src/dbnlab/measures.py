"""Even measures, their Gaussian-integrability tails, and their transforms.

An EvenMeasure is an immutable description of a finite positive even measure
rho on the line.  The transform of interest throughout the package is

    H_{rho,lam}(z) = int e^{izt} e^{lam t^2} d rho(t),

entire in z exactly when e^{lam t^2} is rho-integrable with room to spare,
which is what the TailSet records.  eval_H dispatches per kind: finite atom
sets and several named densities have exact closed forms; everything else
goes through the adaptive quadrature in numerics.

Atom convention: an entry (t, w) with t > 0 is the symmetric pair carrying
total weight w, split w/2 at each of +-t; an entry (0, w) is a plain atom at
the origin.  Evenness is therefore structural, not checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mp, mpc, mpf

from . import numerics
from .precision import (
    DbnlabError,
    EntirenessError,
    PrecisionContext,
    RangeError,
)
from .numerics import TransformEval

__all__ = [
    "TailSet",
    "EvenMeasure",
    "DecayDescriptor",
    "symmetric_atoms",
    "named_density",
    "tail_set",
    "apply_gaussian_multiplier",
    "convolve_gaussian",
    "eval_H",
    "eval_H_parts",
    "transform_function",
    "partial_gaussian_mass",
]

ATOMIC_KINDS = ("SymmetricAtoms",)
DENSITY_KINDS = (
    "RiemannPhi",
    "Gaussian",
    "ExpPower",
    "CoshExp",
    "DBNClass",
    "PolyaQuartic",
    "AbsExpGaussian",
    "PolyDecayGaussian",
    "Case6",
    "Case8",
    "SexticField",
)
#: density kinds whose transform is evaluated by quadrature (no closed form)
QUADRATURE_KINDS = (
    "RiemannPhi",
    "ExpPower",
    "CoshExp",
    "DBNClass",
    "PolyaQuartic",
    "AbsExpGaussian",
    "PolyDecayGaussian",
    "SexticField",
)


@dataclass(frozen=True)
class TailSet:
    """The set {b : int e^{b x^2} d rho < infinity} in symbolic form."""

    shape: str  # AllReals | OpenUpTo | ClosedUpTo
    b0: mpf = None

    def contains_interior(self, lam) -> bool:
        """Whether lam sits strictly inside the tail set."""
        if self.shape == "AllReals":
            return True
        return mpf(lam) < self.b0

    def contains(self, lam) -> bool:
        if self.shape == "AllReals":
            return True
        if self.shape == "OpenUpTo":
            return mpf(lam) < self.b0
        return mpf(lam) <= self.b0

    def __str__(self):
        if self.shape == "AllReals":
            return "(-inf, inf)"
        br = ")" if self.shape == "OpenUpTo" else "]"
        return "(-inf, %s%s" % (mpmath.nstr(self.b0, 12), br)


@dataclass(frozen=True)
class DecayDescriptor:
    """Upper envelope f(t) <= exp(-g(t)) for t >= t_min, with g' available."""

    g: callable
    g_deriv: callable
    t_min: float


@dataclass(frozen=True)
class EvenMeasure:
    kind: str
    atoms: tuple = ()
    density_kind: str = None
    params: tuple = ()
    base: "EvenMeasure" = None
    b0: mpf = None
    lam: mpf = None
    norm: mpf = None

    # -- construction-time checks ------------------------------------------
    def __post_init__(self):
        if self.kind == "SymmetricAtoms":
            if not self.atoms:
                raise ValueError("SymmetricAtoms needs at least one atom")
            zero_count = sum(1 for t, _ in self.atoms if t == 0)
            if zero_count > 1:
                raise ValueError("at most one atom at the origin")
            for t, w in self.atoms:
                if t < 0 or not (w > 0):
                    raise ValueError("atoms need position >= 0 and weight > 0")
        elif self.kind == "NamedDensity":
            if self.density_kind not in DENSITY_KINDS:
                raise ValueError("unknown density kind %r" % (self.density_kind,))
        elif self.kind == "GaussianConvolution":
            if self.base is None or self.base.kind != "SymmetricAtoms":
                raise ValueError("GaussianConvolution requires an atomic base")
            if not (self.b0 > 0):
                raise ValueError("GaussianConvolution requires b0 > 0")
        elif self.kind == "MultipliedMeasure":
            if self.base is None:
                raise ValueError("MultipliedMeasure requires a base measure")
        else:
            raise ValueError("unknown measure kind %r" % (self.kind,))

    # -- parameter access ---------------------------------------------------
    def param(self, name):
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    def cache_key(self):
        return (self.kind, self.density_kind, self.params, self.atoms, self.b0)

    # -- density evaluation (quadrature kinds and convolution) --------------
    def density_value(self, t, dps: int, tol_digits: int):
        """f(t) at t >= 0 for kinds that carry a density."""
        if self.kind == "NamedDensity":
            return _density_value_cached(
                self.density_kind, self.params, t, dps, tol_digits
            )
        if self.kind == "GaussianConvolution":
            return _conv_density_cached(self.atoms_key(), self.b0, t, dps)
        raise DbnlabError("%s has no pointwise density" % self.kind)

    def atoms_key(self):
        return self.base.atoms if self.base is not None else self.atoms

    # -- decay envelope for tail truncation ---------------------------------
    def decay_descriptor(self) -> DecayDescriptor:
        return _decay_descriptor(self)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def symmetric_atoms(pairs, ctx: PrecisionContext = None) -> EvenMeasure:
    """Atomic even measure from (position, total weight) pairs.

    Position 0 entries are plain origin atoms; positive positions denote the
    symmetric +-t pair with the given total weight.
    """
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        atoms = tuple(sorted((mpf(t), mpf(w)) for t, w in pairs))
    return EvenMeasure(kind="SymmetricAtoms", atoms=atoms)


def named_density(density_kind: str, ctx: PrecisionContext = None, **params) -> EvenMeasure:
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        frozen = []
        for k in sorted(params):
            v = params[k]
            if isinstance(v, (list, tuple)):
                frozen.append((k, tuple(mpf(x) for x in v)))
            elif isinstance(v, int) and k in ("q", "m"):
                frozen.append((k, int(v)))
            else:
                frozen.append((k, mpf(v)))
        m = EvenMeasure(
            kind="NamedDensity", density_kind=density_kind, params=tuple(frozen)
        )
        _validate_density_params(m)
        return m


def _validate_density_params(m: EvenMeasure):
    k = m.density_kind
    if k == "Gaussian" and not (m.param("b0") > 0):
        raise ValueError("Gaussian requires b0 > 0")
    if k == "ExpPower" and m.param("q") < 2:
        raise ValueError("ExpPower requires q >= 2")
    if k == "CoshExp" and not (m.param("a") > 0):
        raise ValueError("CoshExp requires a > 0")
    if k == "PolyaQuartic" and not (m.param("a") > 0):
        raise ValueError("PolyaQuartic requires a > 0")
    if k == "SexticField" and not (m.param("a") > 0):
        raise ValueError("SexticField requires a > 0")
    if k == "AbsExpGaussian" and not (m.param("a") > 0 and m.param("lam") > 0):
        raise ValueError("AbsExpGaussian requires a > 0 and lam > 0")
    if k == "PolyDecayGaussian" and not (
        m.param("theta") > mpf(1) / 2 and m.param("lam") > 0
    ):
        raise ValueError("PolyDecayGaussian requires theta > 1/2 and lam > 0")
    if k == "DBNClass":
        if not (m.param("K") > 0) or m.param("m") < 0:
            raise ValueError("DBNClass requires K > 0 and m >= 0")
        if m.param("alpha") < 0:
            raise ValueError("DBNClass requires alpha >= 0")
        if m.param("alpha") == 0 and m.param("beta") <= 0 and not m.param("a_list"):
            raise ValueError("DBNClass with alpha=0 needs Gaussian decay from beta/a_j")


def convolve_gaussian(base: EvenMeasure, b0, ctx: PrecisionContext = None) -> EvenMeasure:
    """rho = base * N(0, 1/(2 b0)): atoms smeared by the Gaussian of rate b0.

    A point mass at the origin smears to the plain Gaussian density, so that
    case collapses to the named kind (up to a positive scalar, which nothing
    downstream depends on).
    """
    if base.kind != "SymmetricAtoms":
        raise ValueError("convolve_gaussian needs an atomic base measure")
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        if len(base.atoms) == 1 and base.atoms[0][0] == 0:
            return named_density("Gaussian", ctx, b0=mpf(b0))
        return EvenMeasure(
            kind="GaussianConvolution", base=base, atoms=base.atoms, b0=mpf(b0)
        )


def apply_gaussian_multiplier(
    measure: EvenMeasure, lam, normalize: bool = False, ctx: PrecisionContext = None
) -> EvenMeasure:
    """The measure e^{lam t^2} d rho(t), optionally normalized to mass 1.

    Atoms absorb the multiplier into their weights immediately; a Gaussian
    absorbs it into its rate when normalization is requested (the exponents
    just add); everything else becomes a MultipliedMeasure wrapper, with
    nested wrappers flattened so multipliers compose additively.
    """
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        lam = mpf(lam)
        if normalize and not tail_set(measure).contains_interior(lam):
            raise EntirenessError(
                "multiplier %s leaves the integrability range %s"
                % (lam, tail_set(measure))
            )
        if measure.kind == "SymmetricAtoms":
            scaled = tuple(
                (t, w * mpmath.exp(lam * t * t)) for t, w in measure.atoms
            )
            if normalize:
                total = sum(w for _, w in scaled)
                scaled = tuple((t, w / total) for t, w in scaled)
            return EvenMeasure(kind="SymmetricAtoms", atoms=scaled)
        if (
            normalize
            and measure.kind == "NamedDensity"
            and measure.density_kind == "Gaussian"
        ):
            return named_density("Gaussian", ctx, b0=measure.param("b0") - lam)
        if measure.kind == "MultipliedMeasure":
            total_lam = measure.lam + lam
            base = measure.base
        else:
            total_lam = lam
            base = measure
        norm = None
        if normalize:
            norm = eval_H(base, total_lam, mpf(0), ctx).value.real
        return EvenMeasure(
            kind="MultipliedMeasure", base=base, lam=total_lam, norm=norm
        )


# ---------------------------------------------------------------------------
# tail sets
# ---------------------------------------------------------------------------


def tail_set(measure: EvenMeasure) -> TailSet:
    """Symbolic integrability set {b : int e^{b x^2} d rho < infinity}."""
    if measure.kind == "SymmetricAtoms":
        return TailSet("AllReals")
    if measure.kind == "GaussianConvolution":
        return TailSet("OpenUpTo", measure.b0)
    if measure.kind == "MultipliedMeasure":
        inner = tail_set(measure.base)
        if inner.shape == "AllReals":
            return inner
        return TailSet(inner.shape, inner.b0 - measure.lam)
    k = measure.density_kind
    if k in ("RiemannPhi", "ExpPower", "CoshExp", "PolyaQuartic", "SexticField"):
        return TailSet("AllReals")
    if k == "Gaussian":
        return TailSet("OpenUpTo", measure.param("b0"))
    if k == "DBNClass":
        if measure.param("alpha") > 0:
            return TailSet("AllReals")
        rate = measure.param("beta") + sum(1 / (a * a) for a in measure.param("a_list"))
        return TailSet("OpenUpTo", rate)
    if k in ("AbsExpGaussian", "PolyDecayGaussian"):
        # At b equal to the Gaussian rate the remaining factor (e^{-a|x|} or
        # (1+x^2)^{-theta} with theta > 1/2) is still integrable, so the
        # endpoint belongs to the tail set; the transform is just no longer
        # entire there.
        return TailSet("ClosedUpTo", measure.param("lam"))
    if k == "Case6":
        return TailSet("OpenUpTo", mpf(1))
    if k == "Case8":
        return TailSet("ClosedUpTo", mpf(0))
    raise DbnlabError("unknown kind for tail_set")


def _require_evaluable(measure: EvenMeasure, lam):
    ts = tail_set(measure)
    if ts.contains_interior(lam):
        return
    if ts.shape == "ClosedUpTo" and mpf(lam) == ts.b0:
        return  # boundary evaluation; the integral still converges there
    raise EntirenessError(
        "lambda=%s outside the entireness range %s" % (mpmath.nstr(mpf(lam), 10), ts)
    )


# ---------------------------------------------------------------------------
# cached density evaluation
# ---------------------------------------------------------------------------


@lru_cache(maxsize=400_000)
def _density_value_cached(kind, params, t, dps, tol_digits):
    with mp.workdps(dps):
        p = dict(params)
        if kind == "RiemannPhi":
            return numerics._phi_raw(t, dps, tol_digits)
        if kind == "Gaussian":
            # unnormalized by convention: the family e^{-b0 t^2} is closed
            # under Gaussian multipliers with no prefactor bookkeeping, and
            # scalar multiples never change a zero set
            return mpmath.exp(-p["b0"] * t * t)
        if kind == "ExpPower":
            return mpmath.exp(-(t ** (2 * p["q"])))
        if kind == "CoshExp":
            return mpmath.exp(-p["a"] * mpmath.cosh(t))
        if kind == "DBNClass":
            val = p["K"] * mpmath.exp(
                -p["alpha"] * t**4 - p["beta"] * t * t
            )
            if p["m"]:
                val *= t ** (2 * p["m"])
            for a in p["a_list"]:
                r = t * t / (a * a)
                val *= (1 + r) * mpmath.exp(-r)
            return val
        if kind == "PolyaQuartic":
            q = p["q"]
            return mpmath.exp(
                -p["a"] * t ** (4 * q) + p["b"] * t ** (2 * q) + p["c"] * t * t
            )
        if kind == "SexticField":
            return mpmath.exp(-p["a"] * t**6 - p["b"] * t**4 - p["c"] * t * t)
        if kind == "AbsExpGaussian":
            return mpmath.exp(-p["a"] * t - p["lam"] * t * t)
        if kind == "PolyDecayGaussian":
            return (1 + t * t) ** (-p["theta"]) * mpmath.exp(-p["lam"] * t * t)
        raise DbnlabError("density kind %r has no pointwise form" % kind)


@lru_cache(maxsize=200_000)
def _conv_density_cached(atoms, b0, t, dps):
    with mp.workdps(dps):
        pref = mpmath.sqrt(b0 / mp.pi)
        total = mpf(0)
        for tj, w in atoms:
            if tj == 0:
                total += w * mpmath.exp(-b0 * t * t)
            else:
                total += (
                    w
                    * (
                        mpmath.exp(-b0 * (t - tj) ** 2)
                        + mpmath.exp(-b0 * (t + tj) ** 2)
                    )
                    / 2
                )
        return pref * total


def _decay_descriptor(measure: EvenMeasure) -> DecayDescriptor:
    if measure.kind == "GaussianConvolution":
        b0 = measure.b0
        tmax = max(t for t, _ in measure.atoms)
        W = sum(w for _, w in measure.atoms)
        logC = mpmath.log(W * mpmath.sqrt(b0 / mp.pi))
        return DecayDescriptor(
            g=lambda t: b0 * (t - tmax) ** 2 - logC,
            g_deriv=lambda t: 2 * b0 * (t - tmax),
            t_min=float(tmax) + 0.25,
        )
    p = dict(measure.params)
    kind = measure.density_kind
    if kind == "RiemannPhi":
        logC = mpmath.log(mpf(40))
        return DecayDescriptor(
            g=lambda u: mp.pi * mpmath.exp(2 * u) - mpf(9) / 2 * u - logC,
            g_deriv=lambda u: 2 * mp.pi * mpmath.exp(2 * u) - mpf(9) / 2,
            t_min=0.5,
        )
    if kind == "Gaussian":
        b0 = p["b0"]
        return DecayDescriptor(
            g=lambda t: b0 * t * t,
            g_deriv=lambda t: 2 * b0 * t,
            t_min=0.25,
        )
    if kind == "ExpPower":
        q = p["q"]
        return DecayDescriptor(
            g=lambda t: t ** (2 * q),
            g_deriv=lambda t: 2 * q * t ** (2 * q - 1),
            t_min=0.25,
        )
    if kind == "CoshExp":
        a = p["a"]
        return DecayDescriptor(
            g=lambda t: a * mpmath.cosh(t),
            g_deriv=lambda t: a * mpmath.sinh(t),
            t_min=0.25,
        )
    if kind == "DBNClass":
        K, m_exp, alpha, beta = p["K"], p["m"], p["alpha"], p["beta"]
        a_list = p["a_list"]
        logK = mpmath.log(K)

        def g(t):
            val = alpha * t**4 + beta * t * t - logK
            if m_exp:
                val -= 2 * m_exp * mpmath.log(t)
            for a in a_list:
                r = t * t / (a * a)
                val += r - mpmath.log(1 + r)
            return val

        def gp(t):
            val = 4 * alpha * t**3 + 2 * beta * t
            if m_exp:
                val -= 2 * m_exp / t
            for a in a_list:
                r = t * t / (a * a)
                val += (2 * t / (a * a)) * (1 - 1 / (1 + r))
            return val

        return DecayDescriptor(g=g, g_deriv=gp, t_min=1.0 if m_exp else 0.25)
    if kind == "PolyaQuartic":
        a, b, c, q = p["a"], p["b"], p["c"], p["q"]
        return DecayDescriptor(
            g=lambda t: a * t ** (4 * q) - b * t ** (2 * q) - c * t * t,
            g_deriv=lambda t: 4 * a * q * t ** (4 * q - 1)
            - 2 * b * q * t ** (2 * q - 1)
            - 2 * c * t,
            t_min=0.25,
        )
    if kind == "SexticField":
        a, b, c = p["a"], p["b"], p["c"]
        return DecayDescriptor(
            g=lambda t: a * t**6 + b * t**4 + c * t * t,
            g_deriv=lambda t: 6 * a * t**5 + 4 * b * t**3 + 2 * c * t,
            t_min=0.25,
        )
    if kind == "AbsExpGaussian":
        a, lam0 = p["a"], p["lam"]
        return DecayDescriptor(
            g=lambda t: a * t + lam0 * t * t,
            g_deriv=lambda t: a + 2 * lam0 * t,
            t_min=0.25,
        )
    if kind == "PolyDecayGaussian":
        theta, lam0 = p["theta"], p["lam"]
        return DecayDescriptor(
            g=lambda t: theta * mpmath.log(1 + t * t) + lam0 * t * t,
            g_deriv=lambda t: 2 * theta * t / (1 + t * t) + 2 * lam0 * t,
            t_min=0.25,
        )
    raise DbnlabError("no decay descriptor for %r" % kind)


# ---------------------------------------------------------------------------
# Case-8 discrete expansion (Poisson-difference reweighted by (1+k^2)/2)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _case8_atoms(dps: int, tol_digits: int, growth_ceil: int = 0) -> tuple:
    """Atoms of the (1+x^2)/2-weighted difference of two Poisson(1/2)s.

    P(W = k) = e^{-1} I_k(1) (Skellam with both rates 1/2); the x^2 weighting
    makes the total mass exactly 1, so no normalization is applied.

    growth_ceil bounds |Im z| for the intended evaluations: truncation keeps
    every atom whose weight times e^{growth_ceil * k} is above tolerance, so
    off-axis amplification of the dropped tail stays below budget.  The
    factorial decay of I_k(1) beats any exponential, so this terminates for
    any growth bound.
    """
    with mp.workdps(dps + 10):
        tol = mpf(10) ** (-(tol_digits + 5))
        pairs = []
        e1 = mpmath.exp(-1)
        w0 = e1 * mpmath.besseli(0, 1) / 2
        pairs.append((mpf(0), w0))
        k = 1
        while True:
            w = (1 + k * k) * e1 * mpmath.besseli(k, 1)
            if k > 3 and w * mpmath.exp(growth_ceil * k) < tol:
                break
            pairs.append((mpf(k), w))
            k += 1
            if k > 2000:
                raise RangeError("case8 atom expansion failed to terminate")
        return tuple(pairs)


# ---------------------------------------------------------------------------
# transform evaluation
# ---------------------------------------------------------------------------


def _atomic_parts(atoms, lam, z, parts, scale=mpf(1)):
    growth = abs(mpmath.im(z))
    out = {p: mpc(0) for p in parts}
    size = mpf(0)
    for t, w in atoms:
        wl = w * mpmath.exp(lam * t * t) / scale
        size += abs(wl) * mpmath.exp(growth * t)
        if t == 0:
            if "value" in out:
                out["value"] += wl
            continue
        if "value" in out:
            out["value"] += wl * mpmath.cos(z * t)
        if "deriv" in out:
            out["deriv"] += -wl * t * mpmath.sin(z * t)
        if "moment2" in out:
            out["moment2"] += wl * t * t * mpmath.cos(z * t)
    err = size * mpf(10) ** (4 - mp.dps)
    return out, err


def _gaussian_parts(b0, lam, z, parts):
    c = b0 - lam
    H = mpmath.sqrt(mp.pi / c) * mpmath.exp(-z * z / (4 * c))
    out = {}
    if "value" in parts:
        out["value"] = H
    if "deriv" in parts:
        out["deriv"] = -z / (2 * c) * H
    if "moment2" in parts:
        out["moment2"] = H * (1 / (2 * c) - z * z / (4 * c * c))
    return out


def _case6_parts(lam, z, parts):
    alpha = 1 - lam
    C = mpmath.sqrt(mp.pi / alpha)
    E = mpmath.exp(-z * z / (4 * alpha))
    P = 1 + mpc(0, 1) * z / (2 * alpha)
    Pp = mpc(0, 1) / (2 * alpha)
    out = {}
    if "value" in parts:
        out["value"] = C * P * E
    if "deriv" in parts:
        out["deriv"] = C * E * (Pp - P * z / (2 * alpha))
    if "moment2" in parts:
        h2 = C * E * (
            P * z * z / (4 * alpha * alpha) - P / (2 * alpha) - Pp * z / alpha
        )
        out["moment2"] = -h2
    return out


def _case8_closed_parts(z, parts):
    # E[e^{izX}] = (1/2) c (1+c) e^{c-1} with c = cos z
    c = mpmath.cos(z)
    s = mpmath.sin(z)
    E = mpmath.exp(c - 1)
    out = {}
    if "value" in parts:
        out["value"] = c * (1 + c) * E / 2
    if "deriv" in parts:
        out["deriv"] = -s * (1 + 3 * c + c * c) * E / 2
    if "moment2" in parts:
        h2 = -(c * (1 + 3 * c + c * c) - s * s * (4 + 5 * c + c * c)) * E / 2
        out["moment2"] = -h2
    return out


def _conv_parts(atoms, b0, lam, z, parts):
    c = b0 - lam
    A = mpmath.sqrt(b0 / c) * mpmath.exp(-z * z / (4 * c))
    S = mpc(0)
    Sp = mpc(0)
    Spp = mpc(0)
    for t, w in atoms:
        if t == 0:
            S += w
            continue
        gam = b0 * t / c
        beta = mpmath.exp(b0 * t * t * (b0 / c - 1))
        S += w * beta * mpmath.cos(gam * z)
        Sp += -w * beta * gam * mpmath.sin(gam * z)
        Spp += -w * beta * gam * gam * mpmath.cos(gam * z)
    out = {}
    if "value" in parts:
        out["value"] = A * S
    if "deriv" in parts:
        out["deriv"] = A * (Sp - z / (2 * c) * S)
    if "moment2" in parts:
        h2 = A * (
            Spp
            - z / c * Sp
            + (z * z / (4 * c * c) - 1 / (2 * c)) * S
        )
        out["moment2"] = -h2
    return out


def eval_H_parts(
    measure: EvenMeasure, lam, z, ctx: PrecisionContext = None, parts=("value",), **kw
) -> dict:
    """Transform H, and optionally H' and -H'', dispatched per measure kind.

    "deriv" is the analytic derivative int (it) e^{izt} e^{lam t^2} d rho;
    "moment2" is int t^2 e^{izt} e^{lam t^2} d rho = -H''(z).
    """
    ctx = ctx or PrecisionContext()
    with ctx.workdps(10):
        lam = mpf(lam)
        z = mpc(z)
        _require_evaluable(measure, lam)

        if measure.kind == "MultipliedMeasure":
            inner = eval_H_parts(measure.base, measure.lam + lam, z, ctx, parts, **kw)
            if measure.norm is not None:
                inner = {
                    p: TransformEval(
                        te.value / measure.norm,
                        te.abs_error_estimate / abs(measure.norm),
                        lam,
                        z,
                        te.n_evals,
                    )
                    for p, te in inner.items()
                }
            return inner

        if measure.kind == "SymmetricAtoms":
            vals, err = _atomic_parts(measure.atoms, lam, z, parts)
            return {p: TransformEval(vals[p], err, lam, z, 0) for p in parts}

        if measure.kind == "GaussianConvolution":
            vals = _conv_parts(measure.atoms, measure.b0, lam, z, parts)
            err = _closed_form_err(vals)
            return {p: TransformEval(vals[p], err, lam, z, 0) for p in parts}

        k = measure.density_kind
        if k == "Gaussian":
            vals = _gaussian_parts(measure.param("b0"), lam, z, parts)
            err = _closed_form_err(vals)
            return {p: TransformEval(vals[p], err, lam, z, 0) for p in parts}
        if k == "Case6":
            vals = _case6_parts(lam, z, parts)
            err = _closed_form_err(vals)
            return {p: TransformEval(vals[p], err, lam, z, 0) for p in parts}
        if k == "Case8":
            if lam == 0:
                vals = _case8_closed_parts(z, parts)
                err = _closed_form_err(vals)
                return {p: TransformEval(vals[p], err, lam, z, 0) for p in parts}
            growth_ceil = int(mpmath.ceil(abs(mpmath.im(z))))
            atoms = _case8_atoms(mp.dps, ctx.tol_digits, growth_ceil)
            vals, err = _atomic_parts(atoms, lam, z, parts)
            return {p: TransformEval(vals[p], err, lam, z, 0) for p in parts}
        # density kinds without closed form: adaptive quadrature
        return numerics.eval_H_density_parts(measure, lam, z, ctx, parts=parts, **kw)


def _closed_form_err(vals):
    scale = max(abs(v) for v in vals.values())
    return max(scale, mpf(1)) * mpf(10) ** (4 - mp.dps)


def eval_H(measure, lam, z, ctx: PrecisionContext = None, **kw) -> TransformEval:
    return eval_H_parts(measure, lam, z, ctx, parts=("value",), **kw)["value"]


class TransformFunction:
    """H_{rho,lam} packaged as a complex function with analytic derivative.

    The zeros module consumes this interface; value_and_derivative shares a
    single quadrature pass for density measures.
    """

    def __init__(self, measure: EvenMeasure, lam, ctx: PrecisionContext = None):
        self.measure = measure
        self.ctx = ctx or PrecisionContext()
        with self.ctx.workdps():
            self.lam = mpf(lam)

    def __call__(self, z) -> mpc:
        return eval_H_parts(self.measure, self.lam, z, self.ctx, ("value",))[
            "value"
        ].value

    def derivative(self, z) -> mpc:
        return eval_H_parts(self.measure, self.lam, z, self.ctx, ("deriv",))[
            "deriv"
        ].value

    def value_and_derivative(self, z):
        parts = eval_H_parts(self.measure, self.lam, z, self.ctx, ("value", "deriv"))
        return parts["value"].value, parts["deriv"].value

    def real_on_axis(self) -> bool:
        """Whether H is real-valued for real z (true for even measures)."""
        return self.measure.kind != "NamedDensity" or self.measure.density_kind != "Case6"


def transform_function(measure, lam, ctx: PrecisionContext = None) -> TransformFunction:
    return TransformFunction(measure, lam, ctx)


def partial_gaussian_mass(measure: EvenMeasure, b, T, ctx: PrecisionContext = None):
    """int_{|x| <= T} e^{b x^2} d rho, for tail-set spot checks.

    Deliberately makes no convergence claim: callers compare values across
    growing T to watch divergence or settling.
    """
    ctx = ctx or PrecisionContext()
    with ctx.workdps(10):
        b = mpf(b)
        T = mpf(T)
        if measure.kind == "SymmetricAtoms":
            return sum(
                w * mpmath.exp(b * t * t) for t, w in measure.atoms if t <= T
            )
        if measure.kind == "MultipliedMeasure":
            return partial_gaussian_mass(measure.base, b + measure.lam, T, ctx)
        dps = mp.dps

        def fn(t):
            return (2 * mpmath.exp(b * t * t) * measure.density_value(t, dps, ctx.tol_digits),)

        vals, _, _ = numerics.integrate_adaptive(
            fn, mpf(0), T, mpf(10) ** (-10), ncomp=1
        )
        return vals[0].real
