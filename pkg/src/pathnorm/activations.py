"""Scalar activations and their curvature-based complexity norms.

For a twice weakly differentiable f the relevant quantities are

    gamma0(f) = int |f''(x)| (|x|+1) dx
    g(x)      = |f(x)| + (|x|+2) |f'(x)|
    gamma(f)  = gamma0(f) + inf_x g(x)

and, when f is smooth except at a single point x0,

    gamma(f)  = gamma0(f) + |f(x0)| + (1+|x0|) (|f'+(x0)| + |f'-(x0)|)

with gamma0 taken over the two smooth pieces. Activations with more than
one singular point are rejected rather than extrapolated.
"""

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, optimize, special

from .errors import MultiSingular, NoAsymptote, NonIntegrable, ParseError
from .expressions import ExprError, compile_expr

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# hard ceiling for window doubling; beyond this we declare divergence
_MAX_WINDOW = 2.0**42


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances for the adaptive quadrature behind gamma0."""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_subdivisions: int = 10_000
    tail_cutoff_tol: float = 1e-6


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True, eq=False)
class Activation:
    """A scalar activation with explicit derivative and asymptote data.

    f, f1, f2 accept floats or numpy arrays. At a singular point f1/f2
    return one arbitrary one-sided value; the true one-sided derivatives
    live in one_sided_f1, aligned with singular_points.
    """

    name: str
    f: Callable
    f1: Callable
    f2: Callable
    asymptote_left: tuple   # (slope, intercept) as x -> -inf
    asymptote_right: tuple  # (slope, intercept) as x -> +inf
    singular_points: tuple = ()
    one_sided_f1: tuple = ()
    closed_form_gamma: Optional[float] = None
    params: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.name}:{inner}"

    def __repr__(self):
        return f"Activation({self.label})"


class GammaParts(NamedTuple):
    gamma0: float
    linear_term: float
    total: float


class LipschitzBound(NamedTuple):
    bound: float
    empirical_sup: float


# ---------------------------------------------------------------------------
# catalog


@lru_cache(maxsize=None)
def relu() -> Activation:
    return Activation(
        name="relu",
        f=lambda x: np.maximum(np.asarray(x, float), 0.0),
        f1=lambda x: np.where(np.asarray(x, float) > 0, 1.0, 0.0),
        f2=lambda x: np.zeros_like(np.asarray(x, float)),
        asymptote_left=(0.0, 0.0),
        asymptote_right=(1.0, 0.0),
        singular_points=(0.0,),
        one_sided_f1=((0.0, 1.0),),
        closed_form_gamma=1.0,
    )


@lru_cache(maxsize=None)
def leaky_relu(lam: float = 0.1) -> Activation:
    if lam == 1.0:
        raise ValueError("lam=1 is the identity, not a leaky rectifier")
    return Activation(
        name="leaky_relu",
        f=lambda x: np.maximum(np.asarray(x, float) * lam, np.asarray(x, float)),
        f1=lambda x: np.where(np.asarray(x, float) > 0, 1.0, lam),
        f2=lambda x: np.zeros_like(np.asarray(x, float)),
        asymptote_left=(lam, 0.0),
        asymptote_right=(1.0, 0.0),
        singular_points=(0.0,),
        one_sided_f1=((lam, 1.0),),
        closed_form_gamma=abs(lam) + 1.0,
        params={"lam": lam},
    )


@lru_cache(maxsize=None)
def sigmoid() -> Activation:
    def f2(x):
        s = special.expit(x)
        return s * (1.0 - s) * (1.0 - 2.0 * s)

    return Activation(
        name="sigmoid",
        f=special.expit,
        f1=lambda x: special.expit(x) * (1.0 - special.expit(x)),
        f2=f2,
        asymptote_left=(0.0, 0.0),
        asymptote_right=(0.0, 1.0),
        closed_form_gamma=1.5,
    )


@lru_cache(maxsize=None)
def tanh() -> Activation:
    return Activation(
        name="tanh",
        f=np.tanh,
        f1=lambda x: 1.0 - np.tanh(x) ** 2,
        f2=lambda x: -2.0 * np.tanh(x) * (1.0 - np.tanh(x) ** 2),
        asymptote_left=(0.0, -1.0),
        asymptote_right=(0.0, 1.0),
        closed_form_gamma=5.0,
    )


@lru_cache(maxsize=None)
def elu(alpha: float = 1.0) -> Activation:
    def f(x):
        x = np.asarray(x, float)
        return np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0)))

    def f1(x):
        x = np.asarray(x, float)
        return np.where(x > 0, 1.0, alpha * np.exp(np.minimum(x, 0.0)))

    def f2(x):
        x = np.asarray(x, float)
        return np.where(x > 0, 0.0, alpha * np.exp(np.minimum(x, 0.0)))

    smooth = alpha == 1.0
    return Activation(
        name="elu",
        f=f,
        f1=f1,
        f2=f2,
        asymptote_left=(0.0, -alpha),
        asymptote_right=(1.0, 0.0),
        singular_points=() if smooth else (0.0,),
        one_sided_f1=() if smooth else ((alpha, 1.0),),
        closed_form_gamma=3.0 if smooth else 3.0 * abs(alpha) + 1.0,
        params={"alpha": alpha},
    )


@lru_cache(maxsize=None)
def gelu() -> Activation:
    def phi(x):
        return np.exp(-0.5 * x * x) / _SQRT_2PI

    closed = float(
        4.0 * (special.ndtr(np.sqrt(2.0)) + (1.0 + np.sqrt(2.0)) / (np.e * np.sqrt(np.pi))) - 3.0
    )
    return Activation(
        name="gelu",
        f=lambda x: np.asarray(x, float) * special.ndtr(x),
        f1=lambda x: special.ndtr(x) + np.asarray(x, float) * phi(x),
        f2=lambda x: phi(x) * (2.0 - np.asarray(x, float) ** 2),
        asymptote_left=(0.0, 0.0),
        asymptote_right=(1.0, 0.0),
        closed_form_gamma=closed,
    )


@lru_cache(maxsize=None)
def softplus() -> Activation:
    return Activation(
        name="softplus",
        f=lambda x: np.logaddexp(0.0, x),
        f1=special.expit,
        f2=lambda x: special.expit(x) * (1.0 - special.expit(x)),
        asymptote_left=(0.0, 0.0),
        asymptote_right=(1.0, 0.0),
        closed_form_gamma=1.0 + 2.0 * np.log(2.0),
    )


def _swish_constants():
    """c1, c2 with gamma(swish_beta) = c1/beta + c2 - 1.

    t2 > 0 solves exp(-t) = (t-2)/(t+2); the curvature of x*sigmoid(x)
    changes sign at -t2 and t2.
    """
    t2 = optimize.brentq(lambda t: np.exp(-t) - (t - 2.0) / (t + 2.0), 2.0 + 1e-9, 10.0)
    s = special.expit(t2)
    sp = s * (1.0 - s)
    c1 = 4.0 * t2 * t2 * sp
    c2 = 2.0 * (2.0 * t2 * sp + 2.0 * s - 1.0)
    return float(c1), float(c2)


@lru_cache(maxsize=None)
def swish(beta: float = 1.0) -> Activation:
    if beta <= 0:
        raise ValueError("swish needs beta > 0")

    def f(x):
        x = np.asarray(x, float)
        return x * special.expit(beta * x)

    def f1(x):
        x = np.asarray(x, float)
        s = special.expit(beta * x)
        return s * (1.0 + beta * x * (1.0 - s))

    def f2(x):
        x = np.asarray(x, float)
        s = special.expit(beta * x)
        return beta * s * (1.0 - s) * (2.0 + beta * x * (1.0 - 2.0 * s))

    c1, c2 = _swish_constants()
    return Activation(
        name="swish",
        f=f,
        f1=f1,
        f2=f2,
        asymptote_left=(0.0, 0.0),
        asymptote_right=(1.0, 0.0),
        closed_form_gamma=c1 / beta + c2 - 1.0,
        params={"beta": beta},
    )


def catalog():
    """The eight built-in activations at their default hyperparameters."""
    return [relu(), leaky_relu(0.1), sigmoid(), tanh(), elu(1.0), gelu(), softplus(), swish(1.0)]


_FACTORIES = {
    "relu": relu,
    "leaky_relu": leaky_relu,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "elu": elu,
    "gelu": gelu,
    "softplus": softplus,
    "swish": swish,
}

_PARAM_ALIASES = {"lambda": "lam"}


def make_activation(name: str, **params) -> Activation:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ParseError(f"unknown activation {name!r}") from None
    params = {_PARAM_ALIASES.get(k, k): v for k, v in params.items()}
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParseError(f"bad parameters for {name}: {exc}") from None


def by_name(ref: str) -> Activation:
    """Resolve 'name', 'name:key=val,...' or 'file:path.json'."""
    if ref.startswith("file:"):
        return load_custom(ref[5:])
    name, _, rest = ref.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ParseError(f"malformed activation parameter {item!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise ParseError(f"non-numeric activation parameter {item!r}") from None
    return make_activation(name.strip(), **params)


def load_custom(path) -> Activation:
    """Build an activation from a JSON file of expressions and metadata."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read activation file: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", exc.lineno, exc.colno)
    try:
        fns = {key: compile_expr(raw[key]) for key in ("f", "f1", "f2")}
        sing = tuple(float(v) for v in raw.get("singular_points", ()))
        one_sided = tuple((float(l), float(r)) for l, r in raw.get("one_sided_f1", ()))
        left = tuple(float(v) for v in raw["asymptote_left"])
        right = tuple(float(v) for v in raw["asymptote_right"])
    except KeyError as exc:
        raise ParseError(f"activation file misses key {exc}")
    except (ExprError, TypeError, ValueError) as exc:
        raise ParseError(f"bad activation file {path}: {exc}")
    if len(one_sided) != len(sing):
        raise ParseError("one_sided_f1 must align with singular_points")
    closed = raw.get("closed_form_gamma")
    return Activation(
        name=str(raw.get("name", "custom")),
        f=fns["f"],
        f1=fns["f1"],
        f2=fns["f2"],
        asymptote_left=left,
        asymptote_right=right,
        singular_points=sing,
        one_sided_f1=one_sided,
        closed_form_gamma=None if closed is None else float(closed),
    )


# ---------------------------------------------------------------------------
# tail estimates

# Integrating |f''|(|x|+1) by parts over [X, inf) against the asymptote
# (c, d) gives exactly |(c - d) - (f'(X)(X+1) - f(X))| whenever f'' keeps
# one sign out there. The same estimate drives the window search, so a
# polynomially growing f walks the window to the cap and is rejected.


def tail_weight_right(act: Activation, x: float) -> float:
    c, d = act.asymptote_right
    return abs((c - d) - (float(act.f1(x)) * (x + 1.0) - float(act.f(x))))


def tail_weight_left(act: Activation, x: float) -> float:
    a, b = act.asymptote_left
    return abs(float(act.f1(-x)) * (x + 1.0) + float(act.f(-x)) - (a + b))


def _sign_stable(act: Activation, x: float) -> bool:
    probes = x * np.array([1.0, 2.0, 4.0, 8.0, 16.0, 64.0])
    for side in (probes, -probes):
        vals = np.asarray(act.f2(side), float)
        signs = np.sign(vals[np.abs(vals) > 0])
        if signs.size and (signs != signs[0]).any():
            return False
    return True


def integration_window(act: Activation, cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Smallest doubling window [-X, X] whose weighted tail is negligible."""
    reach = max((abs(p) for p in act.singular_points), default=0.0)
    x = 8.0
    while x <= _MAX_WINDOW:
        if x > reach:
            tail = tail_weight_right(act, x) + tail_weight_left(act, x)
            if np.isfinite(tail) and tail < cfg.tail_cutoff_tol and _sign_stable(act, x):
                return x
        x *= 2.0
    raise NonIntegrable(f"weighted curvature tail of {act.label} does not decay")


# ---------------------------------------------------------------------------
# gamma0 / inf g / gamma


def _curvature_zeros(act: Activation, lo: float, hi: float):
    """Sign changes of f'' inside (lo, hi), refined by bisection."""
    xs = np.linspace(lo, hi, 4097)
    vals = np.asarray(act.f2(xs), float)
    out = []
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        root = optimize.brentq(lambda t: float(act.f2(t)), xs[i], xs[i + 1], xtol=1e-12)
        out.append(root)
    return out


@lru_cache(maxsize=None)
def gamma0(act: Activation, cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Quadrature value of int |f''(x)| (|x|+1) dx.

    The window is split at singular points, at x=0 and at curvature sign
    changes so every panel hands scipy a smooth integrand; the two
    unbounded tails are added via the by-parts identity.
    """
    window = integration_window(act, cfg)
    breaks = {-window, window, 0.0}
    breaks.update(p for p in act.singular_points if -window < p < window)
    pieces = sorted(breaks)
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        breaks.update(_curvature_zeros(act, lo, hi))
    knots = sorted(breaks)

    def integrand(t):
        return abs(float(act.f2(t))) * (abs(t) + 1.0)

    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        val, _ = integrate.quad(
            integrand, lo, hi,
            epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
        )
        total += val
    total += tail_weight_right(act, window) + tail_weight_left(act, window)
    return total


def g_value(act: Activation, x):
    """g(x) = |f(x)| + (|x|+2)|f'(x)|, the cost of the linear anchor at x."""
    x = np.asarray(x, float)
    return np.abs(act.f(x)) + (np.abs(x) + 2.0) * np.abs(act.f1(x))


def _g_limits(act: Activation):
    # When the asymptote slope vanishes and gamma0 is finite,
    # (|x|+2)|f'(x)| is squeezed by the weighted curvature tail, so the
    # limit of g is just |intercept|; any nonzero slope sends g to +inf.
    a, b = act.asymptote_left
    c, d = act.asymptote_right
    g_left = abs(b) if a == 0.0 else np.inf
    g_right = abs(d) if c == 0.0 else np.inf
    return g_left, g_right


def inf_g(act: Activation):
    """Approximate (argmin, infimum) of g; the argmin may be +-inf."""
    xs = np.linspace(-64.0, 64.0, 4096)
    vals = np.asarray(g_value(act, xs), float)
    i = int(np.argmin(vals))
    best_x, best = float(xs[i]), float(vals[i])
    if 0 < i < len(xs) - 1 and vals[i] < vals[i - 1] and vals[i] < vals[i + 1]:
        res = optimize.minimize_scalar(
            lambda t: float(g_value(act, t)),
            bracket=(xs[i - 1], xs[i], xs[i + 1]),
            method="golden",
        )
        if res.fun < best:
            best_x, best = float(res.x), float(res.fun)
    g_left, g_right = _g_limits(act)
    if best <= min(g_left, g_right):
        return best_x, best
    if g_left <= g_right:
        return -np.inf, g_left
    return np.inf, g_right


@lru_cache(maxsize=None)
def gamma_parts(act: Activation, cfg: QuadConfig = DEFAULT_QUAD) -> GammaParts:
    """gamma0, the linear-anchor term and their sum.

    Smooth case: linear term is inf_x g(x). One singular point x0:
    linear term is |f(x0)| + (1+|x0|)(|f'+(x0)| + |f'-(x0)|).
    """
    if len(act.singular_points) > 1:
        raise MultiSingular(
            f"{act.label} has {len(act.singular_points)} singular points; only one is supported"
        )
    g0 = gamma0(act, cfg)
    if act.singular_points:
        x0 = act.singular_points[0]
        d_left, d_right = act.one_sided_f1[0]
        linear = abs(float(act.f(x0))) + (1.0 + abs(x0)) * (abs(d_right) + abs(d_left))
    else:
        _, linear = inf_g(act)
    return GammaParts(g0, float(linear), g0 + float(linear))


def gamma(act: Activation, cfg: QuadConfig = DEFAULT_QUAD) -> float:
    return gamma_parts(act, cfg).total


def asymptotes(act: Activation, tol: float = 1e-8):
    """Estimate (left slope, left intercept, right slope, right intercept).

    Slopes come from f' and intercepts from f - slope*x at a doubling
    sequence of edge points, accepted once two consecutive estimates agree
    to tol (a Cauchy check, since the true limits are unknown here).
    """
    out = []
    for side in (-1.0, 1.0):
        x = 8.0
        prev = None
        found = None
        while x <= _MAX_WINDOW:
            slope = float(act.f1(side * x))
            intercept = float(act.f(side * x)) - slope * side * x
            if not (np.isfinite(slope) and np.isfinite(intercept)):
                break
            if prev is not None and abs(slope - prev[0]) < tol and abs(intercept - prev[1]) < tol:
                found = (slope, intercept)
                break
            prev = (slope, intercept)
            x *= 2.0
        if found is None:
            raise NoAsymptote(f"{act.label} shows no linear asymptote as x -> {side:+.0f}inf")
        out.append(found)
    (a, b), (c, d) = out
    return a, b, c, d


def lipschitz_bound(act: Activation, cfg: QuadConfig = DEFAULT_QUAD) -> LipschitzBound:
    """Certified Lipschitz bound gamma + min(|slope_left|, |slope_right|).

    Also reports the empirical sup of |f'| over a wide grid (plus the
    one-sided kink slopes) which the bound must dominate.
    """
    a = abs(act.asymptote_left[0])
    c = abs(act.asymptote_right[0])
    bound = gamma(act, cfg) + min(a, c)
    xs = np.concatenate([
        np.linspace(-40.0, 40.0, 100_001),
        np.geomspace(40.0, 1e6, 64),
        -np.geomspace(40.0, 1e6, 64),
    ])
    sup = float(np.max(np.abs(act.f1(xs))))
    for d_left, d_right in act.one_sided_f1:
        sup = max(sup, abs(d_left), abs(d_right))
    sup = max(sup, a, c)
    return LipschitzBound(bound, sup)
