"""Certified one-dimensional ReLU approximants of scalar activations.

approximate_activation builds, for a target activation f and accuracy eps,
a net g(t) = sum_k alpha_k relu(beta_k t + gamma_k) with

    sup_t |f(t) - g(t)| <= eps        (measured on a dense wide grid)
    sum_k |alpha_k| (|beta_k| + |gamma_k|) <= gamma(f) + eps

The construction anchors at a point x_eps where the linear-part cost g(x_eps)
is within eps of its infimum (the singular point itself for one-kink
activations), interpolates the curved remainder on [x_eps - T, x_eps + T]
with uniform knots and slope-increment units, and continues with the exact
asymptote slopes outside the window.
"""

from dataclasses import dataclass

import numpy as np

from . import activations as act_mod
from .activations import Activation, QuadConfig, DEFAULT_QUAD
from .errors import GammaInfinite, NoConvergence, NonIntegrable

_PRUNE_TOL = 1e-15
_MAX_KNOTS = 1_000_000


@dataclass(frozen=True, eq=False)
class ReluNet1D:
    """Rows of units are (alpha, beta, gamma): t -> alpha*relu(beta*t + gamma)."""

    units: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.units, float))
        if u.size == 0:
            u = u.reshape(0, 3)
        if u.shape[1] != 3:
            raise ValueError("units must be rows (alpha, beta, gamma)")
        object.__setattr__(self, "units", u)

    @property
    def width(self) -> int:
        return self.units.shape[0]


@dataclass(frozen=True)
class ApproxCertificate:
    epsilon_requested: float
    sup_error_measured: float
    path_norm: float
    gamma_reference: float
    anchor: float
    window_halfwidth: float
    partition_size: int
    grid_points: int


def path_norm_1d(net: ReluNet1D) -> float:
    u = net.units
    if u.size == 0:
        return 0.0
    return float(np.sum(np.abs(u[:, 0]) * (np.abs(u[:, 1]) + np.abs(u[:, 2]))))


def eval_relu1d(net: ReluNet1D, t):
    """Evaluate the net at scalar or array t.

    Units are bucketed by the sign of beta and turned into sorted knot
    arrays with prefix sums, so a query costs O(log K) instead of O(K).
    """
    t_in = np.asarray(t, float)
    tq = np.atleast_1d(t_in).ravel()
    out = np.zeros_like(tq)
    u = net.units
    if u.size:
        a, b, g = u[:, 0], u[:, 1], u[:, 2]
        flat = b == 0
        if flat.any():
            out += float(np.sum(a[flat] * np.maximum(g[flat], 0.0)))
        rising = b > 0
        if rising.any():
            # knot may overflow to +-inf for subnormal slopes; searchsorted
            # then treats the unit as active on the correct side anyway
            with np.errstate(over="ignore"):
                knots = -g[rising] / b[rising]
            order = np.argsort(knots, kind="stable")
            k = knots[order]
            w = np.concatenate([[0.0], np.cumsum((a[rising] * b[rising])[order])])
            v = np.concatenate([[0.0], np.cumsum((a[rising] * g[rising])[order])])
            idx = np.searchsorted(k, tq, side="left")
            out += w[idx] * tq + v[idx]
        falling = b < 0
        if falling.any():
            with np.errstate(over="ignore"):
                knots = -g[falling] / b[falling]
            order = np.argsort(knots, kind="stable")
            k = knots[order]
            # suffix sums: unit active where t < knot
            w = np.concatenate([np.cumsum((a[falling] * b[falling])[order][::-1])[::-1], [0.0]])
            v = np.concatenate([np.cumsum((a[falling] * g[falling])[order][::-1])[::-1], [0.0]])
            idx = np.searchsorted(k, tq, side="right")
            out += w[idx] * tq + v[idx]
    out = out.reshape(t_in.shape)
    return float(out) if t_in.ndim == 0 else out


def _pick_anchor(act: Activation, eps: float):
    """Anchor point plus one-sided slopes of the linear part there."""
    if act.singular_points:
        x0 = act.singular_points[0]
        d_left, d_right = act.one_sided_f1[0]
        return x0, d_left, d_right
    _, g_star = act_mod.inf_g(act)
    budget = g_star + 0.25 * eps
    candidates = [0.0]
    for k in range(14):
        candidates.extend([-(2.0**k), 2.0**k])
    x_star, _ = act_mod.inf_g(act)
    if np.isfinite(x_star):
        candidates.append(float(x_star))
    candidates.sort(key=abs)
    for x in candidates:
        if float(act_mod.g_value(act, x)) <= budget:
            slope = float(act.f1(x))
            return x, slope, slope
    raise NoConvergence(f"no anchor with g within {eps / 4:g} of the infimum for {act.label}")


def _window_halfwidth(act: Activation, x_eps: float, eps: float) -> float:
    a, b = act.asymptote_left
    c, d = act.asymptote_right
    t = 8.0
    while t <= abs(x_eps):
        t *= 2.0
    while t <= 2.0**30:
        hi, lo = x_eps + t, x_eps - t
        asym_err = max(
            abs(float(act.f(hi)) - (c * hi + d)),
            abs(float(act.f(lo)) - (a * lo + b)),
        )
        tails = act_mod.tail_weight_right(act, hi) + act_mod.tail_weight_left(act, -lo)
        if asym_err <= eps / 8.0 and tails <= eps / 32.0:
            return t
        t *= 2.0
    raise NoConvergence(f"no window captures the tails of {act.label} at eps={eps:g}")


def _slope_units(xs, values, end_slope, orientation):
    """Slope-increment units for one side of the interpolation.

    xs are knots walking away from the anchor, values the curved remainder
    there (values[0] == 0). The final increment is recomputed after pruning
    so the unit coefficients sum to end_slope bit-exactly and the net
    continues with the true asymptote slope beyond the last knot.
    """
    h = abs(xs[1] - xs[0])
    slopes = np.diff(values) / h
    deltas = np.concatenate([[0.0], slopes])
    coeffs = np.diff(deltas)
    units = []
    kept = 0.0
    for x_i, coeff in zip(xs[:-1], coeffs):
        if abs(coeff) * (abs(x_i) + 1.0) < _PRUNE_TOL:
            continue
        units.append((coeff, orientation, -orientation * x_i))
        kept += coeff
    last = end_slope - kept
    if last != 0.0:
        units.append((last, orientation, -orientation * xs[-1]))
    return units


def _build_net(act, x_eps, d_left, d_right, t_half, n_panels):
    a_slope, _ = act.asymptote_left
    c_slope, _ = act.asymptote_right
    f0 = float(act.f(x_eps))
    h = t_half / n_panels
    units = []

    xs = x_eps + h * np.arange(n_panels + 1)
    f_right = np.asarray(act.f(xs), float) - f0 - d_right * (xs - x_eps)
    units += _slope_units(xs, f_right, c_slope - d_right, 1.0)

    ys = x_eps - h * np.arange(n_panels + 1)
    f_left = np.asarray(act.f(ys), float) - f0 - d_left * (ys - x_eps)
    units += _slope_units(ys, f_left, d_left - a_slope, -1.0)

    if act.singular_points:
        x0 = x_eps
        if d_right != 0.0:
            units.append((d_right, 1.0, -x0))
        if d_left != 0.0:
            units.append((-d_left, -1.0, x0))
        if f0 != 0.0:
            units.append((np.sign(f0), 0.0, abs(f0)))
    else:
        slope = d_right
        if slope != 0.0:
            units.append((slope, 1.0, 0.0))
            units.append((-slope, -1.0, 0.0))
        const = f0 - x_eps * slope
        if const != 0.0:
            units.append((np.sign(const), 0.0, abs(const)))
    return ReluNet1D(np.array(units, float).reshape(-1, 3))


def _validation_grid(x_eps, t_half):
    core = np.linspace(x_eps - 2.0 * t_half, x_eps + 2.0 * t_half, 2**20)
    far = np.geomspace(max(abs(x_eps) + 2.0 * t_half, 1.0), 1e6, 32)
    return np.concatenate([core, far, -far])


def approximate_activation(act: Activation, eps: float, cfg: QuadConfig = DEFAULT_QUAD):
    """Certified ReLU approximant; returns (ReluNet1D, ApproxCertificate)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    try:
        gamma_ref = act_mod.gamma(act, cfg)
    except NonIntegrable as exc:
        raise GammaInfinite(str(exc)) from exc

    x_eps, d_left, d_right = _pick_anchor(act, eps)
    t_half = _window_halfwidth(act, x_eps, eps)
    grid = _validation_grid(x_eps, t_half)
    f_grid = np.asarray(act.f(grid), float)

    n_panels = 64
    while n_panels <= _MAX_KNOTS:
        net = _build_net(act, x_eps, d_left, d_right, t_half, n_panels)
        err = float(np.max(np.abs(f_grid - eval_relu1d(net, grid))))
        norm = path_norm_1d(net)
        if err <= eps and norm <= gamma_ref + eps:
            cert = ApproxCertificate(
                epsilon_requested=eps,
                sup_error_measured=err,
                path_norm=norm,
                gamma_reference=gamma_ref,
                anchor=x_eps,
                window_halfwidth=t_half,
                partition_size=n_panels,
                grid_points=grid.size,
            )
            return net, cert
        n_panels *= 2
    raise NoConvergence(f"partition cap reached for {act.label} at eps={eps:g}")
