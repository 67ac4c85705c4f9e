"""Two-layer networks, their path norms, and integral representations.

A net is f(x) = sum_k a_k sigma(b_k . x + c_k) with

    path_norm          sum_k |a_k| (||b_k||_1 + |c_k|)
    modified_path_norm sum_k |a_k| (||b_k||_1 + |c_k| + 1)

rewrite_to_relu replaces sigma by a certified ReLU approximant and reports
the norm and deviation guarantees that come with it.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import activations as act_mod
from .activations import Activation, QuadConfig, DEFAULT_QUAD
from .errors import DimMismatch
from .relu1d import approximate_activation
from .rng import make_rng


@dataclass(frozen=True, eq=False)
class TwoLayerNet:
    a: np.ndarray  # (m,)
    b: np.ndarray  # (m, d)
    c: np.ndarray  # (m,)
    activation: Activation

    def __post_init__(self):
        a = np.asarray(self.a, float).ravel()
        b = np.atleast_2d(np.asarray(self.b, float))
        c = np.asarray(self.c, float).ravel()
        if b.shape[0] != a.size or c.size != a.size:
            raise DimMismatch(
                f"inconsistent unit counts: a has {a.size}, b has {b.shape[0]}, c has {c.size}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def width(self) -> int:
        return self.a.size

    @property
    def input_dim(self) -> int:
        return self.b.shape[1]

    @property
    def units(self):
        return [(float(ak), bk.copy(), float(ck)) for ak, bk, ck in zip(self.a, self.b, self.c)]

    @classmethod
    def from_units(cls, units, activation: Activation) -> "TwoLayerNet":
        a = np.array([u[0] for u in units], float)
        b = np.array([u[1] for u in units], float)
        c = np.array([u[2] for u in units], float)
        return cls(a, b, c, activation)


def eval_two_layer(net: TwoLayerNet, x):
    x = np.asarray(x, float)
    single = x.ndim == 1
    batch = np.atleast_2d(x)
    if batch.shape[1] != net.input_dim:
        raise DimMismatch(f"expected inputs of dimension {net.input_dim}, got {batch.shape[1]}")
    z = batch @ net.b.T + net.c
    out = np.asarray(net.activation.f(z), float) @ net.a
    return float(out[0]) if single else out


def path_norm(net: TwoLayerNet) -> float:
    return float(np.sum(np.abs(net.a) * (np.abs(net.b).sum(axis=1) + np.abs(net.c))))


def modified_path_norm(net: TwoLayerNet) -> float:
    return float(np.sum(np.abs(net.a) * (np.abs(net.b).sum(axis=1) + np.abs(net.c) + 1.0)))


def c_sigma(act: Activation, cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Squared Monte-Carlo constant (L_sigma + |sigma(0)|)^2.

    L_sigma is the certified Lipschitz bound gamma + min |asymptote slope|.
    """
    lip = act_mod.gamma(act, cfg) + min(abs(act.asymptote_left[0]), abs(act.asymptote_right[0]))
    return (lip + abs(float(act.f(0.0)))) ** 2


@dataclass(frozen=True)
class RewriteReport:
    eps: float
    width: int
    path_norm_rewritten: float
    path_norm_bound: float
    deviation_bound: float
    max_deviation: float
    n_check_points: int
    seed: int


def rewrite_to_relu(
    net: TwoLayerNet,
    eps: float,
    cfg: QuadConfig = DEFAULT_QUAD,
    seed: int = 0,
    n_check: int = 10_000,
):
    """Replace the activation by a certified ReLU approximant.

    Each unit (a_k, b_k, c_k) composed with an approximant unit
    (alpha_j, beta_j, gamma_j) becomes (a_k alpha_j, beta_j b_k,
    beta_j c_k + gamma_j). Guarantees reported:

        path_norm(out) <= (gamma(sigma) + eps) * modified_path_norm(net)
        |net - out|     <= eps * sum_k |a_k|   pointwise

    the latter checked on n_check seeded uniform points in [-1, 1]^d.
    """
    g_net, cert = approximate_activation(net.activation, eps, cfg)
    alpha, beta, gam = g_net.units[:, 0], g_net.units[:, 1], g_net.units[:, 2]

    new_a = np.outer(net.a, alpha).ravel()
    new_b = (net.b[:, None, :] * beta[None, :, None]).reshape(-1, net.input_dim)
    new_c = (np.outer(net.c, beta) + gam[None, :]).ravel()
    keep = new_a != 0.0
    out = TwoLayerNet(new_a[keep], new_b[keep], new_c[keep], act_mod.relu())

    rng = make_rng(seed)
    x_check = rng.uniform(-1.0, 1.0, size=(n_check, net.input_dim))
    dev = float(np.max(np.abs(eval_two_layer(net, x_check) - eval_two_layer(out, x_check))))
    report = RewriteReport(
        eps=eps,
        width=out.width,
        path_norm_rewritten=path_norm(out),
        path_norm_bound=(cert.gamma_reference + eps) * modified_path_norm(net),
        deviation_bound=eps * float(np.sum(np.abs(net.a))),
        max_deviation=dev,
        n_check_points=n_check,
        seed=seed,
    )
    return out, report


# ---------------------------------------------------------------------------
# integral representations


@dataclass(frozen=True, eq=False)
class DiscreteBarronRep:
    """Atomic representation f(x) = sum_i p_i a_i sigma(w_i . (x, 1))."""

    probs: np.ndarray   # (k,)
    ws: np.ndarray      # (k, d+1)
    coeffs: np.ndarray  # (k,)

    def __post_init__(self):
        p = np.asarray(self.probs, float).ravel()
        w = np.atleast_2d(np.asarray(self.ws, float))
        a = np.asarray(self.coeffs, float).ravel()
        if not (p.size == w.shape[0] == a.size):
            raise DimMismatch("probs, ws and coeffs must have matching first dimension")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probs must be a probability vector")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "ws", w)
        object.__setattr__(self, "coeffs", a)

    @property
    def input_dim(self) -> int:
        return self.ws.shape[1] - 1

    def draw(self, rng: np.random.Generator, m: int):
        idx = rng.choice(self.probs.size, size=m, p=self.probs)
        return self.ws[idx], self.coeffs[idx]

    def function(self, act: Activation, x) -> np.ndarray:
        """Exact target values, no sampling."""
        x = np.atleast_2d(np.asarray(x, float))
        z = x @ self.ws[:, :-1].T + self.ws[:, -1]
        return np.asarray(act.f(z), float) @ (self.probs * self.coeffs)


@dataclass(frozen=True, eq=False)
class ParametricBarronRep:
    """Representation given by a sampler of w and a coefficient rule a(w)."""

    name: str
    input_dim: int
    sampler: Callable  # (rng, m) -> (m, d+1) array of w draws
    coeff: Callable    # (m, d+1) array -> (m,) coefficients

    def draw(self, rng: np.random.Generator, m: int):
        w = np.atleast_2d(np.asarray(self.sampler(rng, m), float))
        if w.shape != (m, self.input_dim + 1):
            raise DimMismatch(f"sampler returned shape {w.shape}")
        return w, np.asarray(self.coeff(w), float).ravel()


def sample_from_barron(rep, m: int, act: Activation, seed: int = 0) -> TwoLayerNet:
    """Monte-Carlo two-layer net (1/m) sum_i a(w_i) sigma(w_i . (x, 1))."""
    if m <= 0:
        raise ValueError("need at least one sample")
    w, coeffs = rep.draw(make_rng(seed), m)
    return TwoLayerNet(coeffs / m, w[:, :-1], w[:, -1], act)


def barron_norm_estimate(rep, n_mc: int = 65_536, seed: int = 0) -> float:
    """sqrt(E[a(w)^2 (||w||_1 + 1)^2]), exact for atomic representations."""
    if isinstance(rep, DiscreteBarronRep):
        weights = (np.abs(rep.ws).sum(axis=1) + 1.0) ** 2
        return float(np.sqrt(np.sum(rep.probs * rep.coeffs**2 * weights)))
    w, coeffs = rep.draw(make_rng(seed), n_mc)
    return float(np.sqrt(np.mean(coeffs**2 * (np.abs(w).sum(axis=1) + 1.0) ** 2)))


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True, eq=False)
class Dataset:
    """Inputs in [-1, 1]^d with targets in [0, 1]."""

    inputs: np.ndarray   # (n, d)
    targets: np.ndarray  # (n,)
    noise: str = "none"

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, float))
        y = np.asarray(self.targets, float).ravel()
        if x.shape[0] != y.size:
            raise DimMismatch(f"{x.shape[0]} inputs vs {y.size} targets")
        if x.size and np.max(np.abs(x)) > 1.0 + 1e-12:
            raise ValueError("inputs must lie in [-1, 1]")
        if y.size and (y.min() < -1e-12 or y.max() > 1.0 + 1e-12):
            raise ValueError("targets must lie in [0, 1]")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.targets.size

    @property
    def d(self) -> int:
        return self.inputs.shape[1]
