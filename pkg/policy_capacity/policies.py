"""
Parametric policies

Deterministic tanh MLPs over flat parameter vectors, plus the 3-parameter
stochastic sigmoid policy of the synthetic MDP. Parameters are laid out
layer by layer: row-major weights (fan_in x fan_out), then the bias.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import exp
from typing import Any

import numpy as np

from policy_capacity.envs.base import SYNTHETIC, EnvSpec
from policy_capacity.envs.spaces import ActionSpace
from policy_capacity.errors import ConfigError, SpecMismatchError

MLP = "mlp"
TABULAR_SIGMOID = "tabular_sigmoid"

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
XAVIER_NORMAL = "xavier_normal"
XAVIER_UNIFORM = "xavier_uniform"
PRIOR_FAMILIES = (GAUSSIAN, UNIFORM, XAVIER_NORMAL, XAVIER_UNIFORM)

ACTIVATIONS = ("tanh",)

BAG_HIDDEN_LAYERS: tuple[tuple[int, ...], ...] = (
    (),
    (4,),
    (32,),
    (64,),
    (4, 4),
    (32, 32),
    (64, 64),
)

SIGMOID_PARAMS = 3


@dataclass(frozen=True)
class ArchitectureSpec:
    hidden_layers: tuple[int, ...] = ()
    use_bias: bool = True
    activation: str = "tanh"

    def __post_init__(self) -> None:
        if any(int(w) <= 0 for w in self.hidden_layers):
            raise ConfigError(f"hidden widths must be > 0, got {list(self.hidden_layers)}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"Unknown activation: {self.activation}")


@dataclass(frozen=True)
class PriorSpec:
    """Parameter prior; mu may be a scalar or a full-length vector (gaussian only)"""

    family: str = GAUSSIAN
    mu: float | tuple[float, ...] = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in PRIOR_FAMILIES:
            raise ConfigError(f"Unknown prior family: {self.family}")
        if self.sigma <= 0:
            raise ConfigError(f"prior sigma must be > 0, got {self.sigma}")

    def label(self) -> str:
        if self.family != GAUSSIAN:
            return self.family
        if isinstance(self.mu, tuple):
            mu = "(" + ",".join(f"{v:g}" for v in self.mu) + ")"
        else:
            mu = f"{self.mu:g}"
        return f"gaussian({mu},{self.sigma:g})"


@dataclass(frozen=True)
class PolicySpec:
    kind: str = MLP
    arch: ArchitectureSpec = field(default_factory=ArchitectureSpec)
    prior: PriorSpec = field(default_factory=PriorSpec)

    def __post_init__(self) -> None:
        if self.kind not in (MLP, TABULAR_SIGMOID):
            raise ConfigError(f"Unknown policy kind: {self.kind}")
        if self.kind == TABULAR_SIGMOID and self.prior.family != GAUSSIAN:
            raise ConfigError("tabular_sigmoid policies take a gaussian prior")

    @classmethod
    def tabular_sigmoid(cls, mu: float | tuple[float, ...] = 0.0, sigma: float = 1.0) -> PolicySpec:
        return cls(kind=TABULAR_SIGMOID, prior=PriorSpec(GAUSSIAN, mu, sigma))

    @classmethod
    def mlp(
        cls,
        hidden_layers: tuple[int, ...] | list[int] = (),
        use_bias: bool = True,
        prior: PriorSpec | None = None,
    ) -> PolicySpec:
        arch = ArchitectureSpec(tuple(int(w) for w in hidden_layers), bool(use_bias))
        return cls(kind=MLP, arch=arch, prior=prior or PriorSpec())

    def with_prior(self, prior: PriorSpec) -> PolicySpec:
        return PolicySpec(self.kind, self.arch, prior)

    def label(self) -> str:
        if self.kind == TABULAR_SIGMOID:
            return f"tabular_sigmoid-{self.prior.label()}"
        layers = ",".join(str(w) for w in self.arch.hidden_layers)
        bias = "bias" if self.arch.use_bias else "nobias"
        return f"mlp[{layers}]-{bias}-{self.prior.label()}"

    def to_dict(self) -> dict[str, Any]:
        mu = list(self.prior.mu) if isinstance(self.prior.mu, tuple) else self.prior.mu
        out: dict[str, Any] = {
            "kind": self.kind,
            "prior": {"family": self.prior.family, "mu": mu, "sigma": self.prior.sigma},
        }
        if self.kind == MLP:
            out["hidden_layers"] = list(self.arch.hidden_layers)
            out["use_bias"] = self.arch.use_bias
            out["activation"] = self.arch.activation
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PolicySpec:
        """Parse the `policy` config section"""
        prior_data = data.get("prior", {})
        if isinstance(prior_data, str):
            prior_data = {"family": prior_data}
        mu = prior_data.get("mu", 0.0)
        mu = tuple(float(v) for v in mu) if isinstance(mu, (list, tuple)) else float(mu)
        prior = PriorSpec(
            family=str(prior_data.get("family", GAUSSIAN)).lower(),
            mu=mu,
            sigma=float(prior_data.get("sigma", 1.0)),
        )
        kind = str(data.get("kind", MLP)).lower()
        arch = ArchitectureSpec(
            hidden_layers=tuple(int(w) for w in data.get("hidden_layers", ())),
            use_bias=bool(data.get("use_bias", True)),
            activation=str(data.get("activation", "tanh")),
        )
        return cls(kind=kind, arch=arch, prior=prior)


# ===== LAYOUT =====


def layer_shapes(
    arch: ArchitectureSpec, state_dim: int, action_space: ActionSpace
) -> list[tuple[int, int]]:
    """(fan_in, fan_out) per layer; the output layer is the last entry"""
    widths = [state_dim, *arch.hidden_layers, action_space.dim]
    return list(zip(widths[:-1], widths[1:]))


def param_count(arch: ArchitectureSpec, state_dim: int, action_space: ActionSpace) -> int:
    return sum(
        fi * fo + (fo if arch.use_bias else 0) for fi, fo in layer_shapes(arch, state_dim, action_space)
    )


def spec_param_count(spec: PolicySpec, state_dim: int, action_space: ActionSpace) -> int:
    if spec.kind == TABULAR_SIGMOID:
        return SIGMOID_PARAMS
    return param_count(spec.arch, state_dim, action_space)


def unflatten(
    theta: np.ndarray, arch: ArchitectureSpec, state_dim: int, action_space: ActionSpace
) -> list[tuple[np.ndarray, np.ndarray | None]]:
    """Split a flat vector into per-layer (W, b) views; b is None without bias"""
    theta = np.asarray(theta, dtype=np.float64)
    expected = param_count(arch, state_dim, action_space)
    if theta.shape != (expected,):
        raise SpecMismatchError(f"expected {expected} parameters, got shape {theta.shape}")

    layers = []
    offset = 0
    for fi, fo in layer_shapes(arch, state_dim, action_space):
        w = theta[offset : offset + fi * fo].reshape(fi, fo)
        offset += fi * fo
        b = None
        if arch.use_bias:
            b = theta[offset : offset + fo]
            offset += fo
        layers.append((w, b))
    return layers


def _xavier_scales(
    arch: ArchitectureSpec, state_dim: int, action_space: ActionSpace, numerator: float
) -> np.ndarray:
    """Per-parameter scale sqrt(numerator / (fan_in + fan_out)); biases share their layer's scale"""
    chunks = []
    for fi, fo in layer_shapes(arch, state_dim, action_space):
        n = fi * fo + (fo if arch.use_bias else 0)
        chunks.append(np.full(n, np.sqrt(numerator / (fi + fo))))
    return np.concatenate(chunks)


def sample_params(
    spec: PolicySpec,
    rng: np.random.Generator,
    state_dim: int,
    action_space: ActionSpace,
) -> np.ndarray:
    """Draw one parameter vector from the policy's prior"""
    d = spec_param_count(spec, state_dim, action_space)
    prior = spec.prior
    if prior.family == GAUSSIAN:
        mu = np.asarray(prior.mu, dtype=np.float64)
        if mu.ndim and mu.shape != (d,):
            raise SpecMismatchError(f"prior mean has {mu.shape[0]} entries, policy has {d}")
        return mu + prior.sigma * rng.standard_normal(d)
    if prior.family == UNIFORM:
        return rng.uniform(-1.0, 1.0, size=d)
    if prior.family == XAVIER_NORMAL:
        return rng.standard_normal(d) * _xavier_scales(spec.arch, state_dim, action_space, 2.0)
    return rng.uniform(-1.0, 1.0, size=d) * _xavier_scales(spec.arch, state_dim, action_space, 6.0)


# ===== POLICIES =====


class MlpPolicy:
    """Deterministic tanh MLP with argmax or tanh-rescaled readout"""

    def __init__(
        self, theta: np.ndarray, arch: ArchitectureSpec, state_dim: int, action_space: ActionSpace
    ):
        self.layers = unflatten(theta, arch, state_dim, action_space)
        self.state_dim = state_dim
        self.action_space = action_space
        if not action_space.is_discrete:
            self.low = np.asarray(action_space.low)
            self.half_range = (np.asarray(action_space.high) - self.low) / 2.0

    def logits(self, state: np.ndarray) -> np.ndarray:
        x = np.asarray(state, dtype=np.float64)
        if x.shape != (self.state_dim,):
            raise SpecMismatchError(f"policy expects a {self.state_dim}-dim state, got {x.shape}")
        last = len(self.layers) - 1
        for i, (w, b) in enumerate(self.layers):
            x = x @ w
            if b is not None:
                x = x + b
            if i < last:
                x = np.tanh(x)
        return x

    def act(self, state: np.ndarray, rng: np.random.Generator | None = None) -> Any:
        out = self.logits(state)
        if self.action_space.is_discrete:
            # np.argmax returns the first maximum
            return int(np.argmax(out))
        return self.low + (np.tanh(out) + 1.0) * self.half_range


class SigmoidPolicy:
    """Picks action 0 (a1) with probability sigmoid(theta . s)"""

    def __init__(self, theta: np.ndarray):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (SIGMOID_PARAMS,):
            raise SpecMismatchError(f"tabular_sigmoid takes 3 parameters, got shape {theta.shape}")
        self.theta = tuple(float(v) for v in theta)

    def prob_first(self, state: np.ndarray) -> float:
        if len(state) != SIGMOID_PARAMS:
            raise SpecMismatchError(f"tabular_sigmoid expects a 3-dim state, got {len(state)}")
        z = sum(t * float(s) for t, s in zip(self.theta, state))
        if z >= 0:
            return 1.0 / (1.0 + exp(-z))
        ez = exp(z)
        return ez / (1.0 + ez)

    def act(self, state: np.ndarray, rng: np.random.Generator | None = None) -> int:
        if rng is None:
            raise SpecMismatchError("tabular_sigmoid is stochastic and needs an rng stream")
        return 0 if rng.random() < self.prob_first(state) else 1


Policy = MlpPolicy | SigmoidPolicy


def build_policy(
    spec: PolicySpec, theta: np.ndarray, state_dim: int, action_space: ActionSpace
) -> Policy:
    if spec.kind == TABULAR_SIGMOID:
        return SigmoidPolicy(theta)
    return MlpPolicy(theta, spec.arch, state_dim, action_space)


def act(
    spec: PolicySpec,
    theta: np.ndarray,
    state: np.ndarray,
    action_space: ActionSpace,
    rng: np.random.Generator | None = None,
) -> Any:
    """Functional form of build_policy(...).act(state, rng)"""
    state = np.asarray(state, dtype=np.float64)
    return build_policy(spec, theta, state.shape[0], action_space).act(state, rng)


def check_compatible(env_spec: EnvSpec, spec: PolicySpec) -> None:
    """Raise SpecMismatchError when the policy cannot drive the environment"""
    if spec.kind == TABULAR_SIGMOID:
        if env_spec.env_id != SYNTHETIC:
            raise SpecMismatchError(f"tabular_sigmoid only drives synthetic envs, not {env_spec.env_id}")
        return
    mu = spec.prior.mu
    if spec.prior.family == GAUSSIAN and isinstance(mu, tuple):
        d = param_count(spec.arch, env_spec.state_dim, env_spec.action_space)
        if len(mu) != d:
            raise SpecMismatchError(f"prior mean has {len(mu)} entries, policy has {d}")


def architecture_bag(
    hidden_layers: list[tuple[int, ...]] | None = None,
    priors: list[PriorSpec] | None = None,
    biases: list[bool] | None = None,
) -> list[PolicySpec]:
    """Cross product of architectures, priors and bias flags (7 x 4 x 2 by default)"""
    hidden_layers = list(BAG_HIDDEN_LAYERS) if hidden_layers is None else hidden_layers
    priors = [PriorSpec(f) for f in PRIOR_FAMILIES] if priors is None else priors
    biases = [True, False] if biases is None else biases
    if not hidden_layers or not priors or not biases:
        raise ConfigError("architecture bag needs at least one layout, prior and bias flag")
    return [
        PolicySpec.mlp(tuple(layers), bias, prior)
        for layers, prior, bias in itertools.product(hidden_layers, priors, biases)
    ]
