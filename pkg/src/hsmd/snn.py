"""Layers 2-4: per-pixel leaky integrate-and-fire network.

Each pixel owns one neuron per layer, wired 1:1::

    diff --c, w_p2i--> L2 --w_syn--> L4
                        \\--w_syn--> [1-step buffer] --> L3 --w_syn--> L4

L4 therefore sees the change between frames n and n-1 directly from L2 and,
one timestep later, the change between n-1 and n-2 through L3.

Membrane dynamics are ``tau_m dV/dt = -(V - E_L) + R I``, integrated with the
exact exponential update for piecewise-constant input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import check_gray
from .parallel import SERIAL, RowPool


@dataclass(frozen=True)
class NeuronParams:
    """LIF constants. Times in ms, potentials in mV; ``r`` is a unit-free gain."""

    tau_m: float = 10.0
    r: float = 1.0
    e_l: float = -70.0
    v_reset: float = -70.0
    v_min: float = -70.0
    v_th: float = -55.0
    t_ref: float = 2.0
    dt: float = 10.0

    def validate(self) -> list[str]:
        errors = []
        if not self.tau_m > 0:
            errors.append(f"neuron.tau_m: must be > 0 (got {self.tau_m})")
        if not self.dt > 0:
            errors.append(f"neuron.dt: must be > 0 (got {self.dt})")
        if not self.v_th > self.v_reset:
            errors.append(
                f"neuron.v_th ({self.v_th}) must be greater than neuron.v_reset ({self.v_reset})"
            )
        if not self.v_min <= self.v_reset:
            errors.append(
                f"neuron.v_min ({self.v_min}) must not exceed neuron.v_reset ({self.v_reset})"
            )
        if not self.t_ref >= 0:
            errors.append(f"neuron.t_ref: must be >= 0 (got {self.t_ref})")
        for name in ("tau_m", "r", "e_l", "v_reset", "v_min", "dt", "t_ref"):
            if not math.isfinite(getattr(self, name)):
                errors.append(f"neuron.{name}: must be finite")
        return errors

    @property
    def decay(self) -> float:
        return math.exp(-self.dt / self.tau_m)


@dataclass(frozen=True)
class SynapseWeights:
    w_p2i: float = 8.0
    w_syn: float = 1555.0

    def validate(self) -> list[str]:
        return [
            f"weights.{name}: must be finite and > 0 (got {value})"
            for name, value in (("w_p2i", self.w_p2i), ("w_syn", self.w_syn))
            if not (math.isfinite(value) and value > 0)
        ]


@dataclass
class NeuronState:
    v: float
    refractory: float = 0.0
    spiked: bool = False


def encode_currents(diff: np.ndarray, c: float = 17.5) -> np.ndarray:
    """Pixel intensity to injected current, ``i = I * c``."""
    return check_gray(diff).astype(np.float64) * c


def lif_step(state: NeuronState, current: float, p: NeuronParams) -> tuple[NeuronState, bool]:
    """Advance one neuron by ``p.dt``.

    While refractory the membrane is held at ``v_reset``. A refractory period
    ending inside the step consumes only that part of it, and the neuron
    integrates over the remainder.
    """
    if not math.isfinite(current):
        raise ValueError(f"non-finite input current {current!r}")
    ref = state.refractory
    span = p.dt - min(ref, p.dt)
    ref_left = max(ref - p.dt, 0.0)
    if span <= 0.0:
        return NeuronState(p.v_reset, ref_left, False), False
    v0 = p.v_reset if ref > 0.0 else state.v
    decay = p.decay if span == p.dt else math.exp(-span / p.tau_m)
    drive = p.r * current
    v = p.e_l + drive + (v0 - p.e_l - drive) * decay
    v = max(v, p.v_min)
    if v >= p.v_th:
        return NeuronState(p.v_reset, p.t_ref, True), True
    return NeuronState(v, ref_left, False), False


class LayerState:
    """Membrane, refractory and spike planes for one layer."""

    def __init__(self, height: int, width: int, v0: float):
        self.v = np.full((height, width), v0, dtype=np.float64)
        self.refractory = np.zeros((height, width), dtype=np.float64)
        self.spiked = np.zeros((height, width), dtype=bool)

    def update(self, current: np.ndarray, p: NeuronParams, rows: slice) -> None:
        """Vectorised :func:`lif_step` over ``rows``."""
        v = self.v[rows]
        ref = self.refractory[rows]
        refractory = ref > 0.0
        drive = p.r * current
        if refractory.any():
            v0 = np.where(refractory, p.v_reset, v)
            decay = np.full(v.shape, p.decay)
            span = p.dt - np.minimum(ref[refractory], p.dt)
            decay[refractory] = np.exp(-span / p.tau_m)
            blocked = ref >= p.dt
        else:
            v0, decay, blocked = v, p.decay, None
        vn = p.e_l + drive + (v0 - p.e_l - drive) * decay
        np.maximum(vn, p.v_min, out=vn)
        spiked = vn >= p.v_th
        if blocked is not None:
            spiked &= ~blocked
            vn[blocked] = p.v_reset
        vn[spiked] = p.v_reset
        np.maximum(ref - p.dt, 0.0, out=ref)
        ref[spiked] = p.t_ref
        v[...] = vn
        self.spiked[rows] = spiked


@dataclass
class Network:
    """Three 1:1-wired LIF planes plus the L2->L3 one-step buffer."""

    width: int
    height: int
    params: NeuronParams = field(default_factory=NeuronParams)
    weights: SynapseWeights = field(default_factory=SynapseWeights)
    c: float = 17.5

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"network needs positive dimensions, got {self.width}x{self.height}")
        self.reset()

    def reset(self) -> None:
        e_l = self.params.e_l
        self.l2 = LayerState(self.height, self.width, e_l)
        self.l3 = LayerState(self.height, self.width, e_l)
        self.l4 = LayerState(self.height, self.width, e_l)
        self.buffer = np.zeros((self.height, self.width), dtype=bool)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def _step_rows(self, currents: np.ndarray, rows: slice) -> None:
        p, w = self.params, self.weights
        self.l2.update(w.w_p2i * currents[rows], p, rows)
        self.l3.update(w.w_syn * self.buffer[rows], p, rows)
        l4_in = w.w_syn * self.l2.spiked[rows] + w.w_syn * self.l3.spiked[rows]
        self.l4.update(l4_in, p, rows)
        self.buffer[rows] = self.l2.spiked[rows]

    def step(self, currents: np.ndarray, pool: RowPool = SERIAL) -> np.ndarray:
        """One timestep; returns a copy of the L4 spike plane."""
        if currents.shape != self.shape:
            raise ValueError(f"dimension mismatch: network {self.shape} vs currents {currents.shape}")
        if not np.isfinite(currents).all():
            raise ValueError("non-finite input current")
        pool.map_rows(self.height, lambda rows: self._step_rows(currents, rows))
        return self.l4.spiked.copy()

    def run_frame(self, diff: np.ndarray, substeps: int = 1, pool: RowPool = SERIAL) -> np.ndarray:
        """Hold one frame's currents for ``substeps`` steps and count L4 spikes."""
        if substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {substeps}")
        currents = encode_currents(diff, self.c)
        counts = np.zeros(self.shape, dtype=np.int32)
        for _ in range(substeps):
            counts += self.step(currents, pool)
        return counts

    def spike_planes(self) -> dict[str, np.ndarray]:
        return {
            name: np.where(layer.spiked, 255, 0).astype(np.uint8)
            for name, layer in (("l2", self.l2), ("l3", self.l3), ("l4", self.l4))
        }


def network_build(
    width: int,
    height: int,
    params: NeuronParams | None = None,
    weights: SynapseWeights | None = None,
    c: float = 17.5,
) -> Network:
    return Network(width, height, params or NeuronParams(), weights or SynapseWeights(), c)


def network_step(net: Network, currents: np.ndarray, pool: RowPool = SERIAL) -> np.ndarray:
    return net.step(currents, pool)


def run_frame(net: Network, diff: np.ndarray, substeps: int = 1, pool: RowPool = SERIAL) -> np.ndarray:
    return net.run_frame(diff, substeps, pool)
