"""Dense position-grid simulator for up to three modes and one qubit.

Amplitudes are sampled wavefunction values on a tensor grid with the qubit
as the last axis, normalized so that sum |amp|^2 * prod(h) = 1. Gates act
in place and return the state so calls can be chained.

Momentum follows the homodyne convention psihat(p) = (2 pi)^-1/2 int psi(x)
e^{ipx} dx; the unit-period variable used by the spectral module is
w = p / (2 pi).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import czt

from . import gkpmath, numtheory

DEFAULT_BUDGET = 2 ** 24
SUPPORT_TOL = 1e-12


class GridError(ValueError):
    """Base class for grid misuse."""


class SupportError(GridError):
    """Wavefunction mass would leave the grid."""


class AlignmentError(GridError):
    """A gate needs grid-aligned shifts or matching spacings."""


class BudgetError(GridError):
    """Requested state exceeds the amplitude budget."""


@dataclass(frozen=True)
class GridSpec:
    """G points with spacing h starting at origin_offset (centered by default)."""

    points: int
    spacing: float
    origin_offset: Optional[float] = None

    def __post_init__(self):
        G = self.points
        if G < 2 or G & (G - 1):
            raise GridError("points must be a power of two")
        if not self.spacing > 0:
            raise GridError("spacing must be positive")
        if self.origin_offset is None:
            object.__setattr__(self, "origin_offset", -G * self.spacing / 2)

    @classmethod
    def rotation_grid(cls, points: int) -> "GridSpec":
        """Centered grid with G h^2 = 2 pi, mapped onto itself by the DFT."""
        return cls(points, math.sqrt(2 * math.pi / points))

    @property
    def centered(self) -> bool:
        return abs(self.origin_offset + self.points * self.spacing / 2) <= 1e-12 * self.points * self.spacing

    @property
    def rotation_accurate(self) -> bool:
        return abs(self.points * self.spacing ** 2 - 2 * math.pi) <= 1e-12 * 2 * math.pi

    def coords(self) -> np.ndarray:
        return self.origin_offset + self.spacing * np.arange(self.points)

    def scaled(self, alpha: float) -> "GridSpec":
        return GridSpec(self.points, self.spacing * alpha, self.origin_offset * alpha)

    def momentum_coords(self) -> np.ndarray:
        """Centered momentum grid of the DFT, spacing 2 pi / (G h)."""
        hp = 2 * math.pi / (self.points * self.spacing)
        return hp * (np.arange(self.points) - self.points // 2)


class GridState:
    """Amplitude tensor of shape (G_1, ..., G_k, 2) plus one GridSpec per mode."""

    def __init__(self, specs: Sequence[GridSpec], amp: np.ndarray, budget: int = DEFAULT_BUDGET):
        specs = tuple(specs)
        if not 1 <= len(specs) <= 3:
            raise GridError("between one and three modes are supported")
        shape = tuple(s.points for s in specs) + (2,)
        size = int(np.prod(shape))
        if size > budget:
            raise BudgetError(f"{size} amplitudes exceed the budget of {budget}")
        amp = np.asarray(amp, dtype=complex)
        if amp.shape != shape:
            raise GridError(f"amplitude shape {amp.shape} does not match {shape}")
        self.specs = specs
        self.amp = amp
        self.budget = budget

    # qubit blocks are stored contiguously; amp is a qubit-last view of them
    @property
    def amp(self) -> np.ndarray:
        return np.moveaxis(self._data, 0, -1)

    @amp.setter
    def amp(self, value):
        self._data = np.ascontiguousarray(np.moveaxis(np.asarray(value, dtype=complex), -1, 0))

    def block(self, b: int) -> np.ndarray:
        """Writable view of the amplitudes with the qubit in |b>."""
        return self._data[b]

    @property
    def n_modes(self) -> int:
        return len(self.specs)

    @property
    def cell(self) -> float:
        return float(np.prod([s.spacing for s in self.specs]))

    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self._data, self._data).real) * self.cell)

    def copy(self) -> "GridState":
        out = GridState.__new__(GridState)
        out.specs, out._data, out.budget = self.specs, self._data.copy(), self.budget
        return out

    def qubit_probabilities(self) -> np.ndarray:
        return np.array([float(np.vdot(self._data[b], self._data[b]).real) for b in (0, 1)]) * self.cell

    def marginal(self, mode: int) -> np.ndarray:
        """Position density of one mode, summed over everything else."""
        axes = tuple(i for i in range(self.n_modes + 1) if i != mode)
        cell = self.cell / self.specs[mode].spacing
        return np.sum(np.abs(self.amp) ** 2, axis=axes) * cell


def inner(s1: GridState, s2: GridState) -> complex:
    """<s1, s2> on identical grids."""
    if s1.specs != s2.specs:
        _require_same_grid(s1.specs, s2.specs)
    return complex(np.vdot(s1._data, s2._data)) * s1.cell


def _require_same_grid(a, b, tol=1e-12):
    for x, y in zip(a, b):
        if x.points != y.points or abs(x.spacing - y.spacing) > tol * x.spacing or \
                abs(x.origin_offset - y.origin_offset) > tol * max(1.0, abs(x.origin_offset)):
            raise AlignmentError("states live on different grids")
    if len(a) != len(b):
        raise AlignmentError("states have different mode counts")


def fidelity(s1: GridState, s2: GridState) -> float:
    return abs(inner(s1, s2)) ** 2 / (inner(s1, s1).real * inner(s2, s2).real)


def trace_distance(s1: GridState, s2: GridState) -> float:
    return 2 * math.sqrt(max(0.0, 1 - fidelity(s1, s2)))


# ------------------------------------------------------------ preparation

def prepare_mode(kind: str, spec: GridSpec, **kw) -> np.ndarray:
    """Sampled single-mode wavefunction, normalized on the grid.

    kind: 'vacuum', 'squeezed' (delta), 'comb' (spacing, kappa, delta, eps,
    window, shift=0) or 'position_peak' (x, delta, eps=None).
    """
    x = spec.coords()
    if kind == "vacuum":
        psi = gkpmath.psi_delta(x, 1.0)
    elif kind == "squeezed":
        psi = gkpmath.psi_delta(x, kw["delta"])
    elif kind == "position_peak":
        eps = kw.get("eps")
        if eps is None:
            psi = gkpmath.psi_delta(x - kw["x"], kw["delta"])
        else:
            psi = gkpmath.truncated_peak(x, kw["x"], kw["delta"], eps)
    elif kind == "comb":
        psi = comb_wavefunction(x, kw["spacing"], kw["kappa"], kw["delta"], kw.get("eps"),
                                kw["window"], kw.get("shift", 0.0))
    else:
        raise GridError(f"unknown preparation {kind!r}")
    psi = np.asarray(psi, dtype=complex)
    mass = float(np.sum(np.abs(psi) ** 2)) * spec.spacing
    if mass == 0.0:
        raise SupportError("the prepared state has no mass on the grid")
    psi /= math.sqrt(mass)
    edge = max(1, spec.points // 64)
    tail = float(np.sum(np.abs(psi[:edge]) ** 2) + np.sum(np.abs(psi[-edge:]) ** 2)) * spec.spacing
    if tail > SUPPORT_TOL:
        raise SupportError(f"{kind} state has mass {tail:.2e} at the grid edge")
    return psi


def comb_wavefunction(x, spacing, kappa, delta, eps, window, shift=0.0):
    """Unnormalized truncated comb: sum_{|z|<=window} eta(z) peak(x - shift - spacing z)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for z in range(-int(window), int(window) + 1):
        c = shift + spacing * z
        if eps is None:
            peak = gkpmath.psi_delta(x - c, delta)
        else:
            peak = gkpmath.truncated_peak(x, c, delta, eps)
        out += float(gkpmath.eta_kappa(z, kappa)) * peak
    return out


def product_state(specs: Sequence[GridSpec], wavefunctions: Sequence[np.ndarray], qubit: int = 0,
                  budget: int = DEFAULT_BUDGET) -> GridState:
    """psi_1 (x) ... (x) psi_k (x) |qubit>."""
    shape = tuple(s.points for s in specs) + (2,)
    if int(np.prod(shape)) > budget:
        raise BudgetError(f"{int(np.prod(shape))} amplitudes exceed the budget of {budget}")
    amp = np.zeros(shape, dtype=complex)
    block = wavefunctions[0]
    for psi in wavefunctions[1:]:
        block = np.multiply.outer(block, psi)
    amp[..., qubit] = block
    return GridState(specs, amp, budget)


def prepare(kind: str, spec: GridSpec, qubit: int = 0, **kw) -> GridState:
    return product_state([spec], [prepare_mode(kind, spec, **kw)], qubit)


# ------------------------------------------------------------ gate helpers

def _axis_view(state: GridState, mode: int, control: Optional[int]):
    if not 0 <= mode < state.n_modes:
        raise GridError(f"mode {mode} out of range")
    return state.amp if control is None else state.block(control)


def _bcast(vec, mode, ndim):
    shape = [1] * ndim
    shape[mode] = -1
    return vec.reshape(shape)


def _check_control(control):
    if control not in (None, 0, 1):
        raise GridError("control must be None, 0 or 1")


def _shift_axis(arr: np.ndarray, axis: int, k: int, tol: float = SUPPORT_TOL, cell: float = 1.0):
    """Shift arr in place by k indices along axis with zero fill.

    Raises SupportError (leaving arr untouched) if mass would fall off.
    """
    if k == 0:
        return arr
    n = arr.shape[axis]

    def sl(a, b):
        idx = [slice(None)] * arr.ndim
        idx[axis] = slice(a, b)
        return tuple(idx)

    k = max(-n, min(n, k))
    lost = arr[sl(n - k, n)] if k > 0 else arr[sl(0, -k)]
    if lost.size and float(np.vdot(lost, lost).real) * cell > tol:
        raise SupportError("shift pushes mass off the grid")
    if k > 0:
        arr[sl(k, n)] = arr[sl(0, n - k)]
        arr[sl(0, k)] = 0
    else:
        arr[sl(0, n + k)] = arr[sl(-k, n)]
        arr[sl(n + k, n)] = 0
    return arr


# ---------------------------------------------------------------- the gates

def phase_Q(state: GridState, mode: int, theta: float, control: Optional[int] = None) -> GridState:
    """exp(i theta Q) on one mode."""
    _check_control(control)
    view = _axis_view(state, mode, control)
    x = state.specs[mode].coords()
    view *= _bcast(np.exp(1j * theta * x), mode, view.ndim)
    return state


def shift_P(state: GridState, mode: int, t: float, control: Optional[int] = None) -> GridState:
    """exp(-i t P): psi(x) -> psi(x - t).

    Grid-aligned t is an exact index shift. Any other t goes through the
    momentum-space phase exp(-i t p) on the periodic grid, which is unitary
    but wraps mass across the edges.
    """
    _check_control(control)
    spec = state.specs[mode]
    k = t / spec.spacing
    kr = round(k)
    cell = state.cell
    if abs(k - kr) <= 1e-9:
        _shift_axis(_axis_view(state, mode, control), mode, kr, cell=cell)
        return state
    view = _axis_view(state, mode, control)
    p = 2 * math.pi * np.fft.fftfreq(spec.points, spec.spacing)
    f = np.fft.fft(view, axis=mode)
    f *= _bcast(np.exp(-1j * t * p), mode, f.ndim)
    res = np.fft.ifft(f, axis=mode)
    if control is None:
        state.amp = res
    else:
        state.block(control)[...] = res
    return state


def squeeze(state: GridState, mode: int, alpha: float) -> GridState:
    """M_alpha: psi(x) -> alpha^-1/2 psi(x / alpha), done on the grid metadata."""
    if not alpha > 0:
        raise GridError("alpha must be positive")
    specs = list(state.specs)
    specs[mode] = specs[mode].scaled(alpha)
    state.specs = tuple(specs)
    state.amp *= alpha ** -0.5
    return state


def _centered_dft(data: np.ndarray, axis: int, h: float, sign: int):
    """Quarter rotation along axis; returns (data, new spacing).

    sign=+1 is exp(i pi N / 2), which maps Q to -P and P to Q:
    phi(p) = (2 pi)^-1/2 int psi(x) e^{-ipx} dx. sign=-1 is its inverse.
    """
    G = data.shape[axis]
    shifted = np.fft.ifftshift(data, axes=axis)
    f = np.fft.fft(shifted, axis=axis) if sign > 0 else np.fft.ifft(shifted, axis=axis) * G
    out = np.fft.fftshift(f, axes=axis) * (h / math.sqrt(2 * math.pi))
    return out, 2 * math.pi / (G * h)


def rotate_quarter(state: GridState, mode: int, sign: int = 1, control: Optional[int] = None) -> GridState:
    """exp(+-i pi N / 2) by the centered DFT.

    Uncontrolled, any centered grid works and the spacing becomes
    2 pi / (G h). Controlled rotations need G h^2 = 2 pi so both qubit
    blocks stay on one grid.
    """
    _check_control(control)
    if sign not in (1, -1):
        raise GridError("sign must be +1 or -1")
    spec = state.specs[mode]
    if not spec.centered:
        raise AlignmentError("rotations need a centered grid")
    if control is not None and not spec.rotation_accurate:
        raise AlignmentError("controlled rotations need G h^2 = 2 pi")
    view = _axis_view(state, mode, control)
    out, hp = _centered_dft(view, mode, spec.spacing, sign)
    if control is None:
        state.amp = out
        specs = list(state.specs)
        specs[mode] = GridSpec(spec.points, hp)
        state.specs = tuple(specs)
    else:
        state.block(control)[...] = out
    return state


def hadamard(state: GridState) -> GridState:
    a0, a1 = state.block(0), state.block(1)
    a0 += a1          # a0 + a1
    a1 *= -2          # -2 a1
    a1 += a0          # a0 - a1
    state._data *= 1 / math.sqrt(2)
    return state


def two_mode_sum(state: GridState, m1: int, m2: int, sign: int = 1) -> GridState:
    """exp(-i sign Q_1 P_2): (x, y) -> (x, y + sign x), exact on aligned grids."""
    s1, s2 = state.specs[m1], state.specs[m2]
    if m1 == m2:
        raise GridError("two_mode_sum needs two distinct modes")
    if abs(s1.spacing - s2.spacing) > 1e-12 * s1.spacing:
        raise AlignmentError("two_mode_sum needs equal spacings")
    steps = s1.coords() / s1.spacing
    if np.max(np.abs(steps - np.round(steps))) > 1e-9:
        raise AlignmentError("mode grid is not aligned to multiples of its spacing")
    steps = np.round(steps).astype(int) * sign
    cell = state.cell
    axis = m2 - (1 if m2 > m1 else 0)
    amp = state.amp
    for i, k in enumerate(steps):
        idx = [slice(None)] * amp.ndim
        idx[m1] = i
        _shift_axis(amp[tuple(idx)], axis, int(k), cell=cell)
    return state


# ------------------------------------------------------- composite circuits

def lsb_circuit(state: GridState, mode: int = 0, adjoint: bool = False) -> GridState:
    """H, controlled exp(i pi Q), H: writes round(x) mod 2 into the qubit."""
    hadamard(state)
    phase_Q(state, mode, -math.pi if adjoint else math.pi, control=1)
    return hadamard(state)


def _resample(data: np.ndarray, axis: int, src: GridSpec, dst: GridSpec, tol: float = 1e-9):
    """Band-limited (trigonometric) interpolation from one centered grid to another.

    Target points outside the source window get zero; losing more than tol
    of the mass there raises SupportError.
    """
    G = src.points
    data = np.moveaxis(data, axis, -1)
    coef = np.fft.fft(np.fft.ifftshift(data, axes=-1), axis=-1) / G
    coef = np.fft.fftshift(coef, axes=-1)  # index n <-> frequency n - G/2
    ratio = dst.spacing / src.spacing
    # psi(x_t) = sum_n coef_n exp(2 pi i (n - G/2) u_t / G) with u_t = x_t / h_src
    u0 = dst.origin_offset / src.spacing
    n = np.arange(G)
    pre = coef * np.exp(2j * math.pi * n * u0 / G)
    w = np.exp(2j * math.pi * ratio / G)
    vals = czt(pre, m=dst.points, w=w, a=1.0, axis=-1)
    t = np.arange(dst.points)
    vals = vals * np.exp(-1j * math.pi * (u0 + t * ratio))
    x = dst.coords()
    lo, hi = src.origin_offset, src.origin_offset + (G - 1) * src.spacing
    outside = (x < lo - 1e-12) | (x > hi + 1e-12)
    if np.any(outside):
        vals[..., outside] = 0.0
    before = float(np.sum(np.abs(data) ** 2)) * src.spacing
    after = float(np.sum(np.abs(vals) ** 2)) * dst.spacing
    if before - after > tol * max(before, 1e-300):
        raise SupportError(f"resampling lost {before - after:.2e} of the mass")
    return np.moveaxis(vals, -1, axis)


def ctrlM_alpha(state: GridState, mode: int, alpha: float) -> GridState:
    """Qubit-controlled M_alpha on one mode.

    Gate by gate: M_sqrt(alpha), controlled exp(i pi N/2), M_sqrt(alpha)^dagger,
    controlled exp(-i pi N/2). Squeezes only relabel spacings, so afterwards
    the qubit-1 block sits on a grid alpha times wider than the qubit-0
    block; it is then moved back by band-limited interpolation, whose
    error is the discretization error of this gate.
    """
    if not alpha > 0:
        raise GridError("alpha must be positive")
    if alpha == 1:
        return state  # M_1 = I and the two rotations cancel
    spec = state.specs[mode]
    if not spec.centered:
        raise AlignmentError("ctrlM_alpha needs a centered grid")
    ra = math.sqrt(alpha)
    squeeze(state, mode, ra)
    h = state.specs[mode].spacing
    block, h1 = _centered_dft(state.block(1), mode, h, +1)
    squeeze(state, mode, 1 / ra)
    block *= ra ** 0.5  # block is a copy, so apply the squeeze normalization by hand
    h1 /= ra
    block, h1 = _centered_dft(block, mode, h1, -1)
    target = state.specs[mode]
    src = GridSpec(target.points, h1)
    state.block(1)[...] = _resample(block, mode, src, target)
    return state


def V_alpha(state: GridState, alpha: float, modes=(0, 1, 2)) -> GridState:
    """(x, y, z) -> ((x - x0)/2, alpha^x0 y, 2z + x0) for integer x, z and qubit |0>."""
    A, B, C = modes
    squeeze(state, C, 2.0)
    lsb_circuit(state, A)
    shift_P(state, A, -1.0, control=1)
    ctrlM_alpha(state, B, alpha)
    shift_P(state, C, 1.0, control=1)
    lsb_circuit(state, C)
    return squeeze(state, A, 0.5)


def V_alpha_dag(state: GridState, alpha: float, modes=(0, 1, 2)) -> GridState:
    A, B, C = modes
    squeeze(state, A, 2.0)
    lsb_circuit(state, C, adjoint=True)
    shift_P(state, C, -1.0, control=1)
    ctrlM_alpha(state, B, 1.0 / alpha)
    shift_P(state, A, 1.0, control=1)
    lsb_circuit(state, A, adjoint=True)
    return squeeze(state, C, 0.5)


def V_aNm(state: GridState, a: int, N: int, m: int, modes=(0, 1, 2)) -> GridState:
    """Multiply mode B by f_{a,N,m}(x_A): m parity extractions, then m V_1^dagger."""
    for alpha in numtheory.power_table(a, N, m):
        V_alpha(state, alpha, modes)
    for _ in range(m):
        V_alpha_dag(state, 1.0, modes)
    return state


def V_aNm_dag(state: GridState, a: int, N: int, m: int, modes=(0, 1, 2)) -> GridState:
    for _ in range(m):
        V_alpha(state, 1.0, modes)
    for alpha in reversed(numtheory.power_table(a, N, m)):
        V_alpha_dag(state, alpha, modes)
    return state


def U_aNm(state: GridState, a: int, N: int, m: int, modes=(0, 1, 2)) -> GridState:
    """V_{a,N,m} exp(-i P_B) V_{a,N,m}^dagger: y -> y + f_{a,N,m}(x)."""
    V_aNm_dag(state, a, N, m, modes)
    shift_P(state, modes[1], 1.0)
    return V_aNm(state, a, N, m, modes)


# --------------------------------------------------------------- readout

def p_quadrature_pdf(state: GridState, mode: int):
    """(p, density) of a homodyne P measurement on one mode (main-text momenta)."""
    spec = state.specs[mode]
    if not spec.centered:
        raise AlignmentError("p_quadrature_pdf needs a centered grid")
    # e^{+ipx} kernel: the inverse quarter rotation evaluated on the momentum grid
    phi, hp = _centered_dft(state.amp, mode, spec.spacing, -1)
    axes = tuple(i for i in range(state.n_modes + 1) if i != mode)
    other = state.cell / spec.spacing
    dens = np.sum(np.abs(phi) ** 2, axis=axes) * other
    p = hp * (np.arange(spec.points) - spec.points // 2)
    return p, dens


def position_pdf(state: GridState, mode: int):
    return state.specs[mode].coords(), state.marginal(mode)


def dump_csv(path, coords, density, header=("coordinate", "density")):
    """Write a density as two CSV columns with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for x, d in zip(coords, density):
            w.writerow([f"{x:.17g}", f"{d:.17g}"])


def from_peaks(peaks, specs: Sequence[GridSpec], budget: int = DEFAULT_BUDGET) -> GridState:
    """Render a single-peak PeakState onto a grid (comb modes are not supported)."""
    if any(s.comb for s in peaks.shapes) or np.any(peaks.sB != 1):
        raise GridError("only unscaled single-peak states can be rendered")
    shape = tuple(s.points for s in specs) + (2,)
    amp = np.zeros(shape, dtype=complex)
    centers = (peaks.cA, peaks.cB, peaks.cC)
    for i in range(len(peaks)):
        block = None
        for k, spec in enumerate(specs):
            sh = peaks.shapes[k]
            psi = _render_peak(spec, centers[k][i], sh.delta, sh.eps)
            block = psi if block is None else np.multiply.outer(block, psi)
        amp[..., int(peaks.q[i])] += peaks.amp[i] * block
    state = GridState(specs, amp, budget)
    state._data /= state.norm()
    return state


def _render_peak(spec, center, delta, eps):
    x = spec.coords()
    if eps is None:
        psi = gkpmath.psi_delta(x - center, delta)
    else:
        psi = gkpmath.truncated_peak(x, center, delta, eps)
    psi = psi.astype(complex)
    return psi / math.sqrt(float(np.sum(np.abs(psi) ** 2)) * spec.spacing)
