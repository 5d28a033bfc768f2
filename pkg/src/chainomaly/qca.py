"""Quantum cellular automata as layered circuits plus register shifts.

An expression is an ordered list of steps, each a translation-invariant
layer of disjoint gates or a shift of one on-site register. Steps act on
operators in list order: apply(expr, A) = step_n(...step_1(A)...). The
composition index (integer combinations of log-primes of register
dimensions) is computed symbolically from the shift content and can be
cross-checked numerically through support algebras across a cut.

Internally operators are tracked at register granularity: each (site,
register) pair is one tensor slot, and identity slots are trimmed after
every gate. That keeps swap-heavy circuits (stacked shift neutralizations)
at small matrix sizes regardless of their depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import _tensors as tz
from . import opwin
from .errors import (
    IndexMismatch,
    InvariantViolation,
    NonSquareRatio,
    NonZeroIndex,
    UnpairableShifts,
    ValidationError,
    WindowCapExceeded,
)
from .opwin import (
    DEFAULT_DIM_CAP,
    TOL_ALGEBRA,
    TOL_AUTO,
    LocalOperator,
    SiteSpec,
    Window,
)


def _factorize(m: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= m:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


@dataclass(frozen=True)
class PrimeLog:
    """Integer combination of log-primes, stored as (prime, exponent) pairs."""

    exponents: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        acc: dict[int, int] = {}
        for p, e in self.exponents:
            acc[p] = acc.get(p, 0) + e
        norm = tuple(sorted((p, e) for p, e in acc.items() if e != 0))
        object.__setattr__(self, "exponents", norm)

    @classmethod
    def zero(cls) -> "PrimeLog":
        return cls(())

    @classmethod
    def of_dimension(cls, m: int, k: int = 1) -> "PrimeLog":
        return cls(tuple((p, e * k) for p, e in _factorize(m).items()))

    def as_dict(self) -> dict[int, int]:
        return dict(self.exponents)

    @property
    def is_zero(self) -> bool:
        return not self.exponents

    def __add__(self, other: "PrimeLog") -> "PrimeLog":
        return PrimeLog(self.exponents + other.exponents)

    def __neg__(self) -> "PrimeLog":
        return PrimeLog(tuple((p, -e) for p, e in self.exponents))

    def __str__(self):
        if self.is_zero:
            return "0"
        return " + ".join(f"{e}*log{p}" for p, e in self.exponents)


@dataclass(frozen=True, eq=False)
class GateTemplate:
    """One gate of a layer: a unitary on `span` consecutive sites anchored at
    an offset. With `registers` set, the gate acts only on the listed
    (site_offset, register) slots, in that tensor order."""

    anchor: int
    span: int
    unitary: np.ndarray
    registers: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        m = np.array(self.unitary, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "unitary", m)
        if self.span < 1:
            raise ValidationError("gate span must be >= 1")
        if self.registers is not None:
            regs = tuple((int(a), int(b)) for a, b in self.registers)
            object.__setattr__(self, "registers", regs)

    def slots_at(self, base: int, nregs: int) -> tuple[int, ...]:
        if self.registers is None:
            return tuple(
                (base + off) * nregs + r for off in range(self.span) for r in range(nregs)
            )
        return tuple((base + off) * nregs + r for off, r in self.registers)

    def window_at(self, base: int) -> tuple[int, int]:
        return (base, base + self.span - 1)


@dataclass(frozen=True, eq=False)
class BlockLayer:
    """Translation-invariant layer: copies of each template at anchor + k*period.
    min_site/max_site truncate the layer by keeping only gates whose site
    window fits inside [min_site, max_site]."""

    period: int
    templates: tuple[GateTemplate, ...]
    min_site: int | None = None
    max_site: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        if self.period < 1:
            raise ValidationError("layer period must be >= 1")


@dataclass(frozen=True)
class ShiftPrimitive:
    """Shift one register by `displacement` sites (positive = right)."""

    register: int
    displacement: int

    def __post_init__(self):
        if self.displacement == 0:
            raise ValidationError("shift displacement must be nonzero")


Step = BlockLayer | ShiftPrimitive


def _validate_layer(layer: BlockLayer, sites: SiteSpec):
    R = sites.nregisters
    for t in layer.templates:
        if t.registers is not None:
            for off, r in t.registers:
                if not 0 <= off < t.span:
                    raise ValidationError(f"template offset {off} outside span {t.span}")
                if not 0 <= r < R:
                    raise ValidationError(f"template register {r} out of range")
            slots = t.slots_at(0, R)
            if any(a >= b for a, b in zip(slots, slots[1:])):
                raise ValidationError("template registers must be in slot order")
        dims = [sites.registers[s % R] for s in t.slots_at(0, R)]
        want = math.prod(dims)
        if t.unitary.shape != (want, want):
            raise ValidationError(
                f"gate matrix shape {t.unitary.shape} does not match slots (dim {want})"
            )
        if not tz.is_unitary(t.unitary, TOL_AUTO):
            raise ValidationError("gate matrix is not unitary within 1e-9")
    # translated copies must be pairwise slot-disjoint
    span_max = max(t.span for t in layer.templates)
    k_range = range(-(span_max // layer.period + 2), span_max // layer.period + 3)
    seen: dict[int, tuple[int, int]] = {}
    for ti, t in enumerate(layer.templates):
        for k in k_range:
            base = t.anchor + k * layer.period
            for s in t.slots_at(base, R):
                tag = seen.get(s)
                if tag is not None and tag != (ti, k):
                    raise ValidationError("layer gates overlap")
                seen[s] = (ti, k)


@dataclass(frozen=True, eq=False)
class QcaExpr:
    """Ordered steps on a fixed SiteSpec; applied to operators left to right."""

    sites: SiteSpec
    steps: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for step in self.steps:
            if isinstance(step, BlockLayer):
                _validate_layer(step, self.sites)
            elif isinstance(step, ShiftPrimitive):
                if not 0 <= step.register < self.sites.nregisters:
                    raise ValidationError(f"shift register {step.register} out of range")
            else:
                raise ValidationError(f"unknown step {step!r}")

    @property
    def has_shifts(self) -> bool:
        return any(isinstance(s, ShiftPrimitive) for s in self.steps)


def identity_expr(sites: SiteSpec) -> QcaExpr:
    return QcaExpr(sites, ())


def single_gate_expr(sites: SiteSpec, gate: LocalOperator) -> QcaExpr:
    """Conjugation by one local unitary, as a maximally truncated layer."""
    if gate.window.is_empty:
        return identity_expr(sites)
    w = gate.window
    tmpl = GateTemplate(anchor=w.lo, span=w.length, unitary=gate.mat)
    layer = BlockLayer(period=w.length, templates=(tmpl,), min_site=w.lo, max_site=w.hi)
    return QcaExpr(sites, (layer,))


def compose(e1: QcaExpr, e2: QcaExpr) -> QcaExpr:
    """apply(compose(e1, e2), A) = apply(e1, apply(e2, A))."""
    if e1.sites != e2.sites:
        raise ValidationError("composition across different SiteSpecs")
    return QcaExpr(e1.sites, e2.steps + e1.steps)


def invert(e: QcaExpr) -> QcaExpr:
    steps: list[Step] = []
    for step in reversed(e.steps):
        if isinstance(step, ShiftPrimitive):
            steps.append(ShiftPrimitive(step.register, -step.displacement))
        else:
            steps.append(
                replace(
                    step,
                    templates=tuple(
                        replace(t, unitary=t.unitary.conj().T) for t in step.templates
                    ),
                )
            )
    return QcaExpr(e.sites, tuple(steps))


def radius(e: QcaExpr) -> int:
    r = 0
    for step in e.steps:
        if isinstance(step, ShiftPrimitive):
            r += abs(step.displacement)
        else:
            r += max(t.span - 1 for t in step.templates)
    return r


# -- slot engine ---------------------------------------------------------------

def _slot_dims(sites: SiteSpec, slots) -> list[int]:
    R = sites.nregisters
    return [sites.registers[s % R] for s in slots]


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _layer_gates(layer: BlockLayer, sites: SiteSpec, slots) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """All gates of the layer whose slots intersect `slots`."""
    if not slots:
        return []
    R = sites.nregisters
    lo_site = min(slots) // R
    hi_site = max(slots) // R
    sset = set(slots)
    out = []
    for t in layer.templates:
        k_lo = _ceil_div(lo_site - t.span + 1 - t.anchor, layer.period)
        k_hi = (hi_site - t.anchor) // layer.period
        for k in range(k_lo, k_hi + 1):
            base = t.anchor + k * layer.period
            wlo, whi = t.window_at(base)
            if layer.min_site is not None and wlo < layer.min_site:
                continue
            if layer.max_site is not None and whi > layer.max_site:
                continue
            gslots = t.slots_at(base, R)
            if sset.intersection(gslots):
                out.append((gslots, t.unitary))
    out.sort(key=lambda g: g[0])
    return out


def _trim_batch(sites, slots, mats, candidates, tol=TOL_ALGEBRA):
    slots = list(slots)
    for s in sorted(set(candidates), reverse=True):
        if s not in slots or len(slots) == 0:
            continue
        dims = _slot_dims(sites, slots)
        idx = slots.index(s)
        if tz.factor_is_trivial_batch(mats, dims, idx, tol):
            keep = [i for i in range(len(slots)) if i != idx]
            mats = tz.partial_trace_keep_batch(mats, dims, keep, normalized=True)
            slots.pop(idx)
    return tuple(slots), mats


def _conj_gate_batch(sites, slots, mats, gslots, gmat, dim_cap):
    new_slots = tuple(sorted(set(slots) | set(gslots)))
    dims = _slot_dims(sites, new_slots)
    D = math.prod(dims)
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    if D > cap:
        raise WindowCapExceeded(f"transient dimension {D} exceeds cap {cap}")
    if new_slots != tuple(slots):
        pos = [new_slots.index(s) for s in slots]
        mats = tz.embed_factors_batch(mats, dims, pos)
    gpos = [new_slots.index(s) for s in gslots]
    G = tz.embed_factors(np.asarray(gmat, dtype=complex), dims, gpos)
    mats = G @ mats @ G.conj().T
    return _trim_batch(sites, new_slots, mats, gslots)


def _shift_batch(sites, slots, mats, register, displacement):
    R = sites.nregisters
    moved = [s + displacement * R if s % R == register else s for s in slots]
    order = sorted(range(len(moved)), key=lambda i: moved[i])
    if order != list(range(len(moved))):
        dims = _slot_dims(sites, slots)
        mats = tz.permute_factors_batch(mats, dims, order)
    return tuple(moved[i] for i in order), mats


def _run_batch(expr: QcaExpr, slots, mats, dim_cap=None):
    slots, mats = _trim_batch(expr.sites, slots, mats, slots)
    for step in expr.steps:
        if isinstance(step, ShiftPrimitive):
            slots, mats = _shift_batch(expr.sites, slots, mats, step.register, step.displacement)
        else:
            for gslots, gmat in _layer_gates(step, expr.sites, slots):
                slots, mats = _conj_gate_batch(expr.sites, slots, mats, gslots, gmat, dim_cap)
    return slots, mats


def _slots_of_window(sites: SiteSpec, window: Window) -> tuple[int, ...]:
    R = sites.nregisters
    if window.is_empty:
        return ()
    return tuple(range(window.lo * R, (window.hi + 1) * R))


def _batch_to_locals(sites, slots, mats) -> list[LocalOperator]:
    if not slots:
        return [opwin.scalar(sites, m[0, 0]) for m in mats]
    R = sites.nregisters
    lo, hi = min(slots) // R, max(slots) // R
    window = Window(lo, hi)
    full = _slots_of_window(sites, window)
    dims = _slot_dims(sites, full)
    pos = [full.index(s) for s in slots]
    big = tz.embed_factors_batch(mats, dims, pos)
    return [LocalOperator(sites, window, m) for m in big]


def apply(expr: QcaExpr, op: LocalOperator, dim_cap: int | None = None) -> LocalOperator:
    """Image of a local operator under the automorphism."""
    if op.sites != expr.sites:
        raise ValidationError("operator lives on a different SiteSpec")
    if op.window.is_empty:
        return op
    slots = _slots_of_window(expr.sites, op.window)
    slots, mats = _run_batch(expr, slots, op.mat[None], dim_cap)
    return _batch_to_locals(expr.sites, slots, mats)[0]


def apply_batch(expr: QcaExpr, window: Window, mats: np.ndarray, dim_cap: int | None = None) -> list[LocalOperator]:
    """Apply to a batch of operators sharing one window (trimming is shared,
    so all results come back on a common window)."""
    slots = _slots_of_window(expr.sites, window)
    slots, out = _run_batch(expr, slots, np.asarray(mats, dtype=complex), dim_cap)
    return _batch_to_locals(expr.sites, slots, out)


def matrix_unit_batch(dim: int) -> np.ndarray:
    """All dim^2 matrix units as a batch, unit (i, j) at index i*dim + j."""
    out = np.zeros((dim * dim, dim, dim), dtype=complex)
    i = np.repeat(np.arange(dim), dim)
    j = np.tile(np.arange(dim), dim)
    out[np.arange(dim * dim), i, j] = 1.0
    return out


# -- index computations --------------------------------------------------------

def gnvw_symbolic(expr: QcaExpr) -> PrimeLog:
    """Shift content of the expression: each register shift contributes its
    displacement times the prime exponents of the register dimension."""
    total = PrimeLog.zero()
    for step in expr.steps:
        if isinstance(step, ShiftPrimitive):
            m = expr.sites.registers[step.register]
            total = total + PrimeLog.of_dimension(m, step.displacement)
    return total


def support_algebra_dim(
    gens,
    part: Window,
    rank_tol: float = 1e-9,
    dim_cap: int | None = None,
) -> int:
    """Dimension of the algebra generated by the part-side coefficients of the
    generators, expanded in a Hilbert-Schmidt product basis of the complement
    and closed under multiplication."""
    gens = list(gens)
    if not gens:
        return 0
    sites = gens[0].sites
    d = sites.dim
    peff = sorted(
        {
            j
            for g in gens
            for j in g.window.sites()
            if part.contains_site(j)
        }
    )
    dims_p = [d] * len(peff)
    Dp = math.prod(dims_p) if peff else 1
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    if Dp > cap:
        raise WindowCapExceeded(f"support window dimension {Dp} exceeds cap {cap}")

    coeffs: list[np.ndarray] = []
    for g in gens:
        if g.window.is_empty:
            if abs(g.mat[0, 0]) > 1e-12:
                coeffs.append(np.eye(Dp, dtype=complex).reshape(1, Dp, Dp))
            continue
        wsites = list(g.window.sites())
        n = len(wsites)
        ov = [i for i, j in enumerate(wsites) if part.contains_site(j)]
        out = [i for i in range(n) if i not in ov]
        dims = [d] * n
        arr = g.mat.reshape(dims + dims)
        order = ov + out
        arr = arr.transpose([o for o in order] + [n + o for o in order])
        Dov = d ** len(ov)
        Dout = d ** len(out)
        arr = arr.reshape(Dov, Dout, Dov, Dout).transpose(1, 3, 0, 2).reshape(
            Dout * Dout, Dov, Dov
        )
        scale = max(1.0, float(np.max(np.abs(g.mat))))
        norms = np.linalg.norm(arr.reshape(arr.shape[0], -1), axis=1)
        block = arr[norms > 1e-12 * scale]
        if block.size == 0:
            continue
        pos = [peff.index(wsites[i]) for i in ov]
        coeffs.append(tz.embed_factors_batch(block, dims_p, pos) if peff else block)

    # close the span under multiplication, batched
    basis = np.zeros((0, Dp * Dp), dtype=complex)

    def absorb(cands: np.ndarray) -> np.ndarray:
        """Orthonormalize candidates against the basis; returns new rows."""
        nonlocal basis
        flat = cands.reshape(cands.shape[0], -1)
        nrm = np.linalg.norm(flat, axis=1)
        flat = flat[nrm > rank_tol]
        if flat.shape[0] == 0:
            return flat
        flat = flat / np.linalg.norm(flat, axis=1)[:, None]
        for _ in range(2):
            if basis.shape[0]:
                flat = flat - (flat @ basis.conj().T) @ basis
        if flat.shape[0] == 0:
            return flat
        u, s, vh = np.linalg.svd(flat, full_matrices=False)
        new = vh[s > rank_tol]
        if new.shape[0]:
            basis = np.vstack([basis, new])
        return new

    fresh = absorb(np.concatenate(coeffs)) if coeffs else np.zeros((0, Dp * Dp))
    while fresh.shape[0]:
        if basis.shape[0] > Dp * Dp:
            raise InvariantViolation("support algebra closure exceeded full dimension")
        a = fresh.reshape(-1, Dp, Dp)
        b = basis.reshape(-1, Dp, Dp)
        prods = np.concatenate(
            [
                np.einsum("aij,bjk->abik", a, b).reshape(-1, Dp, Dp),
                np.einsum("aij,bjk->abik", b, a).reshape(-1, Dp, Dp),
            ]
        )
        fresh = absorb(prods)
    return basis.shape[0]


def gnvw_numeric(
    expr: QcaExpr,
    dim_cap: int | None = None,
    rank_tol: float = 1e-9,
    max_input_dim: int = 64,
) -> PrimeLog:
    """Numeric cross-check of the shift content through support algebras
    across the cut between sites -1 and 0. Raises IndexMismatch if it
    disagrees with gnvw_symbolic (the symbolic value is authoritative)."""
    r = max(radius(expr), 1)
    d = expr.sites.dim
    if d ** (2 * r) > max_input_dim:
        raise WindowCapExceeded(
            f"numeric index at radius {r} and site dimension {d} needs a "
            f"{d ** (4 * r)}-element operator basis; cap is {max_input_dim}^2"
        )

    def side(input_window: Window, part: Window) -> int:
        D = d ** input_window.length
        units = matrix_unit_batch(D)
        images = apply_batch(expr, input_window, units, dim_cap)
        return support_algebra_dim(images, part, rank_tol, dim_cap)

    dim_r = side(Window(-2 * r, -1), Window(0, 3 * r))
    dim_l = side(Window(0, 2 * r - 1), Window(-3 * r, -1))
    ratio = Fraction(dim_r, dim_l)
    ns, ds = math.isqrt(ratio.numerator), math.isqrt(ratio.denominator)
    if ns * ns != ratio.numerator or ds * ds != ratio.denominator:
        raise NonSquareRatio(
            f"support dimension ratio {dim_r}/{dim_l} is not the square of a rational"
        )
    result = PrimeLog.of_dimension(ns, 1) + PrimeLog.of_dimension(ds, -1)
    expected = gnvw_symbolic(expr)
    if result != expected:
        raise IndexMismatch(
            f"numeric index {result} (dims {dim_r}/{dim_l}) disagrees with "
            f"symbolic {expected}"
        )
    return result


# -- shift neutralization --------------------------------------------------------

def _template_touches_register(t: GateTemplate, reg: int, nregs: int) -> bool:
    if t.registers is None:
        return True
    return any(r == reg for _, r in t.registers)


def _layer_commutes_with_unit_shift(layer: BlockLayer, reg: int, sites: SiteSpec) -> bool:
    R = sites.nregisters
    if all(not _template_touches_register(t, reg, R) for t in layer.templates):
        return True
    # uniform on-site layers that factorize across the shifted register
    if layer.period != 1 or len(layer.templates) != 1:
        return False
    if layer.min_site is not None or layer.max_site is not None:
        return False
    t = layer.templates[0]
    if t.span != 1:
        return False
    slots = t.slots_at(0, R)
    dims = [sites.registers[s % R] for s in slots]
    part = [i for i, s in enumerate(slots) if s % R == reg]
    return tz.operator_schmidt_rank_one(t.unitary, dims, part, tol=TOL_ALGEBRA)


def _pair_swap_steps(sites: SiteSpec, reg_plus: int, reg_minus: int) -> tuple[Step, Step]:
    """Two layers equal to (shift reg_plus right one site) * (shift reg_minus
    left one site): an on-site register swap followed by a staggered swap."""
    regs = sites.registers
    m = regs[reg_plus]
    swap_onsite = tz.factor_swap_matrix(list(regs), reg_plus, reg_minus)
    s_layer = BlockLayer(period=1, templates=(GateTemplate(0, 1, swap_onsite),))
    swap_pair = tz.factor_swap_matrix([m, m], 0, 1)
    st_layer = BlockLayer(
        period=1,
        templates=(
            GateTemplate(0, 2, swap_pair, registers=((0, reg_minus), (1, reg_plus))),
        ),
    )
    return s_layer, st_layer


def balance_shifts(expr: QcaExpr, dim_cap: int | None = None, tol: float = TOL_AUTO) -> QcaExpr:
    """Replace all shift steps by swap circuits. Requires zero total index;
    unit shifts of equal-dimension registers with opposite signs are paired
    greedily in step order."""
    if not expr.has_shifts:
        return expr
    if not gnvw_symbolic(expr).is_zero:
        raise NonZeroIndex(f"nonzero index {gnvw_symbolic(expr)}: not a circuit")
    sites = expr.sites
    layers: list[Step] = []
    carried: list[ShiftPrimitive] = []
    for step in expr.steps:
        if isinstance(step, ShiftPrimitive):
            sign = 1 if step.displacement > 0 else -1
            carried.extend(
                ShiftPrimitive(step.register, sign) for _ in range(abs(step.displacement))
            )
        else:
            for sh in carried:
                if not _layer_commutes_with_unit_shift(step, sh.register, sites):
                    raise UnpairableShifts(
                        "cannot normalize step order: a shift does not commute "
                        "with a later layer"
                    )
            layers.append(step)
    # greedy pairing of opposite unit shifts on equal-dimension registers
    unpaired: list[ShiftPrimitive] = []
    pairs: list[tuple[int, int]] = []
    for sh in carried:
        mate = None
        for i, other in enumerate(unpaired):
            if (
                other.displacement == -sh.displacement
                and sites.registers[other.register] == sites.registers[sh.register]
            ):
                mate = i
                break
        if mate is None:
            unpaired.append(sh)
        else:
            other = unpaired.pop(mate)
            plus, minus = (sh, other) if sh.displacement > 0 else (other, sh)
            pairs.append((plus.register, minus.register))
    if unpaired:
        raise UnpairableShifts(
            f"{len(unpaired)} unit shifts have no equal-dimension partner"
        )
    steps = list(layers)
    for reg_plus, reg_minus in pairs:
        if reg_plus == reg_minus:
            continue  # opposite shifts of one register cancel outright
        steps.extend(_pair_swap_steps(sites, reg_plus, reg_minus))
    out = QcaExpr(sites, tuple(steps))
    _verify_same_action(expr, out, tol, dim_cap)
    return out


def action_distance_on_units(
    e1: QcaExpr, e2: QcaExpr, window: Window, mats: np.ndarray, dim_cap=None
) -> float:
    """Largest Frobenius distance between the images of a unit batch under two
    expressions (an upper bound for the operator-norm distance), computed at
    slot granularity so big common windows are never materialized."""
    sl1, m1 = _run_batch(e1, _slots_of_window(e1.sites, window), mats, dim_cap)
    sl2, m2 = _run_batch(e2, _slots_of_window(e2.sites, window), mats, dim_cap)
    union = tuple(sorted(set(sl1) | set(sl2)))
    if not union:
        return float(np.max(np.abs(m1 - m2)))
    dims = _slot_dims(e1.sites, union)
    if sl1 != union:
        m1 = tz.embed_factors_batch(m1, dims, [union.index(s) for s in sl1])
    if sl2 != union:
        m2 = tz.embed_factors_batch(m2, dims, [union.index(s) for s in sl2])
    diff = m1 - m2
    per_unit = np.sqrt(np.sum(np.abs(diff) ** 2, axis=(1, 2)))
    return float(np.max(per_unit))


def _verify_same_action(e1: QcaExpr, e2: QcaExpr, tol: float, dim_cap=None):
    d = e1.sites.dim
    rr = max(radius(e1), radius(e2), 1) + 1
    units = matrix_unit_batch(d)
    for j in range(-rr, rr + 1):
        if action_distance_on_units(e1, e2, Window.site(j), units, dim_cap) > tol:
            raise InvariantViolation(
                f"shift neutralization changed the action at site {j}"
            )


# -- serialization ----------------------------------------------------------------

def step_to_data(step: Step) -> dict:
    if isinstance(step, ShiftPrimitive):
        return {"kind": "shift", "register": step.register, "displacement": step.displacement}
    data = {
        "kind": "layer",
        "period": step.period,
        "templates": [
            {
                "anchor": t.anchor,
                "span": t.span,
                "unitary": opwin.matrix_to_pairs(t.unitary),
                **(
                    {"registers": [list(x) for x in t.registers]}
                    if t.registers is not None
                    else {}
                ),
            }
            for t in step.templates
        ],
    }
    if step.min_site is not None:
        data["min_site"] = step.min_site
    if step.max_site is not None:
        data["max_site"] = step.max_site
    return data


def step_from_data(data: dict) -> Step:
    kind = data.get("kind")
    if kind == "shift":
        return ShiftPrimitive(int(data["register"]), int(data["displacement"]))
    if kind == "layer":
        templates = tuple(
            GateTemplate(
                anchor=int(t["anchor"]),
                span=int(t["span"]),
                unitary=opwin.matrix_from_pairs(t["unitary"]),
                registers=(
                    tuple((int(a), int(b)) for a, b in t["registers"])
                    if "registers" in t
                    else None
                ),
            )
            for t in data["templates"]
        )
        return BlockLayer(
            period=int(data["period"]),
            templates=templates,
            min_site=data.get("min_site"),
            max_site=data.get("max_site"),
        )
    raise ValidationError(f"unknown step kind {kind!r}")


def expr_to_data(expr: QcaExpr) -> list[dict]:
    return [step_to_data(s) for s in expr.steps]


def expr_from_data(sites: SiteSpec, data) -> QcaExpr:
    return QcaExpr(sites, tuple(step_from_data(s) for s in data))
