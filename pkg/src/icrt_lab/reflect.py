"""Reflected excursions: jump intervals, subtracted components, couplings.

Each upward jump of an excursion-type path opens an interval ending at the
first return to the pre-jump level.  Subtracting, over every such interval,
the running infimum measured from the jump turns the path into a continuous
nonnegative excursion.  An independent cross-check computes the same object
as the Lebesgue measure of the range of the backward running-infimum map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotExcursionError
from .paths import (
    CadlagPath,
    Theta,
    build_ei_bridge,
    combine,
    cyclic_shift,
    first_passage_below,
    running_infimum_forward,
    sample_brownian_bridge,
    vervaat_transform,
)
from .rng import RngState

EXCURSION_DIP_TOL = 1e-9


@dataclass(frozen=True)
class JumpInterval:
    """One upward jump: open time, first-return time, jump size."""

    index: int
    t_open: float
    t_close: float
    size: float
    closed: bool = True  # False when no return happens by the domain end


def jump_intervals(x: CadlagPath, strict: bool = True) -> list[JumpInterval]:
    """One interval per upward jump of x, closed at the first passage back
    to the pre-jump level.  The collection is laminar.

    With strict=True the input must be excursion-like (raises
    NotExcursionError if it dips below -1e-9); with strict=False a missing
    return is clamped to the domain end.
    """
    if strict and x.min_value() < -EXCURSION_DIP_TOL:
        raise NotExcursionError(f"path dips to {x.min_value():.3g}")
    out = []
    times, sizes = x.jumps()
    idx = 0
    for t_j, s in zip(times, sizes):
        if s <= 0:
            continue
        level = x.left_limit(t_j)
        t_close = first_passage_below(x, t_j, level)
        closed = t_close is not None
        if not closed:
            if strict:
                raise NotExcursionError(f"jump at {t_j} never returns to its base level")
            t_close = x.t1
        out.append(JumpInterval(idx, float(t_j), float(t_close), float(s), closed))
        idx += 1
    return out


def reflect_component(x: CadlagPath, iv: JumpInterval) -> CadlagPath:
    """Running infimum from the jump time, re-based at the pre-jump level.

    Supported on [t_open, t_close]: starts at the jump size, is nonincreasing,
    returns to 0 at t_close, and vanishes elsewhere on the domain of x.
    """
    level = x.left_limit(iv.t_open)
    inner = running_infimum_forward(x, iv.t_open, iv.t_close)
    t = inner.times
    left = inner.left - level
    right = inner.right - level
    left[0] = 0.0  # support boundary: zero before the jump
    if iv.closed:
        # the running infimum meets the level at t_close up to solver rounding
        left[-1] = right[-1] = 0.0
    pre_t, pre_l, pre_r = [x.t0], [0.0], [0.0]
    if iv.t_open == x.t0:
        pre_t, pre_l, pre_r = [], [], []
    post_t, post_l, post_r = [x.t1], [0.0 if iv.closed else left[-1]], [0.0 if iv.closed else right[-1]]
    if iv.t_close == x.t1:
        post_t, post_l, post_r = [], [], []
    return CadlagPath(
        np.concatenate([pre_t, t, post_t]),
        np.concatenate([pre_l, left, post_l]),
        np.concatenate([pre_r, right, post_r]),
    )


def reflected_excursion(x: CadlagPath, strict: bool = True) -> CadlagPath:
    """Subtract every jump's reflect_component from x.

    For an excursion-type input the result is continuous (each jump cancels
    exactly), nonnegative, and shares x's endpoints.
    """
    ivs = jump_intervals(x, strict=strict)
    if not ivs:
        return x
    comps = [reflect_component(x, iv) for iv in ivs]
    return combine([x] + comps, [1.0] + [-1.0] * len(comps))


def infimum_range_measure(x: CadlagPath, s: float) -> float:
    """Lebesgue measure of {inf over [u, s] of x : 0 <= u <= s}.

    Computed as the total increase of the backward running-infimum map minus
    its jump sizes; serves as an independent oracle for reflected_excursion.
    """
    if not x.t0 <= s <= x.t1:
        raise ValueError("s out of domain")
    if s == x.t0:
        return 0.0
    sub = x if s == x.t1 else x.restrict(x.t0, s)
    t, l, r = sub.times, sub.left, sub.right
    a = np.empty(t.size)
    a[:-1] = np.minimum(r[:-1], l[1:])
    a[-1] = r[-1]
    m = np.minimum.accumulate(a[::-1])[::-1]
    gaps = np.maximum(m[1:] - l[1:], 0.0).sum()
    return float(r[-1] - m[0] - gaps)


# ---------------------------------------------------------------------------
# Sampling pipelines
# ---------------------------------------------------------------------------

def sample_excursion(theta: Theta, m: int, rng: RngState,
                     return_parts: bool = False):
    """Sample the excursion: bridge, atom jumps, then origin relocation."""
    bridge = sample_brownian_bridge(m, rng)
    ei = build_ei_bridge(theta, bridge, rng=rng)
    exc, t_min = vervaat_transform(ei)
    if return_parts:
        return exc, t_min, bridge, ei
    return exc


def sample_reflected(theta: Theta, m: int, rng: RngState) -> CadlagPath:
    """Sample the continuous reflected excursion for the given parameters."""
    return reflected_excursion(sample_excursion(theta, m, rng))


def truncated_coupling(theta: Theta, keep: int, bridge: CadlagPath,
                       jump_times, device: str = "partial"
                       ) -> tuple[CadlagPath, CadlagPath]:
    """Coupled pair (truncated, full) of reflected excursions.

    Both use the same bridge and jump times.  With device="partial" the
    truncated path subtracts only the `keep` largest atoms' reflection
    components from the shared excursion: these are the pointwise
    decreasing approximants of the reflected process, so the uniform gap
    equals the norm of the dropped components, is bounded by the dropped
    atoms' total size, and is nonincreasing in `keep` on every realization.

    With device="shifted" the truncated path is rebuilt from the bridge
    with the atom sum truncated and relocated at the FULL path's infimum
    time; the atom-tail bound still holds empirically but the gap need not
    be monotone realization by realization.
    """
    if not 0 <= keep <= theta.length:
        raise ValueError("keep must be between 0 and the number of atoms")
    jump_times = [float(u) for u in jump_times]
    full_ei = build_ei_bridge(theta, bridge, jump_times=jump_times)
    k = full_ei.argmin_breakpoint()
    t_min = float(full_ei.times[k])
    base_full = float(min(full_ei.left[k], full_ei.right[k]))
    x_full = cyclic_shift(full_ei, t_min, base_full)
    y_full = reflected_excursion(x_full)
    if device == "partial":
        ivs = jump_intervals(x_full)
        sizes = sorted((iv.size for iv in ivs), reverse=True)
        cutoff = sizes[keep - 1] if keep >= 1 else float("inf")
        kept = [iv for iv in ivs if iv.size >= cutoff][:keep] if keep else []
        comps = [reflect_component(x_full, iv) for iv in kept]
        y_trunc = combine([x_full] + comps, [1.0] + [-1.0] * len(comps)) if comps else x_full
        return y_trunc, y_full
    if device != "shifted":
        raise ValueError("device must be 'partial' or 'shifted'")
    part = Theta(theta0=theta.theta0, atoms=theta.atoms[:keep])
    trunc_ei = build_ei_bridge(part, bridge, jump_times=jump_times[:keep])
    base_trunc = float(trunc_ei.left_limit(t_min)) if t_min > 0.0 else float(trunc_ei.right[0])
    x_trunc = cyclic_shift(trunc_ei, t_min, base_trunc)
    y_trunc = reflected_excursion(x_trunc, strict=False)
    return y_trunc, y_full
