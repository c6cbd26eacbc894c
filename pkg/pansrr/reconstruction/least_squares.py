"""
Direct solve for the detail subbands of the HR image.

With the reference approximation ``A`` known, every shifted frame gives a
linear equation in the unknown details::

    A_k - Fy A Fx = Fy a K1 + L1 b Fx + L1 c K1

Stacking the frames yields an overdetermined system that is solved with
LSQR on a matrix-free operator. The Kronecker form
``(L kron R^T) vec(X) = vec(L X R)`` is never built; products are the
bidiagonal stencils of the shift operators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, lsqr

from pansrr.core.haar import SubbandSet, haar_synthesize
from pansrr.core.raster import ImagePlane
from pansrr.errors import InsufficientFramesError, RankDeficiencyError, ReconstructionError
from pansrr.logging_utils import log_event
from pansrr.models import LSQConfig, ResidualReport
from pansrr.reconstruction.frames import ObservationFrame, validate_frames
from pansrr.shift.inband import DEFAULT_H_MAX, ShiftOperator, build_operator, decompose_shift
from pansrr.shift.toeplitz import BidiagonalToeplitz

MIN_FRAMES = 4

_STOP_REASONS = {
    0: "zero solution",
    1: "system solved within tolerance",
    2: "least-squares solution within tolerance",
    3: "condition limit reached",
    4: "system solved to machine precision",
    5: "least-squares solution to machine precision",
    6: "condition limit at machine precision",
    7: "iteration limit reached",
}


@dataclass(frozen=True)
class _FrameTerm:
    circular_x: int
    circular_y: int
    op: ShiftOperator

    def roll(self, x: np.ndarray) -> np.ndarray:
        return np.roll(x, (-self.circular_y, -self.circular_x), axis=(0, 1))

    def unroll(self, x: np.ndarray) -> np.ndarray:
        return np.roll(x, (self.circular_y, self.circular_x), axis=(0, 1))


def _sandwich(left: BidiagonalToeplitz, x: np.ndarray, right: BidiagonalToeplitz) -> np.ndarray:
    return right.right_multiply(left.left_multiply(x))


def _sandwich_adjoint(left: BidiagonalToeplitz, y: np.ndarray, right: BidiagonalToeplitz):
    return _sandwich(left.transpose(), y, right.transpose())


def _check_shift_set(terms: Sequence[Tuple[float, float]]) -> None:
    pairs = {(rx, ry) for rx, ry in terms if rx or ry}
    if len(pairs) < 3:
        raise RankDeficiencyError(
            f"need 3 distinct subpixel shifts, got {len(pairs)}: {sorted(pairs)}"
        )
    if not any(rx for rx, _ in pairs) or not any(ry for _, ry in pairs):
        raise RankDeficiencyError("shift set lacks a horizontal or a vertical subpixel component")
    if not any(rx and ry for rx, ry in pairs):
        raise RankDeficiencyError("shift set lacks a diagonal subpixel shift")


class DetailSystem:
    """Stacked frame equations as a matrix-free operator on ``[a, b, c]``."""

    def __init__(
        self,
        frames: Sequence[ObservationFrame],
        h_max: int = DEFAULT_H_MAX,
        periodic: bool = True,
    ):
        self.m, self.n = frames[0].shape
        self.reference = frames[0].approximation.samples
        self.terms: List[_FrameTerm] = []
        self.observed: List[np.ndarray] = []
        remainders = []
        for frame in frames[1:]:
            dx = decompose_shift(frame.shift_x, h_max)
            dy = decompose_shift(frame.shift_y, h_max)
            op = build_operator(dx.subpixel, dy.subpixel, self.m, self.n, periodic)
            self.terms.append(_FrameTerm(dx.circular, dy.circular, op))
            self.observed.append(frame.approximation.samples)
            remainders.append((dx.subpixel.value, dy.subpixel.value))
        self.remainders = remainders

    @property
    def shape(self) -> Tuple[int, int]:
        size = self.m * self.n
        return len(self.terms) * size, 3 * size

    def _split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        a, b, c = np.asarray(x, dtype=np.float64).reshape(3, self.m, self.n)
        return a, b, c

    def matvec(self, x: np.ndarray) -> np.ndarray:
        a, b, c = self._split(x)
        rows = []
        for term in self.terms:
            op = term.op
            ra, rb, rc = term.roll(a), term.roll(b), term.roll(c)
            rows.append(
                _sandwich(op.fy, ra, op.k1) + _sandwich(op.l1, rb, op.fx) + _sandwich(op.l1, rc, op.k1)
            )
        return np.concatenate([r.ravel() for r in rows])

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).reshape(len(self.terms), self.m, self.n)
        a = np.zeros((self.m, self.n))
        b = np.zeros((self.m, self.n))
        c = np.zeros((self.m, self.n))
        for term, yk in zip(self.terms, y):
            op = term.op
            a += term.unroll(_sandwich_adjoint(op.fy, yk, op.k1))
            b += term.unroll(_sandwich_adjoint(op.l1, yk, op.fx))
            c += term.unroll(_sandwich_adjoint(op.l1, yk, op.k1))
        return np.concatenate([a.ravel(), b.ravel(), c.ravel()])

    def rhs(self) -> np.ndarray:
        parts = []
        for term, observed in zip(self.terms, self.observed):
            predicted = _sandwich(term.op.fy, term.roll(self.reference), term.op.fx)
            parts.append((observed - predicted).ravel())
        return np.concatenate(parts)

    def as_operator(self) -> LinearOperator:
        return LinearOperator(
            self.shape, matvec=self.matvec, rmatvec=self.rmatvec, dtype=np.float64
        )


def reconstruct_least_squares(
    frames: Sequence[ObservationFrame],
    config: LSQConfig = LSQConfig(),
    h_max: int = DEFAULT_H_MAX,
) -> Tuple[SubbandSet, ResidualReport]:
    """Estimate the detail subbands from the reference plus >= 3 shifted frames.

    Args:
        frames: observations in approximation scale; frame 0 is the zero-shift
            reference and supplies ``A``.
        config: LSQR tolerance, iteration cap and boundary handling. The
            periodic stencils match the forward model of ``shift_subbands``;
            that system has a null space and LSQR returns the minimum-norm
            solution. Truncated stencils give a full-rank system for frames
            built with ``periodic=False``.
        h_max: finest subpixel level used when decomposing shifts.

    Returns:
        ``SubbandSet(A, a, b, c)`` and the residual report.
    """
    validate_frames(frames)
    if len(frames) < MIN_FRAMES:
        raise InsufficientFramesError(
            f"need the reference plus at least 3 shifted frames, got {len(frames)} frame(s)"
        )
    if any(not frame.blur.is_identity for frame in frames):
        log_event("lsq_blur_ignored", level=logging.WARNING, frames=len(frames))

    system = DetailSystem(frames, h_max=h_max, periodic=config.periodic)
    _check_shift_set(system.remainders)
    rhs = system.rhs()
    result = lsqr(
        system.as_operator(),
        rhs,
        atol=config.rtol,
        btol=config.rtol,
        iter_lim=config.max_iterations,
    )
    solution, istop, iterations = result[0], int(result[1]), int(result[2])
    if not np.all(np.isfinite(solution)):
        raise ReconstructionError("least-squares solve produced non-finite details")

    initial = float(np.linalg.norm(rhs))
    final = float(np.linalg.norm(rhs - system.matvec(solution)))
    report = ResidualReport(
        initial_residual=initial,
        final_residual=final,
        iterations=iterations,
        stop_reason=_STOP_REASONS.get(istop, str(istop)),
    )
    a, b, c = system._split(solution)
    log_event(
        "lsq_finished",
        iterations=iterations,
        initial_residual=initial,
        final_residual=final,
        stop_reason=report.stop_reason,
    )
    return SubbandSet.from_arrays(system.reference, a, b, c), report


def finalize(reference_lr: ImagePlane, details: SubbandSet) -> ImagePlane:
    """HR plane from the reference approximation and estimated details."""
    if details.shape != reference_lr.shape:
        raise ReconstructionError(
            f"details are {details.shape}, reference approximation is {reference_lr.shape}"
        )
    return haar_synthesize(SubbandSet(reference_lr, details.a, details.b, details.c))
