"""
Split Bregman solver for total-variation plus non-negativity regularisation of
a masked Fourier inverse problem.

The problem solved by the inner loop is

    min_f  mu/2 ||M F f - g||^2 + sum_voxels |grad f| + N(f >= 0)

with the splitting d <- grad f, w <- f. Each inner iteration performs an
exact Fourier-diagonal f-solve, isotropic shrinkage for d, a non-negativity
update for w and multiplier updates; each outer iteration adds the data
residual back into g (Bregman refresh).
"""

from typing import Optional, Tuple, Union
import logging
import time

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from ..errors import GridMismatchError, HermitianError, InputError, SolverAbortError
from ..types import NonnegMode, SolverParams
from ..volgrid import (
    Spectrum3,
    SupportMask,
    Volume3,
    fft3_array,
    grad_arrays,
    grad_t_arrays,
    is_hermitian,
    laplacian_symbol_array,
    real_ifft3_array,
    require_same_grid,
)
from .state import SolveReport, SolverState

logger = logging.getLogger(__name__)


def init_state(g: Spectrum3, mask: SupportMask, params: SolverParams) -> SolverState:
    """
    f0 = A^T g (zero-filled inverse transform), every split variable and
    multiplier zero, g0 = g.
    """
    grid = require_same_grid(g, mask)
    data = np.asarray(g.data, dtype=np.complex128)
    peak = float(np.max(np.abs(data))) if data.size else 0.0
    off_support = float(np.max(np.abs(data[~mask.data]), initial=0.0))
    if off_support > 1e-12 * max(peak, 1e-300):
        raise InputError("measured spectrum has energy outside the support mask")
    if not is_hermitian(data):
        raise HermitianError("measured spectrum is not conjugate-symmetric")

    zeros = lambda: np.zeros(grid.shape)  # noqa: E731
    return SolverState(
        grid=grid,
        mask=np.array(mask.data, dtype=bool),
        g=data.copy(),
        gk=data.copy(),
        f=real_ifft3_array(data),
        dx=zeros(), dy=zeros(), dz=zeros(), w=zeros(),
        bx=zeros(), by=zeros(), bz=zeros(), bw=zeros(),
    )


def system_symbol(state: SolverState, params: SolverParams) -> np.ndarray:
    """Fourier symbol mu*M + tau*D + gamma of the f-update system; >= gamma > 0."""
    denom = params.mu * state.mask + params.tau * laplacian_symbol_array(state.grid)
    denom += params.gamma
    if float(denom.min()) < params.gamma * (1.0 - 1e-12):
        raise SolverAbortError("f-update system is not positive definite", "f_update", state.outer, state.inner)
    return denom


def _grad_f(state: SolverState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if state._grad_src is not state.f:
        state._grad = grad_arrays(state.f)
        state._grad_src = state.f
    return state._grad


def _rhs_spatial(state: SolverState, params: SolverParams) -> np.ndarray:
    """tau * grad^T(d - b) + gamma * (w - b_w), the non-data part of rhs^k."""
    rhs = params.tau * grad_t_arrays(state.dx - state.bx, state.dy - state.by, state.dz - state.bz)
    rhs += params.gamma * (state.w - state.bw)
    return rhs


def _solve_f(
    state: SolverState, params: SolverParams, denom: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (f^{k+1}, fft3(f^{k+1}))."""
    if params.tol_fupdate > 0:
        return _solve_f_cg(state, params)
    if denom is None:
        denom = system_symbol(state, params)
    rhs_hat = params.mu * state.gk + fft3_array(_rhs_spatial(state, params))
    f_hat = rhs_hat / denom
    return real_ifft3_array(f_hat), f_hat


def _solve_f_cg(state: SolverState, params: SolverParams) -> Tuple[np.ndarray, np.ndarray]:
    """Conjugate-gradient f-solve to the relative residual tol_fupdate, warm-started."""
    shape = state.grid.shape
    mask = state.mask

    def apply(x: np.ndarray) -> np.ndarray:
        v = x.reshape(shape)
        out = params.mu * real_ifft3_array(np.where(mask, fft3_array(v), 0.0))
        out += params.tau * grad_t_arrays(*grad_arrays(v))
        out += params.gamma * v
        return out.ravel()

    n = state.grid.voxel_count
    op = LinearOperator((n, n), matvec=apply, dtype=np.float64)
    rhs = params.mu * real_ifft3_array(state.gk) + _rhs_spatial(state, params)
    x, info = cg(op, rhs.ravel(), x0=state.f.ravel(), rtol=params.tol_fupdate, maxiter=10 * n)
    if info > 0:
        logger.warning(f"f-update CG stopped after {info} iterations without reaching tolerance")
    f = x.reshape(shape)
    return f, fft3_array(f)


def f_update(state: SolverState, params: SolverParams) -> np.ndarray:
    """
    Solve (mu A^T A + tau grad^T grad + gamma I) f = rhs^k with
    rhs^k = mu A^T g^k + tau grad^T(d - b) + gamma (w - b_w).
    """
    f, _ = _solve_f(state, params)
    return f


def shrink_tv(state: SolverState, params: SolverParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Isotropic shrinkage of grad f + b by 1/tau; zero where the magnitude is zero."""
    gx, gy, gz = _grad_f(state)
    ux, uy, uz = gx + state.bx, gy + state.by, gz + state.bz
    s = np.sqrt(ux * ux + uy * uy + uz * uz)
    scale = np.zeros_like(s)
    np.divide(np.maximum(s - 1.0 / params.tau, 0.0), s, out=scale, where=s > 0)
    return ux * scale, uy * scale, uz * scale


def shrink_nonneg(state: SolverState, params: SolverParams) -> np.ndarray:
    """
    paper_shrink: soft-threshold of f + b_w by 1/gamma.
    project: max(f + b_w, 0).
    """
    v = state.f + state.bw
    if params.nonneg_mode == NonnegMode.PROJECT:
        return np.maximum(v, 0.0)
    return np.maximum(np.abs(v) - 1.0 / params.gamma, 0.0) * np.sign(v)


def update_multipliers(state: SolverState) -> SolverState:
    """b_i += grad_i f - d_i and b_w += f - w."""
    gx, gy, gz = _grad_f(state)
    state.bx = state.bx + (gx - state.dx)
    state.by = state.by + (gy - state.dy)
    state.bz = state.bz + (gz - state.dz)
    state.bw = state.bw + (state.f - state.w)
    return state


def bregman_refresh(
    state: SolverState,
    g_measured: Union[Spectrum3, np.ndarray],
    f_hat: Optional[np.ndarray] = None,
) -> np.ndarray:
    """g^{k+1} = g^k + g - M * fft3(f), zero off the support."""
    g = g_measured.data if isinstance(g_measured, Spectrum3) else np.asarray(g_measured)
    if g.shape != state.grid.shape:
        raise GridMismatchError(f"measured spectrum has shape {g.shape}, state has {state.grid.shape}")
    if f_hat is None:
        f_hat = fft3_array(state.f)
    return np.where(state.mask, state.gk + g - f_hat, 0.0)


def _support_residual(f_hat: np.ndarray, g: np.ndarray, mask: np.ndarray) -> float:
    return float(np.linalg.norm(np.where(mask, f_hat - g, 0.0)))


def _tv(gx: np.ndarray, gy: np.ndarray, gz: np.ndarray) -> float:
    return float(np.sqrt(gx * gx + gy * gy + gz * gz).sum())


def support_residual(f: Volume3, g: Spectrum3, mask: SupportMask) -> float:
    """||A f - g||_2 over the measured support."""
    require_same_grid(f, g, mask)
    return _support_residual(fft3_array(f.data), g.data, mask.data)


def objective(f: Volume3, g: Spectrum3, mask: SupportMask, mu: float) -> float:
    """mu/2 ||A f - g||^2 + TV(f); the non-negativity term is not included."""
    require_same_grid(f, g, mask)
    data_term = 0.5 * mu * _support_residual(fft3_array(f.data), g.data, mask.data) ** 2
    return data_term + _tv(*grad_arrays(f.data))


def _check_finite(arr: np.ndarray, phase: str, state: SolverState) -> None:
    if not np.all(np.isfinite(arr)):
        raise SolverAbortError(
            f"non-finite values after {phase}", phase, state.outer, state.inner
        )


def measured_spectrum(data: Union[Spectrum3, Volume3], mask: SupportMask) -> Spectrum3:
    """Accept either measured Fourier data or a raw tomogram (g = M * fft3(raw))."""
    if isinstance(data, Volume3):
        grid = require_same_grid(data, mask)
        return Spectrum3(grid, np.where(mask.data, fft3_array(data.data), 0.0), hermitian=True)
    return data


def regularize(
    data: Union[Spectrum3, Volume3],
    mask: SupportMask,
    params: SolverParams,
) -> Tuple[Volume3, SolveReport]:
    """
    Run N outer x M inner split Bregman iterations and return the final
    estimate with its report. Identical inputs give bit-identical output.
    """
    g = measured_spectrum(data, mask)
    state = init_state(g, mask, params)
    report = SolveReport(params=params, grid=state.grid)
    denom = None if params.tol_fupdate > 0 else system_symbol(state, params)
    timings = report.timings
    debug = logger.isEnabledFor(logging.DEBUG)
    start = time.perf_counter()
    f_hat = None

    for outer in range(1, params.n_outer + 1):
        state.outer = outer
        for inner in range(1, params.n_inner + 1):
            state.inner = inner

            t0 = time.perf_counter()
            f, f_hat = _solve_f(state, params, denom)
            _check_finite(f, "f_update", state)
            state.f = f

            t1 = time.perf_counter()
            state.dx, state.dy, state.dz = shrink_tv(state, params)
            state.w = shrink_nonneg(state, params)
            _check_finite(state.dx + state.dy + state.dz + state.w, "shrinkage", state)

            t2 = time.perf_counter()
            update_multipliers(state)
            energy = 0.5 * params.mu * _support_residual(f_hat, state.g, state.mask) ** 2
            energy += _tv(*_grad_f(state))
            report.objectives.append(energy)
            if debug:
                logger.debug(f"outer {outer} inner {inner}: objective {energy:.6g}")

            t3 = time.perf_counter()
            timings["f_update"] += t1 - t0
            timings["shrinkage"] += t2 - t1
            timings["bookkeeping"] += t3 - t2

        t0 = time.perf_counter()
        residual = _support_residual(f_hat, state.g, state.mask)
        report.residuals.append(residual)
        state.gk = bregman_refresh(state, state.g, f_hat)
        _check_finite(state.gk, "bregman_refresh", state)
        timings["bookkeeping"] += time.perf_counter() - t0
        logger.info(
            f"Outer {outer}/{params.n_outer}: residual {residual:.6g}, "
            f"objective {report.objectives[-1]:.6g}, "
            f"{time.perf_counter() - start:.2f}s"
        )

    report.wall_seconds = time.perf_counter() - start
    report.min_f = float(state.f.min())
    return Volume3(state.grid, state.f), report
