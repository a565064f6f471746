"""
Singular values of operator truncations, Schatten norms and the
S_p-versus-B(2,p) convergence sweeps.
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, svd, svdvals

from . import database
from .config import get_settings
from .errors import InputError, SpectrumError
from .models import SpectrumRecord
from .operators import TRUNCATION_THRESHOLD, OperatorMatrix, hg_matrix
from .schemas import NormMethod, SweepRow, SweepTable, format_p
from .symbols import Symbol, bnorm
from .utils import content_key, fit_line, relative_change
from .weights import RadialWeight, condition_report

logger = logging.getLogger(__name__)

# full residual ‖AV - US‖ only up to this size; Frobenius identity above
RESIDUAL_FULL_SIZE = 512
MONOTONE_SLACK = 1e-10

_cache_lock = threading.Lock()


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    size: int
    residual: float
    cached: bool = False

    @property
    def top(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0


def _residual(A: np.ndarray, values: np.ndarray) -> float:
    if max(A.shape) <= RESIDUAL_FULL_SIZE:
        U, s, Vt = svd(A, full_matrices=False, lapack_driver="gesvd")
        return float(np.linalg.norm(A @ Vt.T - U * s, 2))
    return abs(math.sqrt(float(np.sum(values ** 2))) - float(np.linalg.norm(A, "fro")))


def _compute(A: np.ndarray) -> np.ndarray:
    try:
        return svdvals(A, check_finite=False)
    except LinAlgError as exc:
        logger.warning("gesdd did not converge on %dx%d (%s), retrying with gesvd", A.shape[0], A.shape[1], exc)
    try:
        return svd(A, compute_uv=False, lapack_driver="gesvd", check_finite=False)
    except LinAlgError as exc:
        raise SpectrumError(f"SVD did not converge for {A.shape[0]}x{A.shape[1]} matrix: {exc}", "schatten") from exc


def _cache_key(M: OperatorMatrix) -> str:
    return content_key(M.weight, M.symbol, M.shape, M.basis.value)


def _cached(key: str) -> Optional[SpectrumRecord]:
    if not database.cache_enabled():
        return None
    with _cache_lock, database.get_db() as db:
        record = db.query(SpectrumRecord).filter(SpectrumRecord.key == key).first()
        if record is not None:
            db.expunge(record)
        return record


def _store(key: str, M: OperatorMatrix, spectrum: SingularSpectrum) -> None:
    if not database.cache_enabled():
        return
    with _cache_lock, database.get_db() as db:
        if db.query(SpectrumRecord).filter(SpectrumRecord.key == key).first() is None:
            db.add(SpectrumRecord(
                key=key,
                weight=M.weight,
                symbol=M.symbol,
                size=M.size,
                basis=M.basis.value,
                singular_values=np.ascontiguousarray(spectrum.values, dtype=np.float64).tobytes(),
                residual=spectrum.residual,
            ))
            db.commit()


def singular_values(M: Union[OperatorMatrix, np.ndarray], tol: float = 1e-12) -> SingularSpectrum:
    """Full descending spectrum of a finite matrix.

    OperatorMatrix spectra are cached by (weight, symbol, shape, basis).
    Raises SpectrumError when both LAPACK drivers fail or the residual
    exceeds max(1e-8, tol·N)·top.
    """
    key = None
    if isinstance(M, OperatorMatrix):
        key = _cache_key(M)
        record = _cached(key)
        if record is not None:
            values = np.frombuffer(record.singular_values, dtype=np.float64).copy()
            return SingularSpectrum(values, record.size, record.residual, cached=True)
        A = M.entries
    else:
        A = np.asarray(M, dtype=float)
    if A.ndim != 2 or not np.all(np.isfinite(A)):
        raise InputError("singular values need a finite 2-D matrix", "schatten")
    values = _compute(A)
    values.setflags(write=False)
    residual = _residual(A, values)
    top = float(values[0]) if values.size else 0.0
    if residual > max(1e-8, tol * max(A.shape)) * max(top, 1.0):
        raise SpectrumError(f"SVD residual {residual:.3g} too large for top value {top:.6g}", "schatten")
    spectrum = SingularSpectrum(values, A.shape[1], residual)
    if key is not None:
        _store(key, M, spectrum)
    return spectrum


def schatten_norm(s: Union[SingularSpectrum, Sequence[float], np.ndarray], p: float) -> float:
    """(Σ s_i^p)^(1/p), or max s_i for p = inf; a quasi-norm for p < 1."""
    if not p > 0:
        raise InputError(f"Schatten exponent must be positive, got {p}", "schatten")
    values = s.values if isinstance(s, SingularSpectrum) else np.asarray(s, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(values))
    top = float(np.max(values))
    if top == 0.0:
        return 0.0
    # scaled to avoid overflow for large p
    return top * float(np.sum((values / top) ** p)) ** (1.0 / p)


def hilbert_matrix_spectrum(N: int) -> SingularSpectrum:
    """Spectrum of the N x N Hilbert matrix [1/(j+n+1)]."""
    if N < 1:
        raise InputError(f"N must be >= 1, got {N}", "schatten")
    j = np.arange(N, dtype=float)
    return singular_values(1.0 / (j[:, None] + j[None, :] + 1.0))


def log_growth_fit(sizes: Iterable[float], values: Iterable[float]) -> Tuple[float, float, float]:
    """Fit values ≈ slope·log2(N) + intercept; returns (slope, intercept, R²)."""
    return fit_line(np.log2(np.asarray(list(sizes), dtype=float)), values)


def matched_block_count(N: int) -> int:
    """Last dyadic block index n <= log2 N seen by an N x N truncation."""
    return int(math.floor(math.log2(N)))


def sweep(
    w: RadialWeight,
    g: Symbol,
    p_list: Sequence[float],
    N_list: Sequence[int],
    workers: Optional[int] = None,
    tol: float = 1e-12,
    truncation: float = TRUNCATION_THRESHOLD,
) -> SweepTable:
    """S_p norms of nested truncations of H_g next to ‖g - g(0)‖_{B(2,p)}.

    Every N uses the leading block of the largest truncation, so the S_p
    norms are nondecreasing in N; the ratio column divides by the block
    norm over blocks n <= log2 N. A weight failing the hypotheses still
    gets a table, stamped outside_hypotheses. Rows whose dropped row mass
    exceeds the truncation share of the Frobenius mass are marked
    unconverged.
    """
    N_list = [int(N) for N in N_list]
    if not N_list or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise InputError(f"N values must be strictly increasing, got {N_list}", "schatten")
    if any(not p > 0 for p in p_list):
        raise InputError(f"Schatten exponents must be positive, got {list(p_list)}", "schatten")
    report = condition_report(w)
    failed = report.failed_conditions
    if failed:
        logger.warning("sweep of %s under %s runs outside the hypotheses: %s fail", g.id, w.id, ", ".join(failed))

    workers = workers or get_settings().workers
    full = hg_matrix(w, g, N_list[-1], check_hypotheses=False, workers=workers, threshold=truncation)
    compressions = [full.compression(N) if N < N_list[-1] else full for N in N_list]
    if workers > 1 and len(compressions) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(lambda M: singular_values(M, tol), compressions))
    else:
        spectra = [singular_values(M, tol) for M in compressions]

    rows: List[SweepRow] = []
    divergent = {}
    for p in p_list:
        full_norm = bnorm(g, p, NormMethod.BLOCKS)
        divergent[format_p(p)] = not full_norm.is_finite
        previous_ratio, previous_norm = None, None
        for N, M, spectrum in zip(N_list, compressions, spectra):
            s_p = schatten_norm(spectrum, p)
            matched = bnorm(g, p, NormMethod.BLOCKS, n_max=matched_block_count(N), extrapolate=False).value
            ratio = s_p / matched if matched else math.inf
            monotone = previous_norm is None or s_p >= previous_norm * (1.0 - MONOTONE_SLACK)
            if not monotone:
                logger.warning("S_%s norm of %s decreased at N=%d", format_p(p), g.id, N)
            rows.append(SweepRow(
                N=N,
                p=p,
                s_p_norm=s_p,
                b_norm=full_norm.value,
                b_norm_matched=matched,
                ratio=ratio,
                rel_change=relative_change(ratio, previous_ratio),
                quasi_norm=p < 1.0,
                monotone=monotone,
                truncation=M.diagnostics.relative,
                truncation_converged=M.diagnostics.converged,
            ))
            previous_ratio, previous_norm = ratio, s_p
    return SweepTable(
        weight=w.id,
        symbol=g.id,
        outside_hypotheses=bool(failed),
        failed_conditions=failed,
        b_norm_divergent=divergent,
        rows=rows,
    )
