"""Complex-valued sparse solvers: LASSO (monotone FISTA), OMP, and least-squares debiasing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class RankError(np.linalg.LinAlgError):
    """Least-squares subproblem on a support is rank deficient."""


@dataclass(frozen=True)
class SupportRule:
    """``relative``: keep ``|x_i| > value * max|x|``; ``absolute``: keep ``|x_i| > value``."""

    kind: str = "relative"
    value: float = 0.1

    def __post_init__(self):
        if self.kind not in ("relative", "absolute"):
            raise ValueError(f"unknown support rule {self.kind!r}")
        if self.value < 0:
            raise ValueError("support threshold must be non-negative")

    def threshold(self, estimate: np.ndarray) -> float:
        if self.kind == "absolute":
            return float(self.value)
        peak = float(np.max(np.abs(estimate))) if estimate.size else 0.0
        return self.value * peak


@dataclass(frozen=True)
class SolverConfig:
    lam: float | None = None  # fixed regularization weight; overrides the noise-based rule
    lam_scale: float = 1.0
    lam_floor: float = 1e-2  # fraction of lambda_max used when the noise level is zero
    max_iterations: int = 2000
    tol: float = 1e-8
    support_rule: SupportRule = field(default_factory=SupportRule)
    max_condition: float | None = 30.0  # skip the refit above this condition number of the unit-norm support columns

    def regularization(self, A: np.ndarray, y: np.ndarray, noise_std: float) -> float:
        if self.lam is not None:
            return float(self.lam)
        lam = universal_lambda(A, noise_std, self.lam_scale)
        return max(lam, self.lam_floor * lambda_max(A, y))


@dataclass
class RecoveryResult:
    estimate: np.ndarray
    support: np.ndarray
    iterations: int
    residual_norm: float
    lam: float
    threshold: float = 0.0
    converged: bool = True
    objective: list = field(default_factory=list, repr=False)


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """Complex soft threshold ``v * max(1 - tau / |v|, 0)``."""
    mag = np.abs(v)
    scale = np.zeros_like(mag)
    nz = mag > tau
    scale[nz] = 1.0 - tau / mag[nz]
    return v * scale


def lambda_max(A: np.ndarray, y: np.ndarray) -> float:
    """Smallest lambda for which the LASSO solution is zero."""
    return float(np.max(np.abs(A.conj().T @ y))) if y.size else 0.0


def universal_lambda(A: np.ndarray, noise_std: float, scale: float = 1.0) -> float:
    """``scale * sigma * sqrt(2 log n)``, measured in units of the RMS column norm of ``A``."""
    n = A.shape[1]
    col_rms = np.sqrt(np.sum(np.abs(A) ** 2) / n)
    return float(scale * noise_std * np.sqrt(2.0 * np.log(max(n, 2))) * col_rms)


def spectral_norm_sq(A: np.ndarray) -> float:
    """Largest eigenvalue of ``A^H A``, from the smaller of the two Gram matrices."""
    if A.size == 0:
        return 0.0
    gram = A @ A.conj().T if A.shape[0] <= A.shape[1] else A.conj().T @ A
    return float(max(np.linalg.eigvalsh(gram)[-1], 0.0))


def lasso_objective(A, y, x, lam) -> float:
    r = A @ x - y
    return 0.5 * float(np.vdot(r, r).real) + lam * float(np.sum(np.abs(x)))


def kkt_residual(A: np.ndarray, y: np.ndarray, x: np.ndarray, lam: float) -> float:
    """Max-norm distance of ``x`` from its own proximal-gradient update, in gradient units.

    Zero exactly at a LASSO minimizer; independent of the solver that produced ``x``.
    """
    grad = A.conj().T @ (A @ x - y)
    step = 1.0 / max(spectral_norm_sq(A), np.finfo(float).tiny)
    fixed = soft_threshold(x - step * grad, step * lam)
    return float(np.max(np.abs(x - fixed)) / step) if x.size else 0.0


def _check_dims(A, y):
    if A.ndim != 2 or y.ndim != 1 or A.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: A {A.shape}, y {y.shape}")


def lasso_solve(
    A: np.ndarray,
    y: np.ndarray,
    lam: float,
    options: SolverConfig | None = None,
    lipschitz: float | None = None,
) -> RecoveryResult:
    """Minimize ``0.5 ||y - A x||^2 + lam * sum|x_i|`` over complex ``x``.

    Monotone FISTA: the objective of the returned iterate sequence never
    increases.  Stops when an accepted step changes the objective by less than
    ``tol`` relative, or after ``max_iterations`` (``converged=False``).
    """
    options = options or SolverConfig()
    A = np.asarray(A)
    y = np.asarray(y)
    _check_dims(A, y)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    n = A.shape[1]
    AH = A.conj().T
    L = spectral_norm_sq(A) if lipschitz is None else lipschitz
    x = np.zeros(n, dtype=complex)
    if L == 0:
        support = np.array([], dtype=int)
        return RecoveryResult(x, support, 0, float(np.linalg.norm(y)), lam, 0.0, True, [lasso_objective(A, y, x, lam)])
    L *= 1.0 + 1e-9  # eigvalsh rounding
    Ax = np.zeros(A.shape[0], dtype=complex)
    w, Aw = x.copy(), Ax.copy()
    t = 1.0
    f_x = 0.5 * float(np.vdot(y, y).real)
    history = [f_x]
    converged = False
    it = 0
    for it in range(1, options.max_iterations + 1):
        grad = AH @ (Aw - y)
        z = soft_threshold(w - grad / L, lam / L)
        Az = A @ z
        r = Az - y
        f_z = 0.5 * float(np.vdot(r, r).real) + lam * float(np.sum(np.abs(z)))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        accepted = f_z <= f_x
        if accepted:
            x_next, Ax_next, f_next = z, Az, f_z
        else:
            x_next, Ax_next, f_next = x, Ax, f_x
        c1, c2 = t / t_next, (t - 1.0) / t_next
        w = x_next + c1 * (z - x_next) + c2 * (x_next - x)
        Aw = Ax_next + c1 * (Az - Ax_next) + c2 * (Ax_next - Ax)
        change = f_x - f_next
        x, Ax, t = x_next, Ax_next, t_next
        history.append(f_next)
        if accepted and change <= options.tol * max(f_x, np.finfo(float).tiny):
            f_x = f_next
            converged = True
            break
        f_x = f_next
    threshold = options.support_rule.threshold(x)
    support = np.flatnonzero(np.abs(x) > threshold)
    return RecoveryResult(
        estimate=x,
        support=support,
        iterations=it,
        residual_norm=float(np.linalg.norm(y - A @ x)),
        lam=float(lam),
        threshold=threshold,
        converged=converged,
        objective=history,
    )


def detect_support(estimate: np.ndarray, rule: SupportRule | None = None) -> np.ndarray:
    rule = rule or SupportRule()
    estimate = np.asarray(estimate)
    return np.flatnonzero(np.abs(estimate) > rule.threshold(estimate))


def _restricted_lstsq(A, y, support):
    sub = A[:, support]
    coef, _, rank, sv = np.linalg.lstsq(sub, y, rcond=None)
    if rank < len(support):
        raise RankError(f"support of size {len(support)} gives a rank-{rank} subproblem")
    return coef


def debias(A: np.ndarray, y: np.ndarray, support) -> np.ndarray:
    """Least-squares refit of ``y`` on the columns in ``support``; zeros elsewhere."""
    A = np.asarray(A)
    y = np.asarray(y)
    _check_dims(A, y)
    support = np.asarray(sorted(int(i) for i in support), dtype=int)
    if support.size == 0:
        raise ValueError("debias needs a non-empty support")
    if support.size > A.shape[0]:
        raise ValueError(f"support size {support.size} exceeds the number of rows {A.shape[0]}")
    x = np.zeros(A.shape[1], dtype=complex)
    x[support] = _restricted_lstsq(A, y, support)
    return x


def omp_solve(A: np.ndarray, y: np.ndarray, sparsity: int) -> RecoveryResult:
    """Orthogonal matching pursuit with column-normalized correlations."""
    A = np.asarray(A)
    y = np.asarray(y)
    _check_dims(A, y)
    n = A.shape[1]
    if sparsity < 1 or sparsity > n:
        raise ValueError(f"sparsity must be in [1, {n}], got {sparsity}")
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = np.inf
    AH = A.conj().T
    y_norm = np.linalg.norm(y)
    chosen: list[int] = []
    residual = y.astype(complex)
    coef = np.zeros(0, dtype=complex)
    it = 0
    for it in range(1, sparsity + 1):
        corr = np.abs(AH @ residual) / norms
        corr[chosen] = -1.0
        chosen.append(int(np.argmax(corr)))
        coef = _restricted_lstsq(A, y, chosen)
        residual = y - A[:, chosen] @ coef
        if np.linalg.norm(residual) <= 1e-12 * y_norm:
            break
    x = np.zeros(n, dtype=complex)
    x[chosen] = coef
    return RecoveryResult(
        estimate=x,
        support=np.array(sorted(chosen), dtype=int),
        iterations=it,
        residual_norm=float(np.linalg.norm(residual)),
        lam=0.0,
    )


def debiased_lasso(
    A: np.ndarray,
    y: np.ndarray,
    noise_std: float,
    config: SolverConfig | None = None,
    normalize: bool = True,
) -> tuple[np.ndarray, RecoveryResult]:
    """LASSO for support detection followed by a least-squares refit on that support.

    With ``normalize`` the LASSO runs on unit-norm columns (a column-weighted
    l1 penalty), so atoms with small gain are not penalized more than others;
    ``RecoveryResult.estimate`` is mapped back to the scale of ``A``.  A
    support larger than the number of rows is cut to its largest entries.  If
    the refit is rank deficient, or the unit-norm support columns have a
    condition number above ``config.max_condition``, the raw LASSO estimate is
    returned.
    """
    config = config or SolverConfig()
    A = np.asarray(A)
    norms = np.linalg.norm(A, axis=0) if normalize else np.ones(A.shape[1])
    norms[norms == 0] = 1.0
    An = A / norms
    lam = config.regularization(An, y, noise_std)
    rec = lasso_solve(An, y, lam, config)
    rec.estimate = rec.estimate / norms
    support = rec.support
    if support.size > A.shape[0]:
        order = np.argsort(-np.abs(rec.estimate[support]), kind="stable")
        support = np.sort(support[order[: A.shape[0]]])
        rec.support = support
    if support.size == 0:
        return rec.estimate, rec
    if config.max_condition is not None and np.linalg.cond(An[:, support]) > config.max_condition:
        return rec.estimate, rec
    try:
        return debias(A, y, support), rec
    except RankError:
        return rec.estimate, rec
