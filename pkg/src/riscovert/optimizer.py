"""Alternating optimization of the receiver-to-warden power ratio.

Maximizes P_B/P_W over the surface reactances and the transmit precoder
with a three-block scheme per iteration:

1. auxiliary-vector update (closed form) that turns the ratio into a
   concave quadratic surrogate;
2. reactance step: the reflection matrix is linearized in the termination
   phases through a first-order (Neumann) expansion of the system inverse,
   and the resulting quadratic model is maximized inside a trust region
   with a nonnegative multiplier found by bisection;
3. precoder step: an exact Lagrangian solve of the quadratic subproblem
   under the unit-norm ball.

Steps that fail to improve the exactly re-evaluated ratio are rejected
(the reactance step with trust-radius backtracking), so the reported ratio
trace is non-decreasing by construction.  After the ratio problem is
solved, the transmit power follows from the covert budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelStatistics
from .detection import WillieDetector, covert_budget, DEP_COEFFICIENT
from .errors import DegenerateWardenError, IllConditionedHardwareError
from .multiport import (ReactanceVector, RisHardware, cascade_matrix,
                        phase_to_reactance, reflection_from_inverse)

__all__ = [
    "OptimizerConfig",
    "LinkEnsemble",
    "TraceRecord",
    "RisStepWorkspace",
    "RisStepResult",
    "PrecoderWorkspace",
    "OptimizerState",
    "quadratic_objective",
    "lambda_update",
    "ris_step",
    "precoder_step",
    "optimize",
    "allocate_power",
]


@dataclass(frozen=True)
class OptimizerConfig:
    """Tuning knobs of the alternating optimizer."""

    trust_radius: float = 0.1
    stop_tol: float = 1.0e-6
    max_iters: int = 1000
    multiplier_tol: float = 1.0e-10
    backtrack_factor: float = 0.5
    ridge: float = 1.0e-9
    max_backtracks: int = 20
    precoder_stop_tol: float = 1.0e-9
    improvement_tol: float = 1.0e-4
    stall_tol: float = 1.0e-6
    keep_step_details: bool = False

    def __post_init__(self):
        if self.trust_radius <= 0 or self.stop_tol < 0 or self.max_iters < 1:
            raise ValueError("trust_radius > 0, stop_tol >= 0, max_iters >= 1 required")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.multiplier_tol <= 0 or self.ridge < 0:
            raise ValueError("multiplier_tol must be positive and ridge non-negative")
        if self.improvement_tol < 0:
            raise ValueError("improvement_tol must be non-negative")


@dataclass(frozen=True)
class LinkEnsemble:
    """Second-order statistics of the four links plus the known feed channel.

    ``direct_bob``/``direct_willie`` are N x N, ``reflected_bob``/
    ``reflected_willie`` are M x M, and ``s_matrix`` is the M x N
    transmitter-to-surface channel.  M = 0 describes a system without a
    reflecting surface.
    """

    direct_bob: ChannelStatistics
    direct_willie: ChannelStatistics
    reflected_bob: ChannelStatistics
    reflected_willie: ChannelStatistics
    s_matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s_matrix", np.asarray(self.s_matrix, dtype=complex))
        n = self.direct_bob.size
        m = self.reflected_bob.size
        if self.direct_willie.size != n:
            raise ValueError("direct-link statistics sizes disagree")
        if self.reflected_willie.size != m:
            raise ValueError("reflected-link statistics sizes disagree")
        if self.s_matrix.shape != (m, n):
            raise ValueError(f"s_matrix must be {m}x{n}, got {self.s_matrix.shape}")

    @property
    def n_tx(self) -> int:
        return self.direct_bob.size

    @property
    def n_ris(self) -> int:
        return self.reflected_bob.size


@dataclass(frozen=True)
class TraceRecord:
    """One per-iteration snapshot of the optimizer."""

    iteration: int
    ratio: float
    p_b: float
    p_w: float
    p_b_direct: float
    p_b_ris: float
    p_w_direct: float
    p_w_ris: float
    delta_norm: float
    epsilon: float
    ris_accepted: bool
    precoder_accepted: bool


@dataclass(frozen=True)
class StepDetail:
    """Raw data of one accepted reactance step, kept for external auditing."""

    iteration: int
    b_before: np.ndarray
    delta: np.ndarray
    b_after: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class RisStepWorkspace:
    """Intermediate quantities of one linearized reactance step."""

    a: np.ndarray               # system inverse at the current reactances
    f_diag: np.ndarray          # d b_m / d phase_m (strictly negative)
    g: np.ndarray               # j * A * diag(F)
    d: np.ndarray               # A @ S
    d_tilde: np.ndarray         # (A - eta/(2 Z0) I) @ S
    theta: np.ndarray           # diagonal of L L^H, L = diag(F) A
    psi: np.ndarray             # theta**2, trust-region weights
    q1: np.ndarray
    q2: np.ndarray
    big_q1: float
    big_q2: float
    c1: float
    d_vec: np.ndarray
    f1: np.ndarray
    f1_tilde: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    f4: np.ndarray
    m_matrix: np.ndarray        # quadratic model coefficient (symmetric PSD)
    p_vector: np.ndarray        # linear model coefficient

    def model_value(self, delta) -> float:
        """Quadratic model of the surrogate objective change at a phase step."""
        delta = np.asarray(delta, dtype=float)
        return float(2.0 * self.p_vector @ delta - delta @ self.m_matrix @ delta)


@dataclass(frozen=True)
class RisStepResult:
    accepted: bool
    b_new: np.ndarray
    delta: np.ndarray
    delta_norm: float
    epsilon_used: float
    a_new: np.ndarray
    phi_new: np.ndarray
    ratio_new: float
    neumann_estimate: float
    backtracks: int
    workspace: RisStepWorkspace


@dataclass(frozen=True)
class PrecoderWorkspace:
    """Quadratic subproblem data of one precoder step."""

    w_matrix: np.ndarray
    w_vector: np.ndarray
    mu: float
    kkt_residual: float
    complementarity: float
    degenerate: bool


@dataclass(frozen=True)
class OptimizerState:
    """Final state and audit trail of one optimization run."""

    b: ReactanceVector | None
    v: np.ndarray
    lam: np.ndarray
    ratio: float
    p_b: float
    p_w: float
    iteration: int
    converged: bool
    trace: tuple
    step_details: tuple = ()
    ris_rejections: int = 0
    precoder_rejections: int = 0


def _system_matrix(hw: RisHardware, b) -> np.ndarray:
    return (hw.impedance_matrix
            + hw.parasitic_resistance * np.eye(hw.size)
            + 1j * np.diag(np.asarray(b, dtype=float)))


def _phi_of(hw, b, links) -> tuple[np.ndarray, np.ndarray]:
    """(cascade, system inverse) at reactances b; empty cascade without a surface."""
    if links.n_ris == 0 or hw is None:
        return np.zeros((0, links.n_tx), dtype=complex), np.zeros((0, 0), dtype=complex)
    a = np.linalg.inv(_system_matrix(hw, b))
    return cascade_matrix(reflection_from_inverse(hw, a), links.s_matrix), a


def link_powers(phi, v, links):
    """(p_b, p_w, components) with components (bob_direct, bob_ris, willie_direct, willie_ris)."""
    v = np.asarray(v, dtype=complex)
    pv = phi @ v if phi.size else np.zeros(0, dtype=complex)
    pbd = float((v.conj() @ links.direct_bob.correlation @ v).real)
    pwd = float((v.conj() @ links.direct_willie.correlation @ v).real)
    if pv.size:
        pbr = float((pv.conj() @ links.reflected_bob.correlation @ pv).real)
        pwr = float((pv.conj() @ links.reflected_willie.correlation @ pv).real)
    else:
        pbr = pwr = 0.0
    return pbd + pbr, pwd + pwr, (pbd, pbr, pwd, pwr)


def _stacked_factors(phi, links) -> np.ndarray:
    """Factor stack Y with Y^H Y = R_hB + Phi^H R_tB Phi."""
    if phi.size:
        return np.vstack([links.direct_bob.factor, links.reflected_bob.factor @ phi])
    return links.direct_bob.factor


def quadratic_objective(lam, b, v, links: LinkEnsemble, hw: RisHardware | None) -> float:
    """Surrogate objective 2*Re(lam Y v) - ||lam||^2 * P_W at reactances b."""
    lam = np.asarray(lam, dtype=complex)
    v = np.asarray(v, dtype=complex)
    phi, _ = _phi_of(hw, b, links)
    y = _stacked_factors(phi, links)
    _, p_w, _ = link_powers(phi, v, links)
    return float(2.0 * (lam @ (y @ v)).real - (np.linalg.norm(lam) ** 2) * p_w)


def lambda_update(b, v, links: LinkEnsemble, hw: RisHardware | None) -> np.ndarray:
    """Optimal auxiliary vector v^H Y^H / P_W for the current (b, v)."""
    v = np.asarray(v, dtype=complex)
    phi, _ = _phi_of(hw, b, links)
    return _lambda_from_phi(phi, v, links)


def _lambda_from_phi(phi, v, links) -> np.ndarray:
    y = _stacked_factors(phi, links)
    _, p_w, _ = link_powers(phi, v, links)
    if p_w <= 0.0:
        raise DegenerateWardenError("warden average power is zero; ratio is unbounded")
    return np.conj(y @ v) / p_w


def _spectral_norm(mat) -> float:
    """Largest singular value via the Gram matrix."""
    if mat.size == 0:
        return 0.0
    gram = mat.conj().T @ mat
    top = float(np.linalg.eigvalsh(gram)[-1])
    return float(np.sqrt(max(top, 0.0)))


def _build_workspace(a, b, v, lam, links, hw, shared=None) -> RisStepWorkspace:
    m = hw.size
    n = links.n_tx
    z0 = hw.reference_impedance
    y0 = hw.reference_admittance
    y0_sq = abs(y0) ** 2
    s = links.s_matrix
    b = np.asarray(b, dtype=float)
    f_diag = -(b * b + z0 * z0) / (2.0 * z0)
    g = 1j * a * f_diag[None, :]
    d = a @ s
    eta = hw.eta_ct
    d_tilde = d - (eta / (2.0 * z0)) * s if eta else d
    l_rows = f_diag[:, None] * a
    theta = np.einsum("ij,ij->i", l_rows, l_rows.conj()).real
    psi = theta * theta

    r_tw = links.reflected_willie.correlation
    t_tb = links.reflected_bob.factor
    if shared is not None and "stack_wt" in shared:
        stacked = shared["stack_wt"] @ g
        rtw_g, ttb_g = stacked[:m], stacked[m:]
    else:
        rtw_g = r_tw @ g
        ttb_g = t_tb @ g

    dv = d @ v
    dtv = d_tilde @ v if eta else dv
    f1 = np.conj(dv)
    f1_tilde = np.conj(dtv)
    f2 = g.conj().T @ rtw_g
    f3 = rtw_g * f1.conj()[None, :]
    f4 = ttb_g * f1.conj()[None, :]

    lam = np.asarray(lam, dtype=complex)
    lam2 = lam[n:]
    norm_lam_sq = float(np.linalg.norm(lam) ** 2)

    m_matrix = 4.0 * y0_sq * norm_lam_sq * (f1[:, None] * f2 * f1.conj()[None, :]).real
    m_matrix = 0.5 * (m_matrix + m_matrix.T)
    p_vector = 2.0 * (2.0 * y0_sq * norm_lam_sq * (f1_tilde @ f3)
                      + y0 * (lam2 @ f4)).real

    phi = reflection_from_inverse(hw, a) @ s
    phi_v = phi @ v
    q1 = links.direct_bob.factor @ v
    q2 = t_tb @ phi_v
    big_q1 = float((v.conj() @ links.direct_willie.correlation @ v).real)
    big_q2 = float((phi_v.conj() @ r_tw @ phi_v).real)
    c1 = float(4.0 * y0_sq * (dtv.conj() @ r_tw @ dtv).real)
    d_vec = -2.0 * y0 * (t_tb @ dtv)

    return RisStepWorkspace(a=a, f_diag=f_diag, g=g, d=d, d_tilde=d_tilde,
                            theta=theta, psi=psi, q1=q1, q2=q2,
                            big_q1=big_q1, big_q2=big_q2, c1=c1, d_vec=d_vec,
                            f1=f1, f1_tilde=f1_tilde, f2=f2, f3=f3, f4=f4,
                            m_matrix=m_matrix, p_vector=p_vector)


def _trust_region_direction(eigvals, q, radius, tol):
    """Multiplier and rotated solution of min y'diag(eigvals)y - 2q'y, ||y|| <= radius.

    The norm profile ||y(mu)|| is monotone in the multiplier; the root is
    bracketed on a geometric grid and refined on stages of linear grids
    (each stage shrinks the bracket 64-fold), keeping the feasible end.
    """
    target = radius * radius

    def sq_norms(mus):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            terms = np.abs(q[None, :] / (eigvals[None, :] + mus[:, None])) ** 2
            return np.sum(terms, axis=1)

    if eigvals.min() > 0.0 and float(sq_norms(np.zeros(1))[0]) <= target:
        return 0.0, q / eigvals
    grid = np.concatenate([[0.0], np.logspace(-12.0, 60.0, 73)])
    feasible = sq_norms(grid) <= target
    if not np.any(feasible):
        mu = float(grid[-1])
        return mu, q / (eigvals + mu)
    idx = int(np.argmax(feasible))
    if idx == 0:
        return 0.0, q / eigvals
    lo, hi = float(grid[idx - 1]), float(grid[idx])
    while hi - lo > tol * max(hi, 1.0):
        stage = np.linspace(lo, hi, 66)
        # stage[0] == lo is infeasible by the bracket invariant
        j = int(np.argmax(sq_norms(stage[1:]) <= target)) + 1
        lo, hi = float(stage[j - 1]), float(stage[j])
    mu = hi
    return mu, q / (eigvals + mu)


def ris_step(b, v, lam, links: LinkEnsemble, hw: RisHardware, cfg: OptimizerConfig,
             current=None, shared=None) -> RisStepResult:
    """One safeguarded linearized reactance step.

    ``current`` may carry precomputed ``(a, phi, ratio)`` for the incoming
    reactances.  The step is re-evaluated with the exact reflection model;
    it is accepted only if the exact ratio improves by at least the
    configured relative amount (progress below that resolution does not
    count) and the first-order inverse expansion stays within its validity
    bound, otherwise the trust radius shrinks (up to ``max_backtracks``
    times) and finally the step is rejected leaving ``b`` unchanged.
    """
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=complex)
    if current is None:
        phi, a = _phi_of(hw, b, links)
        p_b, p_w, _ = link_powers(phi, v, links)
        ratio0 = p_b / p_w
    else:
        a, phi, ratio0 = current

    ws = _build_workspace(a, b, v, lam, links, hw, shared)
    m = hw.size

    if not np.any(ws.p_vector):
        return RisStepResult(True, b, np.zeros(m), 0.0, cfg.trust_radius, a, phi,
                             ratio0, 0.0, 0, ws)

    scale = np.sqrt(ws.psi)
    h = ws.m_matrix / np.outer(scale, scale)
    h = 0.5 * (h + h.T)
    eigvals, eigvecs = np.linalg.eigh(h)
    ridge = cfg.ridge * max(float(np.trace(h)), 1.0e-300)
    eigvals = np.clip(eigvals, 0.0, None) + ridge
    q = eigvecs.T @ (ws.p_vector / scale)

    eps = cfg.trust_radius
    backtracks = 0
    while True:
        _, y_rot = _trust_region_direction(eigvals, q, eps, cfg.multiplier_tol)
        delta = (eigvecs @ y_rot) / scale
        b_new = b + ws.f_diag * delta
        ok = True
        shrink_helps = True
        try:
            a_new = np.linalg.inv(_system_matrix(hw, b_new))
        except np.linalg.LinAlgError:
            ok = False
        if ok:
            phi_new = cascade_matrix(reflection_from_inverse(hw, a_new), links.s_matrix)
            p_b, p_w, _ = link_powers(phi_new, v, links)
            ratio_new = p_b / p_w
            remainder = a_new - (a - (ws.g * delta[None, :]) @ a)
            est = _spectral_norm(remainder) / max(_spectral_norm(a_new), 1.0e-300)
            ok = (ratio_new > ratio0 * (1.0 + cfg.improvement_tol)
                  and est <= eps / (1.0 - eps))
            # a positive gain below the progress resolution only shrinks
            # further with the radius; retrying cannot help
            shrink_helps = ratio_new <= ratio0 or est > eps / (1.0 - eps)
        if ok:
            return RisStepResult(True, b_new, delta, float(np.linalg.norm(delta)),
                                 eps, a_new, phi_new, ratio_new, est, backtracks, ws)
        if backtracks >= cfg.max_backtracks or not shrink_helps:
            return RisStepResult(False, b, np.zeros(m), 0.0, eps, a, phi, ratio0,
                                 0.0, backtracks, ws)
        eps *= cfg.backtrack_factor
        backtracks += 1


def precoder_step(phi, v, lam, links: LinkEnsemble, cfg: OptimizerConfig,
                  shared=None):
    """Exact Lagrangian solve of the precoder subproblem under the unit ball.

    Returns the raw solution of ``[||lam||^2 W + mu I] v = w^H`` with the
    multiplier bisected so that ``||v|| <= 1`` (zero if already interior),
    together with the subproblem workspace (KKT residuals included).
    A zero linear term is degenerate: the previous precoder is returned.
    """
    lam = np.asarray(lam, dtype=complex)
    v = np.asarray(v, dtype=complex)
    n = links.n_tx
    if shared is not None and "r_h_sum" in shared:
        w_mat = shared["r_h_sum"].copy()
        r_t_sum = shared.get("r_t_sum")
    else:
        w_mat = links.direct_bob.correlation + links.direct_willie.correlation
        r_t_sum = (links.reflected_bob.correlation + links.reflected_willie.correlation
                   if phi.size else None)
    if phi.size:
        w_mat = w_mat + phi.conj().T @ (r_t_sum @ phi)
    w_mat = 0.5 * (w_mat + w_mat.conj().T)

    w_vec = lam[:n] @ links.direct_bob.factor
    if phi.size:
        w_vec = w_vec + lam[n:] @ (links.reflected_bob.factor @ phi)

    w_norm = float(np.linalg.norm(w_vec))
    if w_norm == 0.0:
        return v, PrecoderWorkspace(w_mat, w_vec, 0.0, 0.0, 0.0, True)

    norm_lam_sq = float(np.linalg.norm(lam) ** 2)
    k_mat = norm_lam_sq * w_mat
    eigvals, eigvecs = np.linalg.eigh(k_mat)
    eigvals = np.clip(eigvals, 0.0, None)
    q = eigvecs.conj().T @ w_vec.conj()
    mu, y = _trust_region_direction(eigvals, q, 1.0, cfg.multiplier_tol)
    v_new = eigvecs @ y
    kkt = float(np.linalg.norm(k_mat @ v_new + mu * v_new - w_vec.conj()))
    comp = float(mu * abs(np.linalg.norm(v_new) - 1.0))
    return v_new, PrecoderWorkspace(w_mat, w_vec, mu, kkt, comp, False)


def _initial_precoder(links) -> np.ndarray:
    r_init = links.direct_bob.correlation
    if links.n_ris:
        s = links.s_matrix
        r_init = r_init + s.conj().T @ (links.reflected_bob.correlation @ s)
    _, vecs = np.linalg.eigh(0.5 * (r_init + r_init.conj().T))
    v = vecs[:, -1]
    # fix the arbitrary eigenvector phase for reproducibility
    pivot = np.argmax(np.abs(v))
    v = v * np.exp(-1j * np.angle(v[pivot]))
    return v / np.linalg.norm(v)


def optimize(links: LinkEnsemble, hw: RisHardware | None,
             cfg: OptimizerConfig | None = None, seed=0,
             initial_phases=None) -> OptimizerState:
    """Run the alternating optimization from a seeded random phase start.

    Deterministic for a given seed.  ``initial_phases`` overrides the
    random start (used by multi-start orchestration).  Stops when both the
    reactance and precoder update norms stall (without a surface, when the
    precoder update norm drops below ``precoder_stop_tol``), or at
    ``max_iters`` with ``converged=False``.
    """
    cfg = cfg if cfg is not None else OptimizerConfig()
    rng = np.random.default_rng(seed)
    m = links.n_ris
    if m and hw is None:
        raise ValueError("hardware description required when the ensemble has a surface")
    if m and hw.size != m:
        raise ValueError("hardware size does not match reflected-link statistics")

    v = _initial_precoder(links)
    if m:
        if initial_phases is None:
            phases = rng.uniform(0.0, 2.0 * np.pi, m)
        else:
            phases = np.asarray(initial_phases, dtype=float)
        phases = np.clip(phases, 1.0e-12, 2.0 * np.pi - 1.0e-12)
        b = np.atleast_1d(phase_to_reactance(phases, hw.reference_impedance))
    else:
        b = np.zeros(0)

    shared = {}
    if m:
        shared["stack_wt"] = np.vstack([links.reflected_willie.correlation,
                                        links.reflected_bob.factor])
    shared["r_h_sum"] = links.direct_bob.correlation + links.direct_willie.correlation
    if m:
        shared["r_t_sum"] = (links.reflected_bob.correlation
                             + links.reflected_willie.correlation)

    phi, a = _phi_of(hw, b, links)
    p_b, p_w, comps = link_powers(phi, v, links)
    if p_w <= 0.0:
        raise DegenerateWardenError("warden average power is zero at initialization")
    ratio = p_b / p_w
    trace = [TraceRecord(0, ratio, p_b, p_w, *comps, 0.0, cfg.trust_radius, True, True)]
    step_details = []
    lam = _lambda_from_phi(phi, v, links)
    ris_rejections = 0
    precoder_rejections = 0
    converged = False
    iteration = 0

    for iteration in range(1, cfg.max_iters + 1):
        lam = _lambda_from_phi(phi, v, links)

        if m:
            step = ris_step(b, v, lam, links, hw, cfg,
                            current=(a, phi, ratio), shared=shared)
            db = float(np.linalg.norm(step.b_new - b))
            if step.accepted and step.delta_norm > 0.0:
                if cfg.keep_step_details:
                    step_details.append(StepDetail(iteration, b.copy(), step.delta,
                                                   step.b_new.copy(), step.epsilon_used))
            elif not step.accepted:
                ris_rejections += 1
            b, a, phi = step.b_new, step.a_new, step.phi_new
            ratio_after_b = step.ratio_new
            delta_norm, eps_used = step.delta_norm, step.epsilon_used
            ris_ok = step.accepted
        else:
            db = 0.0
            ratio_after_b = ratio
            delta_norm, eps_used = 0.0, cfg.trust_radius
            ris_ok = True

        v_raw, pre = precoder_step(phi, v, lam, links, cfg, shared=shared)
        pre_ok = not pre.degenerate
        dv = 0.0
        if pre_ok:
            v_cand = v_raw / np.linalg.norm(v_raw)
            p_b_c, p_w_c, comps_c = link_powers(phi, v_cand, links)
            if p_w_c > 0.0 and p_b_c / p_w_c >= ratio_after_b:
                dv = float(np.linalg.norm(v_cand - v))
                v = v_cand
                ratio, p_b, p_w, comps = p_b_c / p_w_c, p_b_c, p_w_c, comps_c
            else:
                pre_ok = False
        if not pre_ok:
            precoder_rejections += 1
            p_b, p_w, comps = link_powers(phi, v, links)
            ratio = ratio_after_b if m else p_b / p_w

        trace.append(TraceRecord(iteration, ratio, p_b, p_w, *comps,
                                 delta_norm, eps_used, ris_ok, pre_ok))

        if m and db <= cfg.stop_tol and dv <= cfg.stall_tol:
            converged = True
            break
        if not m and dv <= cfg.precoder_stop_tol and iteration > 1:
            converged = True
            break

    lam = _lambda_from_phi(phi, v, links)
    react = (ReactanceVector.from_reactances(b, hw.reference_impedance)
             if m else None)
    return OptimizerState(b=react, v=v, lam=lam, ratio=ratio, p_b=p_b, p_w=p_w,
                          iteration=iteration, converged=converged,
                          trace=tuple(trace), step_details=tuple(step_details),
                          ris_rejections=ris_rejections,
                          precoder_rejections=precoder_rejections)


def allocate_power(state: OptimizerState, det: WillieDetector, p_max=np.inf,
                   coefficient=DEP_COEFFICIENT) -> float:
    """Transmit power meeting the covert budget with the optimized design.

    Returns ``min(Q_max / P_W, p_max)`` where Q_max is the covert
    received-power budget of the detector.
    """
    if state.p_w <= 0.0:
        if np.isinf(p_max):
            raise DegenerateWardenError("warden power is zero and no power cap is set")
        return float(p_max)
    return float(min(covert_budget(det, coefficient) / state.p_w, p_max))
