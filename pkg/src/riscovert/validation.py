"""Self-contained property checks backing the `validate` CLI subcommand.

Each check returns a CheckResult; the battery covers the surrogate
transform identity, the detection-error-probability closed forms against
a threshold sweep, the reflection-model reduction chain, the dipole
impedance integrals against classical values, positive-semidefiniteness
of the scenario statistics, optimizer monotonicity with the inverse
linearization bound, and covert-budget tightness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import channels, detection, multiport, optimizer, scenarios

__all__ = ["CheckResult", "run_checks", "ALL_CHECKS", "per_iteration_seconds"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_ensemble(rng, m, n, s_scale=800.0):
    def stats(k, size):
        a = rng.standard_normal((k, size)) + 1j * rng.standard_normal((k, size))
        return channels.ChannelStatistics.from_correlation(a.conj().T @ a / k)

    s = s_scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    return optimizer.LinkEnsemble(stats(2 * n, n), stats(2 * n, n),
                                  stats(2 * m, m), stats(2 * m, m), s)


def _random_hardware(rng, m, model="mp"):
    c = 0.3 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    zss = 50.0 * np.eye(m) + 0.5 * (c + c.T) + np.diag(rng.uniform(5.0, 25.0, m))
    return multiport.RisHardware(zss, 0.1, 50.0, 73.0 + 42.0j, 73.0 + 42.0j, model)


def check_transform_identity(instances=200, seed=123) -> CheckResult:
    """Surrogate value at the optimal auxiliary vector equals the power ratio."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(2, 17))
        n = int(rng.integers(1, 5))
        links = _random_ensemble(rng, m, n)
        hw = _random_hardware(rng, m)
        b = rng.uniform(-80.0, 80.0, m)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        phi, _ = optimizer._phi_of(hw, b, links)
        p_b, p_w, _ = optimizer.link_powers(phi, v, links)
        lam = optimizer.lambda_update(b, v, links, hw)
        g = optimizer.quadratic_objective(lam, b, v, links, hw)
        worst = max(worst, abs(g - p_b / p_w) / (p_b / p_w))
    return CheckResult("quadratic-transform identity", worst <= 1.0e-10,
                       f"max relative error {worst:.3e} over {instances} instances")


def check_dep_oracle(tuples=100, grid=10_000, seed=7) -> CheckResult:
    """Closed-form minimum DEP against a dense threshold sweep, bound included."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    bound_ok = True
    for _ in range(tuples):
        det = detection.WillieDetector(rng.uniform(1.05, 6.0), rng.uniform(0.1, 5.0),
                                       0.05)
        received = rng.uniform(0.0, 2.0) * det.reference_noise
        thresholds = np.linspace(0.5 * det.reference_noise / det.uncertainty,
                                 1.5 * det.uncertainty * det.reference_noise + received,
                                 grid)
        sweep = detection.dep(thresholds, received, det).min()
        exact = detection.min_dep(received, det)
        worst = max(worst, abs(exact - sweep))
        if exact > 0 and detection.approx_min_dep(received, det) > exact + 1e-12:
            bound_ok = False
    ok = worst <= 1.0e-6 and bound_ok
    return CheckResult("detection-error-probability oracle", ok,
                       f"max |closed form - sweep| = {worst:.3e}; lower bound "
                       f"{'holds' if bound_ok else 'violated'}")


def check_model_reduction(seed=11) -> CheckResult:
    """mp(Z0 I, r0=0) == imp; ct == imp + structural offset; phase round trip."""
    rng = np.random.default_rng(seed)
    m = 12
    hw = _random_hardware(rng, m).idealized("imp")
    y0 = hw.reference_admittance
    z0 = hw.reference_impedance
    worst_mp = worst_ct = worst_rt = 0.0
    for _ in range(100):
        phases = rng.uniform(1e-6, 2 * np.pi - 1e-6, m)
        b = multiport.phase_to_reactance(phases, z0)
        d_mp = -2.0 * y0 * np.linalg.inv(hw.impedance_matrix + 1j * np.diag(b))
        d_imp = multiport.reflection_matrix_imp(hw, b)
        d_ct = multiport.reflection_matrix_ct(hw, phases)
        scale = np.abs(np.diag(d_imp)).max()
        worst_mp = max(worst_mp, np.abs(d_mp - d_imp).max() / scale)
        worst_ct = max(worst_ct, np.abs(d_ct - d_imp - (y0 / z0) * np.eye(m)).max() / scale)
        worst_rt = max(worst_rt, np.abs(
            multiport.reactance_to_phase(b, z0) - phases).max())
    ok = worst_mp <= 1e-12 and worst_ct <= 1e-12 and worst_rt <= 1e-10
    return CheckResult("reflection-model reduction chain", ok,
                       f"mp-imp {worst_mp:.2e}, ct-offset {worst_ct:.2e}, "
                       f"phase round trip {worst_rt:.2e}")


def check_dipole_impedance() -> CheckResult:
    """Induced-EMF integrals against the classical half-wave values."""
    z_self = multiport.dipole_self_impedance(1.0, 0.5, 1.0 / 500.0)
    z_mut = multiport.dipole_mutual_impedance(1.0, 0.5, 0.5, 0.5)
    ref_self, ref_mut = 73.0 + 42.5j, -12.5 - 29.9j
    e_self = abs(z_self - ref_self) / abs(ref_self)
    e_mut = abs(z_mut - ref_mut) / abs(ref_mut)
    ok = e_self <= 0.05 and e_mut <= 0.05
    return CheckResult("dipole impedance integrals", ok,
                       f"self {z_self:.2f} ({100 * e_self:.1f}% off), "
                       f"mutual {z_mut:.2f} ({100 * e_mut:.1f}% off)")


def check_scenario_statistics() -> CheckResult:
    """Hermitian PSD correlation matrices with faithful factors, scenario 1."""
    sc = scenarios.build_scenario(1)
    links = scenarios.link_ensemble(sc)
    worst_psd = worst_factor = 0.0
    for stats in (links.direct_bob, links.direct_willie,
                  links.reflected_bob, links.reflected_willie):
        r = stats.correlation
        tr = float(np.trace(r).real)
        eig_min = float(np.linalg.eigvalsh(r).min())
        worst_psd = max(worst_psd, -eig_min / tr)
        rebuilt = stats.factor.conj().T @ stats.factor
        worst_factor = max(worst_factor,
                           np.linalg.norm(rebuilt - r) / np.linalg.norm(r))
    ok = worst_psd <= 1.0e-10 and worst_factor <= 1.0e-10
    return CheckResult("scenario statistics PSD/factor", ok,
                       f"min eig >= -{worst_psd:.2e}*trace; factor error {worst_factor:.2e}")


def check_optimizer_monotonicity(max_iters=150, seed=5) -> CheckResult:
    """Non-decreasing ratio trace plus the inverse-expansion bound, scenario 1."""
    sc = scenarios.build_scenario(1)
    setup = scenarios.prepare_method(sc, "scsi-mp")
    cfg = optimizer.OptimizerConfig(max_iters=max_iters, keep_step_details=True)
    state = optimizer.optimize(setup.links_opt, setup.hw_opt, cfg, seed)
    ratios = [rec.ratio for rec in state.trace]
    mono = all(r1 >= r0 - 1e-9 * max(1.0, abs(r0))
               for r0, r1 in zip(ratios, ratios[1:]))
    worst_neumann = 0.0
    hw = setup.hw_opt
    for det in state.step_details[:25]:
        sys_old = (hw.impedance_matrix + hw.parasitic_resistance * np.eye(hw.size)
                   + 1j * np.diag(det.b_before))
        sys_new = (hw.impedance_matrix + hw.parasitic_resistance * np.eye(hw.size)
                   + 1j * np.diag(det.b_after))
        a_old = np.linalg.inv(sys_old)
        a_new = np.linalg.inv(sys_new)
        f_diag = -(det.b_before ** 2 + hw.reference_impedance ** 2) / (
            2.0 * hw.reference_impedance)
        g = 1j * a_old * f_diag[None, :]
        approx = a_old - (g * det.delta[None, :]) @ a_old
        dev = np.linalg.norm(a_new - approx, 2) / np.linalg.norm(a_new, 2)
        limit = det.epsilon / (1.0 - det.epsilon)
        worst_neumann = max(worst_neumann, dev / limit)
    ok = mono and worst_neumann <= 1.0
    return CheckResult("optimizer monotonicity + inverse-expansion bound", ok,
                       f"trace monotone: {mono}; worst deviation/bound "
                       f"{worst_neumann:.3f}; final ratio {state.ratio:.3e}")


def check_covert_tightness(seed=9) -> CheckResult:
    """Allocated power meets the covert budget with equality when uncapped."""
    sc = scenarios.build_scenario(1)
    cfg = optimizer.OptimizerConfig(max_iters=120)
    ev = scenarios.evaluate_method(sc, "scsi-mp", [0.05, 0.1], trials=200,
                                   seed=seed, cfg=cfg)
    worst = 0.0
    for point in ev.points:
        det = scenarios.detector_for(sc, point.delta)
        q_max = detection.covert_budget(det)
        worst = max(worst, abs(point.p_a * point.p_w - q_max) / q_max)
    ok = worst <= 1.0e-9
    return CheckResult("covert budget tightness", ok,
                       f"max relative slack {worst:.3e}")


ALL_CHECKS = (
    check_transform_identity,
    check_dep_oracle,
    check_model_reduction,
    check_dipole_impedance,
    check_scenario_statistics,
    check_optimizer_monotonicity,
    check_covert_tightness,
)


def run_checks(checks=ALL_CHECKS):
    """Run the battery and return the list of results."""
    return [check() for check in checks]


def per_iteration_seconds(m_values=(32, 64, 128), iters=30, seed=0,
                          single_thread=True):
    """Measured per-iteration optimizer wall time for surfaces of given sizes.

    Uses the scenario-1 layout scaled in the horizontal element count with
    the transmit array scaled proportionally (element ratio fixed at 8),
    and subtracts one-iteration runs so per-run setup cost cancels.
    """
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        threadpool_limits = None

    times = []
    for m in m_values:
        cols = m // 4
        overrides = {"ris_cols": cols, "alice_cols": max(m // 8, 1), "alice_rows": 1}
        sc = scenarios.build_scenario(1, overrides=overrides)
        setup = scenarios.prepare_method(sc, "scsi-mp")
        long_cfg = optimizer.OptimizerConfig(max_iters=iters, stop_tol=0.0)
        short_cfg = optimizer.OptimizerConfig(max_iters=1, stop_tol=0.0)

        def run(cfg):
            t0 = time.perf_counter()
            optimizer.optimize(setup.links_opt, setup.hw_opt, cfg, seed)
            return time.perf_counter() - t0

        def measure():
            run(short_cfg)  # warm up BLAS paths
            t_short = min(run(short_cfg) for _ in range(3))
            t_long = min(run(long_cfg) for _ in range(3))
            return (t_long - t_short) / (iters - 1)

        if single_thread and threadpool_limits is not None:
            with threadpool_limits(limits=1):
                times.append(measure())
        else:
            times.append(measure())
    return np.array(m_values, dtype=float), np.array(times)
