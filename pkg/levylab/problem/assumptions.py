"""
Sampled structural-assumption checkers

Every checker falsifies a universally quantified inequality on a fixed-seed
low-discrepancy sample and returns a CheckReport with the worst slack and
the point where it occurs. A failed inequality is a result, not an error.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
import structlog
from scipy.stats import qmc

from ..core.config import Settings, get_settings
from ..core.errors import ConfigurationError
from .models import LevyFamily
from .spec import ProblemSpec, spectral_norm

logger = structlog.get_logger(__name__)

J2_RADII = (0.5, 1.0, 2.0)


@dataclass
class CheckReport:
    """Outcome of one sampled assumption check"""
    name: str
    passed: bool
    worst_slack: float
    samples: int
    witness: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    def to_row(self) -> Dict[str, Any]:
        row = {"name": self.name, "passed": self.passed, "worst_slack": self.worst_slack,
               "samples": self.samples, "witness": _compact(self.witness)}
        row.update({f"detail_{k}": v for k, v in self.details.items()})
        return row


def _compact(witness: Dict[str, Any]) -> str:
    parts = []
    for key, value in witness.items():
        arr = np.asarray(value)
        text = np.array2string(arr, precision=6, separator=" ") if arr.ndim else f"{float(arr):.6g}"
        parts.append(f"{key}={text}")
    return "; ".join(parts)


class _Sampler:
    """Scrambled Sobol points split into named coordinate blocks"""

    def __init__(self, dims: int, samples: int, seed: int):
        m = int(np.ceil(np.log2(max(samples, 2))))
        self.points = qmc.Sobol(d=dims, scramble=True, seed=seed).random_base2(m)
        self.count = len(self.points)
        self._next = 0

    def take(self, width: int) -> np.ndarray:
        block = self.points[:, self._next:self._next + width]
        self._next += width
        return block


def _directions(u: np.ndarray, d: int) -> np.ndarray:
    """Unit vectors from uniform coordinates, one column per sample"""
    if d == 1:
        return np.where(u[:, :1] < 0.5, -1.0, 1.0)
    angle = 2.0 * np.pi * u[:, 0]
    return np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def _log_spaced(u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return lo * (hi / lo) ** u


def _near_pairs(sampler: _Sampler, d: int):
    """x uniform, y = x + r e with r log-spaced; half near, half far"""
    x = sampler.take(d)
    e = _directions(sampler.take(1), d)
    u = sampler.take(1)[:, 0]
    r = np.where(np.arange(len(u)) % 2 == 0, _log_spaced(u, 1e-6, 1e-2), _log_spaced(u, 1e-2, 0.5))
    y = np.mod(x + r[:, None] * e, 1.0)
    delta = y - x
    delta = delta - np.floor(delta + 0.5)
    return x, y, np.linalg.norm(delta, axis=-1)


def _p_samples(sampler: _Sampler, d: int, p_max: float, zero_fraction: float = 0.0) -> np.ndarray:
    e = _directions(sampler.take(1), d)
    magnitude = _log_spaced(sampler.take(1)[:, 0], 1e-3, p_max)
    if zero_fraction > 0:
        magnitude = np.where(np.arange(len(magnitude)) % int(round(1 / zero_fraction)) == 0, 0.0, magnitude)
    return magnitude[:, None] * e


def _report(name: str, slack: np.ndarray, tolerance: float, witness_arrays: Dict[str, np.ndarray],
            details: Optional[Dict[str, Any]] = None, rank: Optional[np.ndarray] = None) -> CheckReport:
    """rank, when given, selects the witness among samples (default: the slack itself)"""
    worst = int(np.argmin(slack if rank is None else rank))
    witness = {key: value[worst] for key, value in witness_arrays.items()}
    worst_slack = float(slack.min())
    report = CheckReport(name, worst_slack >= -tolerance, worst_slack, len(slack), witness, details or {})
    log = logger.info if report.passed else logger.warning
    log("Assumption checked", check=name, passed=report.passed, worst_slack=worst_slack)
    return report


def check_diffusion(spec: ProblemSpec, samples: Optional[int] = None, seed: int = 0,
                    settings: Optional[Settings] = None) -> CheckReport:
    """|sigma(x)| <= L, |sigma(x) - sigma(y)| <= L dist(x, y), A(x) >= 0"""
    settings = settings or get_settings()
    samples = samples or settings.check_samples
    d = spec.dimension
    sampler = _Sampler(d + 2, samples, seed)
    x, y, dist = _near_pairs(sampler, d)

    factor = spec.diffusion
    L = factor.lipschitz_bound
    sx, sy = factor.matrix(x), factor.matrix(y)
    bound_slack = L - spectral_norm(sx)
    lipschitz_slack = L * dist - spectral_norm(sx - sy)
    psd_slack = np.linalg.eigvalsh(factor.covariance(x))[:, 0]

    slack = np.minimum(np.minimum(bound_slack, lipschitz_slack), psd_slack)
    # witness by difference quotient, so it lands where sigma is steepest
    rank = np.minimum(np.minimum(bound_slack, lipschitz_slack / dist), psd_slack)
    report = _report("diffusion", slack, settings.diffusion_tolerance, {"x": x, "y": y},
                     {"lipschitz_bound": L}, rank=rank)
    return report


def check_H1(spec: ProblemSpec, samples: Optional[int] = None, seed: int = 0,
             settings: Optional[Settings] = None) -> CheckReport:
    """mu H(x, p / mu) - H(x, p) >= (1 - mu)(b_m |p|^m - K) for mu in (0, 1)"""
    settings = settings or get_settings()
    samples = samples or settings.check_samples
    d = spec.dimension
    H = spec.hamiltonian
    sampler = _Sampler(d + 3, samples, seed)
    x = sampler.take(d)
    p = _p_samples(sampler, d, settings.p_max)
    u = sampler.take(1)[:, 0]
    # the inequality is tightest for mu near 1 or near 0
    mu = np.where(u < 0.5, _log_spaced(2.0 * u, 1e-3, 0.9), 1.0 - _log_spaced(2.0 * u - 1.0, 1e-6, 0.1))

    m = H.exponent
    norm_p = np.linalg.norm(p, axis=-1)
    lhs = mu * H(x, p / mu[:, None]) - H(x, p)
    rhs = (1.0 - mu) * (H.b_m * norm_p ** m - H.K)
    return _report("H1", lhs - rhs, settings.assumption_tolerance, {"x": x, "p": p, "mu": mu},
                   {"b_m": H.b_m, "K": H.K})


def check_H2prime(spec: ProblemSpec, samples: Optional[int] = None, seed: int = 0,
                  settings: Optional[Settings] = None) -> CheckReport:
    """H(y, p + q) - H(x, p) <= L_H |x - y|(1 + |p|^m) + zeta(|q|)(1 + |p|^(m-1)), |q| <= 1"""
    settings = settings or get_settings()
    samples = samples or settings.check_samples
    H = spec.hamiltonian
    if H.C_zeta is None:
        raise ConfigurationError("check_H2prime needs a declared modulus zeta", problem=spec.name)

    d = spec.dimension
    sampler = _Sampler(d + 6, samples, seed)
    x, y, dist = _near_pairs(sampler, d)
    p = _p_samples(sampler, d, settings.p_max)
    q = _p_samples(sampler, d, 1.0, zero_fraction=0.25)

    m = H.exponent
    norm_p = np.linalg.norm(p, axis=-1)
    lhs = H(y, p + q) - H(x, p)
    rhs = H.L_H * dist * (1.0 + norm_p ** m) + H.zeta(np.linalg.norm(q, axis=-1)) * (1.0 + norm_p ** (m - 1.0))
    return _report("H2prime", rhs - lhs, settings.assumption_tolerance, {"x": x, "y": y, "p": p, "q": q},
                   {"L_H": H.L_H, "C_zeta": H.C_zeta})


def inner_ball_quadrature(spec: ProblemSpec, resolution: int) -> float:
    """Midpoint rule for int_{|z|<1} |z|^2 nu(dz) on uniform radial cells"""
    levy = spec.levy
    if levy.family == LevyFamily.ATOMIC:
        return levy.inner_second_moment(1.0)
    if levy.family == LevyFamily.NONE:
        return 0.0
    edges = np.linspace(0.0, 1.0, resolution + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    width = np.diff(edges)
    d = levy.dimension
    if levy.family == LevyFamily.FRACTIONAL:
        density = levy.intensity * mid ** (-d - levy.order)
    else:
        density = np.where(mid <= levy.radius, levy.finite_density, 0.0)
    return float(np.sum(levy.sphere_area * mid ** (d - 1) * mid ** 2 * density * width))


def check_levy(spec: ProblemSpec, quad_resolution: Optional[int] = None, samples: Optional[int] = None,
               seed: int = 0, settings: Optional[Settings] = None) -> CheckReport:
    """(M') moment bound, (J1) growth and Lipschitz bounds of j, (J2) for a in {0.5, 1, 2}"""
    settings = settings or get_settings()
    quad_resolution = quad_resolution or settings.levy_quad_resolution
    samples = samples or settings.check_samples
    levy = spec.levy
    if levy.family == LevyFamily.FRACTIONAL and not 0.0 < levy.order < 2.0:
        raise ConfigurationError("fractional order must lie in (0, 2)", order=levy.order)

    # (M'): analytic inner-ball value where available, composite quadrature otherwise
    quadrature = inner_ball_quadrature(spec, quad_resolution)
    analytic = levy.inner_second_moment(1.0)
    inner = analytic if levy.family in (LevyFamily.FRACTIONAL, LevyFamily.ATOMIC) else quadrature
    moment = inner + levy.tail_mass(1.0)
    C_nu = levy.declared_C_nu()
    moment_slack = C_nu - moment

    # (J1) and (J2) on sampled (x, y, z)
    d = spec.dimension
    sampler = _Sampler(d + 4, samples, seed)
    x, y, dist = _near_pairs(sampler, d)
    e = _directions(sampler.take(1), d)
    R = settings.tail_radius
    z = _log_spaced(sampler.take(1)[:, 0], 1e-4, R)[:, None] * e
    norm_z = np.linalg.norm(z, axis=-1)
    C_j = levy.declared_C_j
    jx, jy = levy.jump(x, z), levy.jump(y, z)
    growth_slack = C_j * norm_z - np.linalg.norm(jx, axis=-1)
    lipschitz_slack = C_j * norm_z * dist - np.linalg.norm(jx - jy, axis=-1)

    gx, gy = levy.jump_scale(x), levy.jump_scale(y)
    spread = np.abs(gx - gy)
    j2_slack = np.full(len(x), np.inf)
    C_a_values: Dict[str, float] = {}
    for a in J2_RADII:
        first_moment = levy.outer_first_moment(a)
        C_a = levy.declared_C_a(a)
        C_a_values[f"C_a_{a:g}"] = C_a
        if not np.isfinite(C_a):
            # the first moment beyond a diverges and g varies: no constant exists
            j2_slack = np.full(len(x), -np.inf)
            continue
        if np.isfinite(first_moment):
            lhs = spread * first_moment
        else:
            lhs = np.where(spread > 0.0, np.inf, 0.0)
        j2_slack = np.minimum(j2_slack, C_a * dist - lhs)

    sampled = np.minimum(np.minimum(growth_slack, lipschitz_slack), j2_slack)
    slack = np.minimum(sampled, moment_slack)
    details = {
        "moment": moment,
        "C_nu": C_nu,
        "inner_quadrature": quadrature,
        "inner_analytic": analytic,
        "quadrature_rel_error": abs(quadrature - analytic) / analytic if analytic > 0 else 0.0,
        "C_j": C_j,
        **C_a_values,
    }
    return _report("levy", slack, settings.assumption_tolerance, {"x": x, "y": y, "z": z}, details)


def coercivity_gap(spec: ProblemSpec, L: float, samples: Optional[int] = None, seed: int = 0,
                   settings: Optional[Settings] = None) -> float:
    """min of H(x, Lp) - L H(x, p) - eta L^m |p|^m + 1/eta over samples"""
    settings = settings or get_settings()
    samples = samples or settings.check_samples
    H = spec.hamiltonian
    d = spec.dimension
    sampler = _Sampler(d + 2, samples, seed)
    x = sampler.take(d)
    p = _p_samples(sampler, d, settings.p_max, zero_fraction=0.125)
    m = H.exponent
    norm_p = np.linalg.norm(p, axis=-1)
    slack = H(x, L * p) - L * H(x, p) - H.eta * L ** m * norm_p ** m + 1.0 / H.eta
    worst = float(slack.min())
    logger.info("Coercivity gap evaluated", L=L, eta=H.eta, gap=worst)
    return worst


def run_all_checks(spec: ProblemSpec, seeds: Sequence[int] = (0, 1, 2), samples: Optional[int] = None,
                   settings: Optional[Settings] = None) -> list:
    """The four checkers at every seed"""
    reports = []
    for seed in seeds:
        for checker in (check_diffusion, check_H1, check_H2prime):
            report = checker(spec, samples=samples, seed=seed, settings=settings)
            report.details["seed"] = seed
            reports.append(report)
        report = check_levy(spec, samples=samples, seed=seed, settings=settings)
        report.details["seed"] = seed
        reports.append(report)
    return reports
