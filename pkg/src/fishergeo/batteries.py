"""Randomized verification batteries with deterministic aggregation.

Every battery draws its cases from a single seeded generator, evaluates a
single-case check from :mod:`fishergeo.verify` per trial, and merges results
in trial order. Violations are first minimized by greedy shrinking (reduce
the sample space, then the vector support) and then recorded as witnesses,
each tagged with (seed, trial) so the exact case can be regenerated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .connections import ConnectionTag, VectorFieldOnModel, coordinate_field, weak_invariance_check
from .errors import InvalidParameter
from .families import CandidateFamily, parse_family
from .geometry import TangentVector, delta
from .markov import (
    Channel,
    apply,
    canonical_embedding,
    random_channel,
    random_surjection,
)
from .models import categorical_model, crb_check, jacobian_at, lift
from .simplex import Distribution, RandomVariable, SampleSpace, new_distribution, sample_interior
from .verify import (
    PASS_TOL,
    STRONG_INVARIANCE_TOL,
    VIOLATION_TOL,
    Witness,
    characterize,
    check_invariance,
    check_monotonicity_cometric,
    check_monotonicity_metric,
    check_prop6_identity,
    check_strong_invariance,
    classify,
    _floats,
    _rows,
)

#: CRB battery verdicts tolerate eigenvalues of V - G^{-1} down to this.
CRB_EIG_TOL = -1e-8


@dataclass(frozen=True)
class BatteryReport:
    battery: str
    trials: int
    n_max: int
    seed: int
    max_residual: float
    status: str
    witnesses: tuple[Witness, ...]
    extras: dict

    @property
    def passed(self) -> bool:
        return not self.witnesses and self.status == "pass"

    def to_json(self) -> dict:
        payload = {
            "battery": self.battery,
            "pass": self.passed,
            "status": self.status,
            "trials": self.trials,
            "n_max": self.n_max,
            "seed": self.seed,
            "max_residual": self.max_residual,
            "tolerances": {
                "pass": PASS_TOL,
                "violation": VIOLATION_TOL,
                "strong_invariance": STRONG_INVARIANCE_TOL,
            },
            "witnesses": [w.to_json() for w in self.witnesses],
        }
        payload.update(self.extras)
        return payload


# ---------------------------------------------------------------------------
# Greedy shrinking
# ---------------------------------------------------------------------------


def shrink_case(
    case: dict,
    still_fails: Callable[[dict], bool],
    reducers: Iterable[Callable[[dict], Iterator[dict]]],
) -> dict:
    """Greedy minimization: apply reducers in order while the case fails.

    Each reducer yields candidate reductions; the first candidate that still
    fails replaces the case and the reducer list restarts. Stops at a fixed
    point. ``still_fails`` must be deterministic.
    """
    current = case
    progress = True
    while progress:
        progress = False
        for reducer in reducers:
            for candidate in reducer(current):
                try:
                    failing = still_fails(candidate)
                except Exception:
                    continue
                if failing:
                    current = candidate
                    progress = True
                    break
            if progress:
                break
    return current


def _merge_channel_inputs(case: dict) -> Iterator[dict]:
    """Merge two input coordinates of a channel case (shrinks n, step one)."""
    kernel = np.asarray(case["kernel"])
    p = np.asarray(case["p"])
    if p.shape[0] <= 2:
        return
    for i in range(p.shape[0] - 1):
        j = i + 1
        mass = p[i] + p[j]
        new_p = np.delete(p, j)
        new_p[i] = mass
        merged_col = (kernel[:, i] * p[i] + kernel[:, j] * p[j]) / mass
        new_kernel = np.delete(kernel, j, axis=1)
        new_kernel[:, i] = merged_col
        new_case = dict(case)
        new_case["kernel"] = new_kernel
        new_case["p"] = new_p
        if "x" in case:
            x = np.asarray(case["x"])
            new_x = np.delete(x, j)
            new_x[i] = x[i] + x[j]
            new_case["x"] = new_x
        yield new_case


def _merge_channel_outputs(case: dict) -> Iterator[dict]:
    """Merge two output coordinates of a channel case."""
    kernel = np.asarray(case["kernel"])
    if kernel.shape[0] <= 2:
        return
    for i in range(kernel.shape[0] - 1):
        j = i + 1
        new_kernel = np.delete(kernel, j, axis=0)
        new_kernel[i] = kernel[i] + kernel[j]
        new_case = dict(case)
        new_case["kernel"] = new_kernel
        if "a" in case:
            a = np.asarray(case["a"])
            new_a = np.delete(a, j)
            new_a[i] = 0.5 * (a[i] + a[j])
            new_case["a"] = new_a
        yield new_case


def _zero_vector_support(key: str) -> Callable[[dict], Iterator[dict]]:
    """Zero one entry of a vector (re-centering sum-zero vectors)."""

    def reducer(case: dict) -> Iterator[dict]:
        values = np.asarray(case.get(key))
        if values is None:
            return
        for i in range(values.shape[0]):
            if values[i] == 0.0:
                continue
            reduced = values.copy()
            reduced[i] = 0.0
            if case.get("sum_zero", False):
                reduced = reduced - reduced.mean()
            new_case = dict(case)
            new_case[key] = reduced
            yield new_case

    return reducer


# ---------------------------------------------------------------------------
# Batteries
# ---------------------------------------------------------------------------


def _random_sum_zero(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.normal(size=n)
    return m - m.mean()


def battery_monotonicity_metric(
    trials: int = 1000, n_max: int = 6, seed: int = 0
) -> BatteryReport:
    """Metric norms never grow under random channels."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    witnesses: list[Witness] = []
    for trial in range(trials):
        n_in = int(rng.integers(2, n_max + 1))
        n_out = int(rng.integers(2, n_max + 1))
        channel = random_channel(n_in, n_out, seed=int(rng.integers(2**32)))
        p = sample_interior(SampleSpace(n_in), seed=int(rng.integers(2**32)))
        x = TangentVector(p, _random_sum_zero(rng, n_in))
        report = check_monotonicity_metric(channel, p, x)
        worst = max(worst, report.slack)
        if report.status == "violation":
            witnesses.append(
                _shrunk_monotonicity_witness(
                    "monotonicity_metric", channel, p, x.m_rep, seed, trial
                )
            )
    return BatteryReport(
        "monotonicity_metric",
        trials,
        n_max,
        seed,
        float(worst),
        "violation" if witnesses else classify(max(worst, 0.0)),
        tuple(witnesses),
        {},
    )


def battery_monotonicity_cometric(
    trials: int = 1000, n_max: int = 6, seed: int = 0
) -> BatteryReport:
    """Variance of conditional expectations never exceeds the variance."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    witnesses: list[Witness] = []
    for trial in range(trials):
        n_in = int(rng.integers(2, n_max + 1))
        n_out = int(rng.integers(2, n_max + 1))
        channel = random_channel(n_in, n_out, seed=int(rng.integers(2**32)))
        p = sample_interior(SampleSpace(n_in), seed=int(rng.integers(2**32)))
        a = RandomVariable(SampleSpace(n_out), rng.normal(size=n_out))
        report = check_monotonicity_cometric(channel, p, a)
        worst = max(worst, report.slack)
        if report.status == "violation":
            witnesses.append(
                _shrunk_monotonicity_witness(
                    "monotonicity_cometric", channel, p, a.values, seed, trial
                )
            )
    return BatteryReport(
        "monotonicity_cometric",
        trials,
        n_max,
        seed,
        float(worst),
        "violation" if witnesses else classify(max(worst, 0.0)),
        tuple(witnesses),
        {},
    )


def _shrunk_monotonicity_witness(
    kind: str,
    channel: Channel,
    p: Distribution,
    vector: np.ndarray,
    seed: int,
    trial: int,
) -> Witness:
    key = "x" if kind == "monotonicity_metric" else "a"
    case = {"kernel": np.array(channel.kernel), "p": np.array(p.weights), key: np.array(vector)}
    if key == "x":
        case["sum_zero"] = True

    def still_fails(candidate: dict) -> bool:
        chan = Channel(
            SampleSpace(candidate["kernel"].shape[1]),
            SampleSpace(candidate["kernel"].shape[0]),
            candidate["kernel"],
        )
        point = new_distribution(chan.in_space, candidate["p"])
        if key == "x":
            rep = check_monotonicity_metric(
                chan, point, TangentVector(point, candidate["x"])
            )
        else:
            rep = check_monotonicity_cometric(
                chan, point, RandomVariable(chan.out_space, candidate["a"])
            )
        return rep.slack > VIOLATION_TOL

    case = shrink_case(
        case,
        still_fails,
        [_merge_channel_inputs, _merge_channel_outputs, _zero_vector_support(key)],
    )
    chan = Channel(
        SampleSpace(case["kernel"].shape[1]),
        SampleSpace(case["kernel"].shape[0]),
        case["kernel"],
    )
    point = new_distribution(chan.in_space, case["p"])
    if key == "x":
        rep = check_monotonicity_metric(chan, point, TangentVector(point, case["x"]))
    else:
        rep = check_monotonicity_cometric(
            chan, point, RandomVariable(chan.out_space, case["a"])
        )
    return Witness(
        kind=kind,
        m=chan.in_space.size,
        n=chan.out_space.size,
        lhs=rep.lhs,
        rhs=rep.rhs,
        gap=rep.slack,
        kernel=_rows(case["kernel"]),
        point=_floats(case["p"]),
        a=_floats(case[key]),
        detail=f"seed={seed} trial={trial}",
    )


def _random_pair(rng: np.random.Generator, n_max: int):
    n_big = int(rng.integers(3, n_max + 1))
    n_small = int(rng.integers(2, n_big))
    surjection = random_surjection(n_big, n_small, seed=int(rng.integers(2**32)))
    q = sample_interior(SampleSpace(n_big), seed=int(rng.integers(2**32)))
    return canonical_embedding(surjection, q), q


def battery_invariance(trials: int = 500, n_max: int = 8, seed: int = 0) -> BatteryReport:
    """Metric/co-metric/covariance invariance through canonical pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    witnesses: list[Witness] = []
    for trial in range(trials):
        pair, q = _random_pair(rng, n_max)
        n_small = pair.surjection.codomain.size
        a = RandomVariable(SampleSpace(n_small), rng.normal(size=n_small))
        b = RandomVariable(SampleSpace(n_small), rng.normal(size=n_small))
        report = check_invariance(
            pair,
            q,
            _random_sum_zero(rng, n_small),
            _random_sum_zero(rng, n_small),
            a,
            b,
        )
        worst = max(worst, report.max_residual)
        if report.status == "violation":
            witnesses.append(
                Witness(
                    kind="invariance",
                    m=n_small,
                    n=q.space.size,
                    lhs=report.max_residual,
                    rhs=0.0,
                    gap=report.max_residual,
                    surjection=pair.surjection.map0,
                    point=_floats(q.weights),
                    a=_floats(a.values),
                    b=_floats(b.values),
                    detail=f"seed={seed} trial={trial}",
                )
            )
    return BatteryReport(
        "invariance",
        trials,
        n_max,
        seed,
        worst,
        "violation" if witnesses else classify(worst),
        tuple(witnesses),
        {},
    )


def battery_strong_invariance(
    trials: int = 500, n_max: int = 8, seed: int = 0
) -> BatteryReport:
    """Adjoint/projector identities and the mixed covariance identity."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    witnesses: list[Witness] = []
    for trial in range(trials):
        pair, q = _random_pair(rng, n_max)
        n_small = pair.surjection.codomain.size
        n_big = q.space.size
        a = RandomVariable(SampleSpace(n_small), rng.normal(size=n_small))
        b = RandomVariable(SampleSpace(n_big), rng.normal(size=n_big))
        report = check_strong_invariance(pair, q, a, b)
        worst = max(worst, report.max_residual)
        if report.status == "violation":
            witnesses.append(
                Witness(
                    kind="strong_invariance",
                    m=n_small,
                    n=n_big,
                    lhs=report.max_residual,
                    rhs=0.0,
                    gap=report.max_residual,
                    surjection=pair.surjection.map0,
                    point=_floats(q.weights),
                    a=_floats(a.values),
                    b=_floats(b.values),
                    detail=f"seed={seed} trial={trial}",
                )
            )
    return BatteryReport(
        "strong_invariance",
        trials,
        n_max,
        seed,
        worst,
        "violation" if witnesses else classify(worst, pass_tol=STRONG_INVARIANCE_TOL),
        tuple(witnesses),
        {},
    )


def battery_prop6(
    trials: int = 200,
    n_max: int = 6,
    seed: int = 0,
    family: CandidateFamily | str = "COV",
) -> BatteryReport:
    """Two-sided pairing identity with a candidate family in place of g."""
    if isinstance(family, str):
        family = parse_family(family)
    rng = np.random.default_rng(seed)
    worst = 0.0
    witnesses: list[Witness] = []
    for trial in range(trials):
        pair, _ = _random_pair(rng, n_max)
        n_small = pair.surjection.codomain.size
        p = sample_interior(SampleSpace(n_small), seed=int(rng.integers(2**32)))
        alpha = delta(p, RandomVariable(p.space, rng.normal(size=n_small)))
        q_img = apply(pair.embedding_channel, p)
        beta = delta(q_img, RandomVariable(q_img.space, rng.normal(size=q_img.space.size)))
        report = check_prop6_identity(pair, p, alpha, beta, family)
        worst = max(worst, report.residual)
        if report.witness is not None:
            witnesses.append(report.witness)
    return BatteryReport(
        "prop6",
        trials,
        n_max,
        seed,
        worst,
        "violation" if witnesses else classify(worst),
        tuple(witnesses),
        {"family": family.name},
    )


def battery_crb(trials: int = 1000, n_max: int = 4, seed: int = 0) -> BatteryReport:
    """Randomized locally unbiased estimators never beat the bound.

    Estimators are built as minimum-norm lifts of the coordinate covectors
    plus random perturbations from the kernel of the restriction map, which
    preserves local unbiasedness exactly.
    """
    rng = np.random.default_rng(seed)
    worst_eig = np.inf
    witnesses: list[Witness] = []
    for trial in range(trials):
        n = int(rng.integers(2, n_max + 1))
        model = categorical_model(n)
        xi = sample_interior(SampleSpace(n), seed=int(rng.integers(2**32))).weights[
            : n - 1
        ]
        p = model.point(xi)
        jac = jacobian_at(model, xi)
        estimators = []
        for i in range(n - 1):
            unit = np.zeros(n - 1)
            unit[i] = 1.0
            rep = lift(model, xi, unit).rep.values
            noise = rng.normal(size=n)
            noise -= jac.T @ np.linalg.lstsq(jac.T, noise, rcond=None)[0]
            estimators.append(
                RandomVariable(model.space, rep + float(rng.uniform(0, 2)) * noise)
            )
        report = crb_check(model, xi, estimators)
        scaled = report.min_eigenvalue / (1.0 + np.max(np.abs(report.inverse_information)))
        worst_eig = min(worst_eig, scaled)
        if scaled < CRB_EIG_TOL:
            witnesses.append(
                Witness(
                    kind="crb",
                    m=n,
                    n=n,
                    lhs=report.min_eigenvalue,
                    rhs=0.0,
                    gap=-report.min_eigenvalue,
                    point=_floats(p.weights),
                    detail=f"seed={seed} trial={trial}",
                )
            )
    return BatteryReport(
        "crb",
        trials,
        n_max,
        seed,
        float(-worst_eig),
        "violation" if witnesses else "pass",
        tuple(witnesses),
        {"min_scaled_eigenvalue": float(worst_eig)},
    )


def battery_weak_invariance(
    n_max: int = 5,
    seed: int = 0,
    step: float = 1e-4,
    alphas: tuple[float, ...] = (-1.0, 0.0, 1.0),
    grid_count: int = 3,
    mismatched: bool = False,
) -> BatteryReport:
    """Connection invariance through canonical pairs on a parameter grid.

    With ``mismatched`` the big simplex carries the dual connection instead;
    the battery then passes only if the residual is large, confirming the
    check can detect non-invariance.
    """
    rng = np.random.default_rng(seed)
    sizes = [(m, n) for m in range(2, n_max) for n in range(m + 1, n_max + 1)]
    worst = 0.0
    control_min = np.inf
    witnesses: list[Witness] = []
    grids_used = []
    for alpha in alphas:
        for m, n in sizes:
            surjection = random_surjection(n, m, seed=int(rng.integers(2**32)))
            q = sample_interior(SampleSpace(n), seed=int(rng.integers(2**32)))
            pair = canonical_embedding(surjection, q)
            model = categorical_model(m)
            x = coordinate_field(model, 0)
            y = VectorFieldOnModel(
                model,
                lambda xi, d=m - 1: np.full(d, 0.4) + 0.3 * np.asarray(xi) ** 2,
            )
            # keep grid points well inside the simplex: the finite-difference
            # step (default 1e-4) must not push any weight negative
            grid = [
                sample_interior(
                    SampleSpace(m), seed=int(rng.integers(2**32)), floor=0.02
                ).weights[: m - 1]
                for _ in range(grid_count)
            ]
            grids_used.append([[float(v) for v in g] for g in grid])
            tag_big = (
                ConnectionTag(-alpha) if mismatched and alpha != 0.0 else None
            )
            if mismatched and alpha == 0.0:
                tag_big = ConnectionTag(1.0)
            report = weak_invariance_check(
                pair, ConnectionTag(alpha), x, y, grid, step=step, tag_big=tag_big
            )
            residual = max(report.residual_max, report.metric_residual_max)
            if mismatched:
                control_min = min(control_min, residual)
            else:
                worst = max(worst, residual)
                if residual > VIOLATION_TOL:
                    witnesses.append(
                        Witness(
                            kind="weak_invariance",
                            m=m,
                            n=n,
                            lhs=residual,
                            rhs=0.0,
                            gap=residual,
                            surjection=surjection.map0,
                            point=_floats(q.weights),
                            detail=f"alpha={alpha} seed={seed}",
                        )
                    )
    if mismatched:
        detected = control_min > 1e-3
        return BatteryReport(
            "weak_invariance_control",
            len(sizes) * len(alphas),
            n_max,
            seed,
            float(control_min),
            "pass" if detected else "violation",
            (),
            {"step": step, "alphas": list(alphas), "mismatch_detected": detected},
        )
    # Finite differences dominate here: pass at the connection tolerance.
    status = "violation" if witnesses else ("pass" if worst <= 1e-6 else "inconclusive")
    return BatteryReport(
        "weak_invariance",
        len(sizes) * len(alphas),
        n_max,
        seed,
        worst,
        status,
        tuple(witnesses),
        {
            "residual_max": worst,
            "step": step,
            "alphas": list(alphas),
            "grids": grids_used,
        },
    )


def battery_characterize(
    family: CandidateFamily | str,
    n_max: int = 6,
    denominator_bound: int = 64,
    trials: int = 8,
    seed: int = 0,
) -> BatteryReport:
    """Wrap the characterization probe as a battery."""
    result = characterize(family, n_max, denominator_bound, trials, seed)
    witnesses = () if result.witness is None else (result.witness,)
    return BatteryReport(
        "characterize",
        trials,
        n_max,
        seed,
        0.0 if result.passed else result.witness.gap,
        "pass" if result.passed else "violation",
        witnesses,
        {"characterize": result.to_json()},
    )


_BATTERIES: dict[str, Callable[..., BatteryReport]] = {
    "monotonicity_metric": battery_monotonicity_metric,
    "monotonicity_cometric": battery_monotonicity_cometric,
    "invariance": battery_invariance,
    "strong_invariance": battery_strong_invariance,
    "prop6": battery_prop6,
    "crb": battery_crb,
    "weak_invariance": battery_weak_invariance,
    "characterize": battery_characterize,
}


def run_battery(config: dict) -> BatteryReport:
    """Dispatch a battery-config object to its runner.

    Recognized keys per battery: ``battery`` (required), ``trials``,
    ``n_max``, ``seed``, ``family``, ``denominator_bound``, ``step``,
    ``alphas``, ``grid_count``, ``mismatched``.
    """
    if "battery" not in config:
        raise InvalidParameter("config needs a 'battery' key")
    name = config["battery"]
    runner = _BATTERIES.get(name)
    if runner is None:
        raise InvalidParameter(
            f"unknown battery {name!r}; known: {sorted(_BATTERIES)}"
        )
    kwargs = {k: v for k, v in config.items() if k != "battery"}
    if name == "characterize" and "family" not in kwargs:
        raise InvalidParameter("characterize battery needs a 'family' expression")
    try:
        return runner(**kwargs)
    except TypeError as exc:
        raise InvalidParameter(f"bad config for battery {name!r}: {exc}") from exc
