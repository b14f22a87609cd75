"""
End-to-end worked examples: localization from squared residuals,
resource allocation under an exponential change of variables, and
average consensus by dual decomposition.

Each scenario generates seeded private data, runs the disclosure
pipeline, builds the adversary's uncertainty set and compares its
privacy index against the expected one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .adversary import Fact, KnowledgeSet, Message, build_relation_consensus
from .decomposition import ConsensusRun, StepRule, StoppingRule
from .privacy import Ordering, PrivacyIndex, compare, privacy_index
from .transforms import (
    ChangeOfVariables, Problem, ScalarTransform, build_relation_localization,
    build_relation_resource, change_variables, classify_localization, kkt_residual,
    localization_problem, pull_back, solve_disclosed, transform_objective,
)
from .uncertainty_sets import TAU_GEO, format_extended, parse_extended


class ScenarioError(RuntimeError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class Instance:
    """Generated private data plus everything the pipeline disclosed."""

    seed: int
    private: dict
    message: Message
    knowledge: KnowledgeSet
    case: str
    targets: tuple
    extra: dict = field(default_factory=dict)


class Scenario:
    name = ""

    def generate(self, seed):
        raise NotImplementedError

    def relation(self, instance, knowledge, target):
        raise NotImplementedError

    def expected_rho(self, instance, target):
        raise NotImplementedError

    def refinement_chain(self, instance, target):
        """Base knowledge followed by three successive refinements."""
        raise NotImplementedError

    def params(self):
        return {}

    def stats(self, instance):
        return {}


# -- localization -------------------------------------------------------------

LOCALIZATION_MODES = ("generic", "collinear", "two-beacon")


class LocalizationScenario(Scenario):
    """
    A boat at the origin localizes itself from ``N0`` beacons inside the
    disk of diameter ``D``; the squared residual norm is sent to a solver.
    The protected input is beacon 1's position.
    """

    name = "localization"

    def __init__(self, N0=5, D=10.0, mode="generic"):
        if int(N0) != N0 or N0 < 1:
            raise ValueError("N0 must be a positive integer")
        if not (D > 0 and math.isfinite(D)):
            raise ValueError("D must be positive and finite")
        if mode not in LOCALIZATION_MODES:
            raise ValueError(f"unknown placement mode {mode!r}")
        if mode == "two-beacon" and N0 != 2:
            raise ValueError("two-beacon mode needs N0 = 2")
        if mode == "collinear" and N0 < 2:
            raise ValueError("collinear mode needs N0 >= 2")
        self.N0, self.D, self.mode = int(N0), float(D), mode

    def params(self):
        return {"N0": self.N0, "D": self.D, "mode": self.mode}

    def _directions(self, rng):
        N0 = self.N0
        if self.mode == "collinear":
            u = rng.standard_normal(2)
            u /= np.linalg.norm(u)
            return rng.choice([-1.0, 1.0], size=N0)[:, None] * u
        while True:
            t = rng.uniform(0, 2 * math.pi, size=N0)
            a = np.column_stack([np.cos(t), np.sin(t)])
            if N0 == 1:
                return a
            if N0 == 2:
                # keep the two-beacon ambiguity well conditioned
                if 0.1 <= abs(a[0] @ a[1]) <= 0.95:
                    return a
                continue
            s = np.linalg.svd(a, compute_uv=False)
            if s[-1] >= 0.1 * s[0]:
                return a

    def generate(self, seed):
        rng = np.random.default_rng(seed)
        R = 0.5 * self.D
        a = self._directions(rng)
        y = rng.uniform(0.1 * R, R, size=self.N0)
        beacons = y[:, None] * a
        dp = transform_objective(localization_problem(beacons), ScalarTransform.square(),
                                 seed=seed)
        knowledge = KnowledgeSet(dp.message, (
            Fact.structure("a", "||a_i|| = 1"),
            Fact.structure("Abar", "Abar = sum_i a_i a_i^T"),
            Fact.structure("ybar", "ybar = sum_i y_i a_i, 0 < y_i <= D/2"),
            Fact.dimension("N", self.N0),
            Fact.bound("area_diameter", self.D),
        ))
        case = classify_localization(dp.message, knowledge)
        return Instance(seed, {"beacons": beacons, "a": a, "y": y}, dp.message, knowledge,
                        case, (0,), {"disclosed": dp})

    def relation(self, instance, knowledge, target=0):
        if target not in (0, None):
            raise ValueError("localization protects beacon 1 only")
        return build_relation_localization(knowledge.inevitable, knowledge)

    def expected_rho(self, instance, target=0):
        P = instance.private["beacons"]
        return case_table_localization(
            self.N0, instance.case, self.D,
            float(np.linalg.norm(P[0] - P[1])) if self.N0 == 2 else None)

    def refinement_chain(self, instance, target=0):
        a1 = instance.private["a"][0]
        y1 = float(instance.private["y"][0])
        k0 = instance.knowledge
        k1 = k0.refine(Fact.bound("y1", y1))
        k2 = k1.refine(Fact.exact("a1", a1))
        k3 = k2.refine(Fact.exact("y1", y1))
        return [k0, k1, k2, k3]

    def stats(self, instance):
        dp = instance.extra["disclosed"]
        x = solve_disclosed(dp)
        return {"solver_estimate": x.tolist()}


_CASE_ALIASES = {"generic": "ab", "a": "a", "b": "b", "ab": "ab", "1ab": "ab",
                 "c": "c", "collinear": "c", "1c": "c", "2c": "c",
                 "transversal": "b", "2b": "b", "single": "single"}


def case_table_localization(N0, conditioning, D=1.0, pair_distance=None):
    """
    Expected privacy index of beacon 1's position per localization case.

    Parameters
    ----------
    N0 : int
        Number of beacons.
    conditioning : str
        ``a``/``b``/``ab``/``generic``, ``c``/``collinear`` or
        ``transversal`` (labels such as ``1ab`` and ``2b`` are accepted too).
    D : float
        Area diameter.
    pair_distance : float, optional
        Distance between the two beacons, needed for the two-beacon case.
    """
    if int(N0) != N0 or N0 < 1:
        raise ValueError("N0 must be a positive integer")
    if conditioning not in _CASE_ALIASES:
        raise ValueError(f"unknown case {conditioning!r}")
    case = _CASE_ALIASES[conditioning]
    if N0 == 1:
        return PrivacyIndex.zero()
    if case == "single":
        raise ValueError("the single-beacon case needs N0 = 1")
    if case == "c":
        return PrivacyIndex(D, 1.0, 1)
    if N0 > 2:
        if conditioning in ("transversal", "2b"):
            raise ValueError("the transversal case needs N0 = 2")
        return PrivacyIndex(D, 1.0, 2)
    if case == "a":
        raise ValueError("case a does not exist for two beacons")
    if pair_distance is None:
        raise ValueError("the two-beacon case needs the beacon pair distance")
    return PrivacyIndex(pair_distance, 0.5, 1)


# -- resource allocation ------------------------------------------------------

class ResourceScenario(Scenario):
    """
    ``N`` users share a cubic budget; the owner substitutes
    ``x_i = alpha_i exp(z_i)`` and discloses ``s_i = beta_i alpha_i^3 / gamma``.
    Each tuple ``(alpha_i, beta_i)`` is protected.
    """

    name = "resource"

    def __init__(self, N=3, alpha_range=(0.5, 2.0), beta_range=(0.5, 2.0),
                 gamma_range=(1.0, 10.0)):
        if int(N) != N or N < 1:
            raise ValueError("N must be a positive integer")
        for lo, hi in (alpha_range, beta_range, gamma_range):
            if not 0 < lo <= hi:
                raise ValueError("parameter ranges must be positive intervals")
        self.N = int(N)
        self.alpha_range, self.beta_range, self.gamma_range = alpha_range, beta_range, gamma_range

    def params(self):
        return {"N": self.N}

    def generate(self, seed):
        rng = np.random.default_rng(seed)
        alpha = rng.uniform(*self.alpha_range, size=self.N)
        beta = rng.uniform(*self.beta_range, size=self.N)
        gamma = float(rng.uniform(*self.gamma_range))
        problem = Problem.resource_allocation(alpha, beta, gamma)
        dp = change_variables(problem, ChangeOfVariables.exp_scaled(alpha), seed=seed)
        knowledge = KnowledgeSet(dp.message, (
            Fact.structure("s", "s_i = beta_i alpha_i^3 / gamma"),
            Fact.positive("alpha"), Fact.positive("beta"), Fact.positive("gamma"),
            Fact.dimension("N", self.N),
        ))
        return Instance(seed, {"alpha": alpha, "beta": beta, "gamma": gamma},
                        dp.message, knowledge, "tuple", tuple(range(self.N)),
                        {"disclosed": dp, "problem": problem})

    def relation(self, instance, knowledge, target=0):
        return build_relation_resource(knowledge.inevitable, knowledge, target)

    def expected_rho(self, instance, target=0):
        return PrivacyIndex.maximal(2)

    def refinement_chain(self, instance, target=0):
        p = instance.private
        k0 = instance.knowledge
        k1 = k0.refine(Fact.exact(f"alpha[{target}]", p["alpha"][target]))
        k2 = k1.refine(Fact.exact("gamma", p["gamma"]))
        k3 = k2.refine(Fact.exact(f"beta[{target}]", p["beta"][target]))
        return [k0, k1, k2, k3]

    def stats(self, instance):
        dp = instance.extra["disclosed"]
        z = solve_disclosed(dp)
        x = pull_back(z, dp.transform)
        return {"x": x.tolist(),
                "kkt_residual": kkt_residual(instance.extra["problem"], x)}


# -- consensus ----------------------------------------------------------------

class ConsensusScenario(Scenario):
    """
    ``N`` subsystems average private scalars ``c_i`` by dual decomposition.
    An outside eavesdropper sees every broadcast value and pools the data
    of ``r`` colluding subsystems; subsystem 1's value is protected.
    """

    name = "consensus"

    def __init__(self, N=5, r=0, c_range=(-10.0, 10.0), step=1.0, certify=100):
        if int(N) != N or N < 3:
            raise ValueError("consensus needs N >= 3")
        if int(r) != r or not 0 <= r <= N - 1:
            raise ValueError("r must lie in 0..N-1")
        if not c_range[0] < c_range[1]:
            raise ValueError("c_range must be a nonempty interval")
        if not step > 0:
            raise ValueError("step must be positive")
        self.N, self.r, self.c_range = int(N), int(r), c_range
        self.step, self.certify = float(step), int(certify)

    def params(self):
        return {"N": self.N, "r": self.r}

    def generate(self, seed):
        rng = np.random.default_rng(seed)
        c = rng.uniform(*self.c_range, size=self.N)
        g = rng.standard_normal(self.N)
        lambda0 = g - g.mean()
        run = ConsensusRun.execute(c, lambda0, StepRule.constant(self.step), StoppingRule())
        t = run.transcript
        message = Message({"y": run.interface_matrix(), "z": t.global_iterates()[:, 0],
                           "steps": t.steps()}, origin="dual-decomposition")
        knowledge = KnowledgeSet(message, (Fact.dimension("N", self.N),))
        for j in range(1, self.r + 1):
            knowledge = knowledge.refine(Fact.exact(f"c[{j}]", c[j]))
            knowledge = knowledge.refine(Fact.exact(f"lambda0[{j}]", lambda0[j]))
        return Instance(seed, {"c": c, "lambda0": lambda0}, message, knowledge,
                        f"r={self.r}", (0,), {"run": run})

    @staticmethod
    def colluders(knowledge, N):
        return [j for j in range(N)
                if knowledge.has("exact", f"c[{j}]") and knowledge.has("exact", f"lambda0[{j}]")]

    def relation(self, instance, knowledge, target=0):
        run = instance.extra["run"]
        return build_relation_consensus(run, None, target, self.colluders(knowledge, self.N),
                                        certify=self.certify, seed=instance.seed)

    def expected_rho(self, instance, target=0):
        if len(self.colluders(instance.knowledge, self.N)) >= self.N - 1:
            return PrivacyIndex.zero()
        return PrivacyIndex.maximal(1)

    def refinement_chain(self, instance, target=0):
        p = instance.private
        others = [j for j in range(self.N) if j != target]
        chain = [instance.knowledge]
        for size in (1, 2, self.N - 1):
            k = chain[-1]
            for j in others[:size]:
                k = k.refine(Fact.exact(f"c[{j}]", p["c"][j]))
                k = k.refine(Fact.exact(f"lambda0[{j}]", p["lambda0"][j]))
            chain.append(k)
        return chain

    def stats(self, instance):
        res = instance.extra["run"].result
        c = instance.private["c"]
        return {"converged": bool(res.converged), "iterations": int(res.iterations),
                "residual": float(res.residual),
                "consensus_error": float(abs(res.z[0] - c.mean()))}


SCENARIOS = {"localization": LocalizationScenario, "resource": ResourceScenario,
             "consensus": ConsensusScenario}


def get_scenario(name, **params):
    """Instantiate a bundled scenario by name."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    return SCENARIOS[name](**params)


# -- reports ------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and math.isinf(value):
        return format_extended(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class TargetResult:
    target: int
    set_kind: str
    rho: PrivacyIndex
    expected_rho: PrivacyIndex
    match: bool

    def to_dict(self):
        return {"target": self.target, "set_kind": self.set_kind,
                "rho": self.rho.to_dict(), "expected_rho": self.expected_rho.to_dict(),
                "match": self.match}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["target"]), d["set_kind"], PrivacyIndex.from_dict(d["rho"]),
                   PrivacyIndex.from_dict(d["expected_rho"]), bool(d["match"]))


@dataclass
class ScenarioReport:
    """
    Outcome of one scenario run.  ``rho``/``set_kind``/``match`` describe
    the primary target (the first one); ``targets`` lists all of them.
    """

    scenario: str
    params: dict
    seed: int
    case_label: str
    private: dict
    message: dict
    targets: list
    stats: dict = field(default_factory=dict)

    @property
    def primary(self):
        return self.targets[0]

    @property
    def rho(self):
        return self.primary.rho

    @property
    def expected_rho(self):
        return self.primary.expected_rho

    @property
    def set_kind(self):
        return self.primary.set_kind

    @property
    def match(self):
        return all(t.match for t in self.targets)

    def to_dict(self):
        return {
            "scenario": self.scenario, "params": _jsonable(self.params), "seed": self.seed,
            "case_label": self.case_label,
            "set_kind": self.set_kind, "rho": self.rho.to_dict(),
            "expected_rho": self.expected_rho.to_dict(), "match": self.match,
            "targets": [t.to_dict() for t in self.targets],
            "private": _jsonable(self.private), "message": _jsonable(self.message),
            "stats": _jsonable(self.stats),
        }

    @classmethod
    def from_dict(cls, d):
        stats = {k: parse_extended(v) if v == "inf" else v for k, v in d.get("stats", {}).items()}
        return cls(d["scenario"], dict(d["params"]), int(d["seed"]), d["case_label"],
                   dict(d["private"]), dict(d["message"]),
                   [TargetResult.from_dict(t) for t in d["targets"]], stats)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), allow_nan=False, **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _stage(label, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage attached
        raise ScenarioError(label, exc) from exc


def run_scenario(scenario, seed, tol=TAU_GEO):
    """Generate, disclose, build relations and compare indices for every target."""
    inst = _stage("generate", scenario.generate, seed)
    results = []
    for t in inst.targets:
        U = _stage("relation", scenario.relation, inst, inst.knowledge, t)
        rho = _stage("privacy_index", privacy_index, U)
        expected = _stage("expected", scenario.expected_rho, inst, t)
        ok = compare(rho, expected, tol) is Ordering.EQUAL
        results.append(TargetResult(int(t), U.kind.value, rho, expected, ok))
    stats = _stage("stats", scenario.stats, inst)
    return ScenarioReport(scenario.name, scenario.params(), int(seed), inst.case,
                          _jsonable(inst.private), inst.message.to_dict(), results,
                          _jsonable(stats))


def refinement_indices(scenario, instance, target=0):
    """Privacy indices along the scenario's refinement chain."""
    return [privacy_index(scenario.relation(instance, k, target))
            for k in scenario.refinement_chain(instance, target)]
