"""
Passive adversary: what it observes, what else it knows, and the
uncertainty sets it can derive from that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decomposition import replay_consensus
from .uncertainty_sets import TAU_GEO, FinitePoints, UnboundedAffine, is_subset

FACT_KINDS = ("exact", "positive", "bound", "structure", "dimension")


def _freeze(value):
    a = np.array(value, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Message:
    """Finite, immutable sequence of named numeric payloads."""

    entries: tuple
    origin: str = ""

    def __post_init__(self):
        items = self.entries.items() if isinstance(self.entries, dict) else self.entries
        object.__setattr__(self, "entries", tuple((str(k), _freeze(v)) for k, v in items))

    def __getitem__(self, name):
        for k, v in self.entries:
            if k == name:
                return v
        raise KeyError(name)

    def __len__(self):
        return len(self.entries)

    def names(self):
        return [k for k, _ in self.entries]

    def __eq__(self, other):
        if not isinstance(other, Message):
            return NotImplemented
        return self.origin == other.origin and len(self) == len(other) and all(
            k1 == k2 and np.array_equal(v1, v2)
            for (k1, v1), (k2, v2) in zip(self.entries, other.entries))

    def __hash__(self):
        return hash((self.origin, tuple(self.names())))

    def to_dict(self):
        return {k: v.tolist() for k, v in self.entries}


@dataclass(frozen=True)
class Fact:
    """
    One auxiliary fact.  The grammar is closed: exact values, positivity,
    upper bounds, structural equations (recorded as text) and dimensions.
    """

    kind: str
    name: str
    value: object = None

    def __post_init__(self):
        if self.kind not in FACT_KINDS:
            raise ValueError(f"unknown fact kind {self.kind!r}")
        v = self.value
        if isinstance(v, (list, tuple, np.ndarray)):
            v = tuple(float(x) for x in np.ravel(v))
        elif isinstance(v, (int, float, np.floating, np.integer)) and self.kind != "dimension":
            v = float(v)
        object.__setattr__(self, "value", v)

    @classmethod
    def exact(cls, name, value):
        return cls("exact", name, value)

    @classmethod
    def positive(cls, name):
        return cls("positive", name)

    @classmethod
    def bound(cls, name, upper):
        return cls("bound", name, upper)

    @classmethod
    def structure(cls, name, equation):
        return cls("structure", name, str(equation))

    @classmethod
    def dimension(cls, name, n):
        return cls("dimension", name, int(n))


@dataclass(frozen=True)
class KnowledgeSet:
    """Inevitable message plus an append-only tuple of auxiliary facts."""

    inevitable: Message
    auxiliary: tuple = ()

    def __post_init__(self):
        seen = []
        for f in self.auxiliary:
            if f not in seen:
                seen.append(f)
        object.__setattr__(self, "auxiliary", tuple(seen))

    def refine(self, fact):
        return refine_knowledge(self, fact)

    def __contains__(self, fact):
        return fact in self.auxiliary

    def __le__(self, other):
        return self.inevitable == other.inevitable and set(self.auxiliary) <= set(other.auxiliary)

    def __lt__(self, other):
        return self <= other and set(self.auxiliary) != set(other.auxiliary)

    def get(self, kind, name, default=None):
        """Value of the most recent fact of this kind and name."""
        for f in reversed(self.auxiliary):
            if f.kind == kind and f.name == name:
                return f.value
        return default

    def has(self, kind, name):
        return any(f.kind == kind and f.name == name for f in self.auxiliary)


def refine_knowledge(base, fact):
    """Return ``base`` with ``fact`` appended; a repeated fact is a no-op."""
    if fact in base.auxiliary:
        return base
    return KnowledgeSet(base.inevitable, base.auxiliary + (fact,))


# -- consensus ----------------------------------------------------------------

def coalition(adversary_id, colluders):
    members = set(int(j) for j in colluders)
    if adversary_id is not None:
        members.add(int(adversary_id))
    return members


def _sample_theta(rng, N, free, n):
    """``n`` vectors in R^N with zero sum, supported on the `free` indices."""
    theta = np.zeros((n, N))
    g = rng.standard_normal((n, len(free)))
    theta[:, free] = g - g.mean(axis=1, keepdims=True)
    return theta


def certify_consensus_replay(run, known, n_trials=100, seed=0, scale=None, tol=1e-9):
    """
    Replay the run with ``(c_i - theta_i, lambda_i - 2 theta_i)`` for random
    zero-sum ``theta`` supported off the coalition and check that every
    interface value is reproduced.

    Returns the largest entrywise deviation observed.
    """
    N = run.N
    free = [i for i in range(N) if i not in known]
    if len(free) < 2:
        raise ValueError("replay certification needs at least two unknown subsystems")
    rng = np.random.default_rng(seed)
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(run.c))))
    theta = scale * _sample_theta(rng, N, free, n_trials)
    observed = run.interface_matrix()
    replayed = replay_consensus(run.c - theta, run.lambda0 - 2.0 * theta,
                                run.transcript.steps())
    dev = float(np.max(np.abs(replayed - observed[None, :, :])))
    if dev > tol * max(1.0, float(np.max(np.abs(observed)))):
        raise AssertionError(f"replay deviates from transcript by {dev:.3e}")
    return dev


def recover_consensus_target(run, target, known, observe_global=True):
    """
    Exact recovery of ``c_target`` once every other subsystem is in the
    coalition: the dual of the target is ``-sum`` of the others (the duals
    start in ``E^T lambda = 0``) and is then replayed forward through
    step 3.  Every iteration yields the same value, which is checked.
    """
    t = run.transcript
    y_target = t.interface(target)[:, 0]
    if observe_global:
        z = t.global_iterates()[:, 0]
    else:
        z = run.interface_matrix().mean(axis=1)
    steps = t.steps()
    lam = -sum(float(run.lambda0[j]) for j in known)
    estimates = np.empty(len(y_target))
    for k, alpha in enumerate(steps):
        estimates[k] = y_target[k] + lam / 2.0
        lam += alpha * (y_target[k] - z[k])
    spread = float(np.max(estimates) - np.min(estimates))
    if spread > 1e-8 * max(1.0, float(np.max(np.abs(estimates)))):
        raise AssertionError(f"inconsistent reconstruction (spread {spread:.3e})")
    return float(estimates[0])


def build_relation_consensus(run, adversary_id, target, colluders=(), certify=100,
                             seed=0, observe_global=True):
    """
    Uncertainty set of ``c_target`` for a coalition observing a consensus run.

    Parameters
    ----------
    run : ConsensusRun
        The observed run.  Its private data is only touched for the
        coalition members (pooled knowledge) and for replay certification.
    adversary_id : int or None
        Observing subsystem; ``None`` for an outside eavesdropper.
    target : int
    colluders : iterable of int
    certify : int
        Number of zero-sum perturbations replayed to certify a
        non-singleton answer (0 disables the check).

    Returns
    -------
    UncertaintySet
        The whole real line while at least one subsystem other than the
        target stays honest, otherwise the recovered singleton.
    """
    N = run.N
    if N <= 2:
        raise ValueError("consensus privacy needs N > 2")
    known = coalition(adversary_id, colluders)
    if target == adversary_id:
        raise ValueError("target equals the adversary")
    if target in known:
        raise ValueError("target is part of the coalition")
    if not 0 <= target < N or any(not 0 <= j < N for j in known):
        raise ValueError("subsystem index out of range")

    if len(known) < N - 1:
        if certify:
            certify_consensus_replay(run, known, n_trials=certify, seed=seed)
        y1 = run.transcript.interface(target)[0]
        return UnboundedAffine(y1, [[1.0]])
    c_hat = recover_consensus_target(run, target, known, observe_global)
    return FinitePoints([[c_hat]])


# -- knowledge monotonicity ----------------------------------------------------

def check_shrinkage(scenario, instance, k1, k2, target=0, tol=TAU_GEO):
    """
    For ``k1 ⊆ k2`` with the same inevitable message, check
    ``U(k2) ⊆ U(k1)`` using the scenario's relation builder.
    """
    if k1.inevitable != k2.inevitable:
        raise ValueError("knowledge sets carry different inevitable messages")
    if not k1 <= k2:
        raise ValueError("knowledge sets are not nested")
    U1 = scenario.relation(instance, k1, target)
    U2 = scenario.relation(instance, k2, target)
    return is_subset(U2, U1, tol)
