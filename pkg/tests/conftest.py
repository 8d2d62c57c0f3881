"""Shared fixtures: small hand-built models, random instance generators,
and deterministic pseudo-random strategies.

"Random" strategies hash their decision key, so a (salt, key) pair always
produces the same action without storing tables; this keeps property
tests reproducible without fixture files.
"""

import hashlib

import numpy as np
import pytest

from teamdp import InformationStructure, TeamModel
from teamdp.model import history_key, prefix_view, view_key

# ---------------------------------------------------------------------------
# hand-built models


def flip_transition(flip: float, num_joint_actions: int) -> np.ndarray:
    """2-state kernel: the state flips with the same chance under every
    joint action."""
    t = np.empty((2, num_joint_actions, 2))
    t[0, :, :] = [1.0 - flip, flip]
    t[1, :, :] = [flip, 1.0 - flip]
    return t


def symmetric_kernel(p_correct: float) -> np.ndarray:
    return np.array([[p_correct, 1.0 - p_correct], [1.0 - p_correct, p_correct]])


@pytest.fixture
def toy2():
    """2 members, 2 states, binary everything, T=2, one-step delayed
    sharing.  Flip chance 0.3, observation accuracy 0.8, fixed costs."""
    stage = np.array(
        [
            [[0.0, 1.0, 0.2, 0.8], [1.0, 0.0, 0.7, 0.3]],
            [[0.3, 0.9, 0.1, 0.5], [0.6, 0.2, 0.8, 0.4]],
        ]
    )
    model = TeamModel(
        num_members=2,
        horizon=2,
        states=("lo", "hi"),
        actions=(("stay", "go"), ("stay", "go")),
        observations=(("dim", "bright"), ("dim", "bright")),
        initial_dist=np.array([0.6, 0.4]),
        transition=flip_transition(0.3, 4),
        observation_kernels=(symmetric_kernel(0.8), symmetric_kernel(0.8)),
        stage_cost=stage,
        terminal_cost=np.array([0.0, 1.0]),
    )
    structure = InformationStructure("delayed_sharing", delays=(1, 1))
    return model, structure


@pytest.fixture
def chain1():
    """Single member, 2 states, T=2: the degenerate team."""
    model = TeamModel(
        num_members=1,
        horizon=2,
        states=("a", "b"),
        actions=(("u0", "u1"),),
        observations=(("y0", "y1"),),
        initial_dist=np.array([0.5, 0.5]),
        transition=flip_transition(0.25, 2),
        observation_kernels=(symmetric_kernel(0.85),),
        stage_cost=np.array([[[0.0, 0.6], [0.9, 0.1]], [[0.2, 0.7], [0.5, 0.0]]]),
        terminal_cost=np.array([0.0, 2.0]),
    )
    return model, InformationStructure("delayed_sharing", delays=(1,))


@pytest.fixture
def classical2():
    """2 members who both observe the state perfectly with one-step
    sharing: informationally classical, so the member solves must
    reproduce the manager's decisions exactly."""
    eye = np.eye(2)
    stage = np.array(
        [
            [[0.0, 0.8, 0.3, 1.0], [0.9, 0.2, 1.0, 0.4]],
            [[0.5, 0.1, 0.6, 0.2], [0.3, 0.7, 0.0, 0.9]],
        ]
    )
    model = TeamModel(
        num_members=2,
        horizon=2,
        states=("s0", "s1"),
        actions=(("l", "r"), ("l", "r")),
        observations=(("s0", "s1"), ("s0", "s1")),
        initial_dist=np.array([0.7, 0.3]),
        transition=flip_transition(0.4, 4),
        observation_kernels=(eye, eye.copy()),
        stage_cost=stage,
        terminal_cost=np.array([1.0, 0.0]),
    )
    return model, InformationStructure("delayed_sharing", delays=(1, 1))


# ---------------------------------------------------------------------------
# random instances


def random_model(
    seed: int,
    num_members: int = 2,
    num_states: int = 3,
    horizon: int = 2,
    obs_sizes=None,
    positive: bool = True,
) -> TeamModel:
    """Reproducible random instance; ``positive`` keeps every kernel entry
    off zero so all observation branches stay reachable."""
    r = np.random.default_rng(seed)
    K, S, T = num_members, num_states, horizon
    obs_sizes = tuple(obs_sizes or (2,) * K)
    A = 2**K

    def dist(shape):
        m = r.uniform(0.05 if positive else 0.0, 1.0, size=shape)
        return m / m.sum(axis=-1, keepdims=True)

    return TeamModel(
        num_members=K,
        horizon=T,
        states=tuple(f"s{i}" for i in range(S)),
        actions=tuple(("0", "1") for _ in range(K)),
        observations=tuple(tuple(str(v) for v in range(n)) for n in obs_sizes),
        initial_dist=dist((S,)),
        transition=dist((S, A, S)),
        observation_kernels=tuple(dist((S, n)) for n in obs_sizes),
        stage_cost=r.uniform(0.0, 1.0, size=(T, S, A)).round(3),
        terminal_cost=r.uniform(0.0, 1.0, size=(S,)).round(3),
    )


# ---------------------------------------------------------------------------
# deterministic pseudo-random strategies


def _digest(text: str) -> bytes:
    return hashlib.sha256(text.encode()).digest()


class HashedCentralizedStrategy:
    """Full-history strategy whose actions are a hash of the history."""

    variant = "hashed"
    scope = "team"

    def __init__(self, model: TeamModel, salt: int):
        self.model = model
        self.salt = salt

    def joint_action(self, obs_seq, act_seq, t):
        d = _digest(f"{self.salt}|{t}|{history_key(act_seq, obs_seq)}")
        return tuple(d[i] % n for i, n in enumerate(self.model.action_sizes))


class HashedMemberStrategy:
    """View-measurable member strategy whose action hashes the view."""

    variant = "hashed"
    scope = "member"

    def __init__(self, model: TeamModel, structure: InformationStructure, member: int, salt: int):
        self.model = model
        self.structure = structure
        self.member = member
        self.salt = salt

    def member_action(self, obs_seq, act_seq, t):
        v = prefix_view(self.structure, self.model.num_members, obs_seq, act_seq, t, self.member)
        d = _digest(f"{self.salt}|{view_key(v)}")
        return d[0] % self.model.action_sizes[self.member]
