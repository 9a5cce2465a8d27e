import numpy as np
import pytest

from prefland.landing import LandingModel, RewardWeights


@pytest.fixture(scope="session")
def model():
    return LandingModel()


@pytest.fixture(scope="session")
def w_true():
    return RewardWeights(0.1, 0.8, 0.1)


def make_chain_mdp():
    """Two-state chain: state 0 live, state 1 absorbing.

    Action 0 stays in state 0, action 1 moves to the terminal state. Reward 1
    for both actions at state 0, zero at the terminal.
    """
    from prefland.mdp import FiniteMDP

    nxt = np.array([[0, 1], [1, 1]])
    terminal = np.array([False, True])
    mdp = FiniteMDP(2, 2, nxt, terminal, discount=0.9)
    reward = np.array([[1.0, 1.0], [0.0, 0.0]])
    return mdp, reward


def random_deterministic_mdp(rng, n_states=12, n_actions=3, terminal_count=2,
                             discount=0.9):
    from prefland.mdp import FiniteMDP

    nxt = rng.integers(0, n_states, size=(n_states, n_actions))
    terminal = np.zeros(n_states, dtype=bool)
    terminal[rng.choice(n_states, size=terminal_count, replace=False)] = True
    for s in np.flatnonzero(terminal):
        nxt[s, :] = s
    reward = rng.normal(size=(n_states, n_actions))
    reward[terminal] = 0.0
    return FiniteMDP(n_states, n_actions, nxt, terminal, discount), reward


def brute_force_q(mdp, reward, tol=1e-12, cap=100000):
    """Independent fixed-point oracle: plain per-entry Bellman iteration."""
    q = np.zeros((mdp.state_count, mdp.action_count))
    for _ in range(cap):
        new = np.empty_like(q)
        for s in range(mdp.state_count):
            for a in range(mdp.action_count):
                s2 = mdp.next_state[s, a]
                new[s, a] = reward[s, a] + mdp.discount * max(
                    q[s2, b] for b in range(mdp.action_count)
                )
        if np.abs(new - q).max() <= tol:
            return new
        q = new
    raise AssertionError("oracle did not converge")
