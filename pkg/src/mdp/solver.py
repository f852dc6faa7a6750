"""Value iteration, exact policy evaluation and small-instance oracles."""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.sparse import csgraph

from ..constants import (
    ACTION_BACKSCATTER,
    BRUTE_FORCE_MAX_STATES,
    DEFAULT_GAMMA,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_THETA,
    STATIONARY_TOLERANCE,
)
from ..exceptions import SolverError
from ..utils import setup_logging
from .model import MdpModel, Policy, ValueFunction

logger = setup_logging(__name__)

_EVALUATION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Value-iteration settings: discount, stopping threshold and sweep cap."""

    gamma: float = DEFAULT_GAMMA
    theta: float = DEFAULT_THETA
    max_iterations: int = DEFAULT_MAX_ITERATIONS


def _check_discount(gamma: float, allow_zero: bool = False) -> None:
    low_ok = gamma >= 0.0 if allow_zero else gamma > 0.0
    if not (low_ok and gamma < 1.0):
        bound = "[0, 1)" if allow_zero else "(0, 1)"
        raise SolverError(f"discount must lie in {bound}, got {gamma}")


def action_values(model: MdpModel, values: np.ndarray, gamma: float) -> np.ndarray:
    """(S, A) one-step lookahead values; infeasible pairs are -inf."""
    q = model.reward + gamma * (model.kernel @ values)
    return np.where(model.feasible, q, -np.inf)


def greedy_actions(q: np.ndarray) -> np.ndarray:
    # argmax keeps the first maximum, so exact ties go to harvest (action 0)
    return np.argmax(q, axis=1)


def value_iteration(model: MdpModel, gamma: float, theta: float = DEFAULT_THETA,
                    max_iterations: int = DEFAULT_MAX_ITERATIONS) -> tuple[ValueFunction, Policy]:
    """Solve the discounted MDP by value iteration from V = 0.

    Sweeps stop once the sup-norm change between two sweeps drops below
    ``theta``; the returned policy is greedy with respect to the final V,
    maximizing over feasible actions only.

    Raises:
        SolverError: Invalid discount/threshold or iteration cap reached
    """
    _check_discount(gamma)
    if not theta > 0:
        raise SolverError(f"theta must be > 0, got {theta}")

    values = np.zeros(model.n_states)
    delta = np.inf
    for iteration in range(1, max_iterations + 1):
        updated = action_values(model, values, gamma).max(axis=1)
        delta = float(np.max(np.abs(updated - values)))
        values = updated
        if iteration % 100 == 0:
            logger.debug("Sweep %d: delta=%.3e", iteration, delta)
        if delta < theta:
            break
    else:
        raise SolverError("value iteration did not converge", residual=delta, iterations=max_iterations)

    actions = greedy_actions(action_values(model, values, gamma))
    logger.info("Value iteration converged in %d sweeps (delta=%.3e)", iteration, delta)
    return ValueFunction(values, iterations=iteration, delta=delta), Policy(actions, name="vi")


def bellman_residual(model: MdpModel, value: ValueFunction, gamma: float) -> float:
    """max over s of |V(s) - max over feasible a of (R + gamma * P V)|."""
    backup = action_values(model, value.values, gamma).max(axis=1)
    return float(np.max(np.abs(value.values - backup)))


def _policy_matrices(model: MdpModel, policy: Policy) -> tuple[np.ndarray, np.ndarray]:
    policy.check_feasible(model.feasible)
    idx = np.arange(model.n_states)
    return model.kernel[idx, policy.actions], model.reward[idx, policy.actions]


def policy_evaluation_exact(model: MdpModel, policy: Policy, gamma: float) -> ValueFunction:
    """Solve V = R_pi + gamma * P_pi V as a linear system.

    Raises:
        SolverError: Discount outside [0, 1), or the solve leaves a residual
            above 1e-10 (relative to the value scale)
    """
    _check_discount(gamma, allow_zero=True)
    p_pi, r_pi = _policy_matrices(model, policy)
    system = np.eye(model.n_states) - gamma * p_pi
    try:
        values = linalg.solve(system, r_pi)
        # one refinement step
        values = values + linalg.solve(system, r_pi - system @ values)
    except linalg.LinAlgError as e:
        raise SolverError(f"singular policy-evaluation system: {e}")

    residual = float(np.max(np.abs(values - (r_pi + gamma * p_pi @ values))))
    scale = max(1.0, float(np.max(np.abs(values))))
    if residual > _EVALUATION_TOLERANCE * scale:
        raise SolverError("policy evaluation residual too large", residual=residual)
    return ValueFunction(values)


def _reachable(p_pi: np.ndarray, start: np.ndarray) -> np.ndarray:
    reach = start.copy()
    frontier = start.copy()
    adjacency = p_pi > 0
    while frontier.any():
        nxt = adjacency[frontier].any(axis=0) & ~reach
        reach |= nxt
        frontier = nxt
    return reach


def stationary_distribution(model: MdpModel, policy: Policy,
                            initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Long-run state occupancy of the chain induced by ``policy``.

    The recurrent class is the unique closed communicating class reachable
    from the support of ``initial`` (``model.initial`` by default).

    Raises:
        SolverError: Several reachable closed classes, or a stationary
            solve whose fixed-point residual exceeds 1e-10
    """
    p_pi, _ = _policy_matrices(model, policy)
    start = (model.initial if initial is None else np.asarray(initial, dtype=float)) > 0
    reach = _reachable(p_pi, start)

    n_classes, labels = csgraph.connected_components(p_pi > 0, directed=True, connection="strong")
    closed = np.ones(n_classes, dtype=bool)
    rows, cols = np.nonzero(p_pi > 0)
    leaving = labels[rows] != labels[cols]
    closed[np.unique(labels[rows[leaving]])] = False

    recurrent = sorted({int(c) for c in labels[reach] if closed[c]})
    if len(recurrent) != 1:
        raise SolverError(f"expected one reachable recurrent class, found {len(recurrent)}")
    members = np.flatnonzero(labels == recurrent[0])

    p_class = p_pi[np.ix_(members, members)]
    size = len(members)
    system = p_class.T - np.eye(size)
    system[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    try:
        d_class = linalg.solve(system, rhs)
    except linalg.LinAlgError as e:
        raise SolverError(f"stationary solve failed: {e}")

    residual = float(np.max(np.abs(d_class @ p_class - d_class)))
    if residual >= STATIONARY_TOLERANCE:
        raise SolverError("stationary distribution did not converge", residual=residual)
    d = np.zeros(model.n_states)
    d[members] = np.clip(d_class, 0.0, None)
    return d / d.sum()


def long_run_average(model: MdpModel, policy: Policy,
                     initial: Optional[np.ndarray] = None) -> float:
    """Undiscounted average reward per slot under ``policy``, in bits."""
    _, r_pi = _policy_matrices(model, policy)
    d = stationary_distribution(model, policy, initial)
    return float(d @ r_pi)


def brute_force_optimal(model: MdpModel, gamma: float,
                        initial_state: int = 0) -> tuple[ValueFunction, Policy]:
    """Enumerate every deterministic feasible policy and keep the best.

    The winner maximizes V at ``initial_state`` (ties broken by the total
    value over states) and must dominate every other policy at every state.

    Raises:
        SolverError: More than 12 states, or no policy dominates
    """
    if model.n_states > BRUTE_FORCE_MAX_STATES:
        raise SolverError(
            f"brute force limited to {BRUTE_FORCE_MAX_STATES} states, model has {model.n_states}"
        )
    choices = [np.flatnonzero(row).tolist() for row in model.feasible]
    candidates = []
    for actions in itertools.product(*choices):
        policy = Policy(np.array(actions), name="brute-force")
        candidates.append((policy, policy_evaluation_exact(model, policy, gamma)))

    scale = max(1.0, max(float(np.max(np.abs(v.values))) for _, v in candidates))
    tol = 1e-9 * scale
    top = max(v[initial_state] for _, v in candidates)
    best_policy, best_value = max(
        ((p, v) for p, v in candidates if v[initial_state] >= top - tol),
        key=lambda pv: float(pv[1].values.sum()),
    )
    for policy, value in candidates:
        if np.any(value.values > best_value.values + tol):
            raise SolverError("optimal policy fails to dominate another policy")
    logger.debug("Brute force checked %d policies", len(candidates))
    return best_value, best_policy


def policy_thresholds(model: MdpModel, policy: Policy) -> dict[int, Optional[int]]:
    """Lowest battery level at which ``policy`` backscatters, per gain index.

    Requires a model built from SystemParams (``model.space`` set).
    """
    if model.space is None:
        raise SolverError("policy_thresholds needs a model with a state space")
    space = model.space
    thresholds: dict[int, Optional[int]] = {}
    for g in range(space.n_gains):
        levels = [b for b in range(space.b_c + 1)
                  if policy[space.index(b, g)] == ACTION_BACKSCATTER]
        thresholds[g] = min(levels) if levels else None
    return thresholds


def is_monotone_in_battery(model: MdpModel, policy: Policy) -> bool:
    """True if, for every gain, the policy harvests below its threshold and backscatters from it upward."""
    space = model.space
    for g, threshold in policy_thresholds(model, policy).items():
        if threshold is None:
            continue
        upper = [policy[space.index(b, g)] for b in range(threshold, space.b_c + 1)]
        if any(a != ACTION_BACKSCATTER for a in upper):
            return False
    return True
