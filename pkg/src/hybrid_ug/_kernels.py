"""Numba-compiled numerical kernels shared by the analytics and the simulator.

The Python modules (`dynamics`, `markov`, `sweep`, `simulate`) are thin wrappers
around these kernels, so the sweep harness and single-point queries run exactly
the same floating-point code. Everything selection-related is carried in log
space: at beta = 100 the rate-ratio products reach e^(+-5000) and stationary
masses can be as small as e^(-600), far beyond double range in linear space.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Exponent clamp for the Fermi rule: exp(700) is near the double ceiling, and
# clamping preserves the 0/1 strong-selection limits to ~1e-304.
_EXP_CLAMP = 700.0

# log-fixation sentinel for a 0/0 rate ratio (the formula does not apply).
LOG_RHO_UNDEFINED = np.nan


@njit(cache=True)
def fermi_kernel(pi_self, pi_model, beta):
    x = -beta * (pi_model - pi_self)
    if x > _EXP_CLAMP:
        x = _EXP_CLAMP
    elif x < -_EXP_CLAMP:
        x = -_EXP_CLAMP
    return 1.0 / (1.0 + math.exp(x))


@njit(cache=True)
def proposer_rates_kernel(k_p, k_r, n_p, n_r, m_p, m_r, h, l, beta, disc):
    """(T+, T-) for the High-proposer count, receiver population frozen at k_r."""
    pi_hp = 1.0 - h
    pi_lp = (1.0 - l) * (n_r - k_r) / (n_r + m_r)
    f_up = fermi_kernel(pi_lp, pi_hp, beta)
    f_down = fermi_kernel(pi_hp, pi_lp, beta)
    denom = n_p + m_p
    if disc:
        alpha = (k_r + m_r) / (n_r + m_r)
        t_plus = (n_p - k_p) / n_p * (k_p + alpha * m_p) / denom * f_up
        t_minus = k_p / n_p * (n_p - k_p + (1.0 - alpha) * m_p) / denom * f_down
    else:
        t_plus = (n_p - k_p) / n_p * (k_p + m_p) / denom * f_up
        t_minus = k_p / n_p * (n_p - k_p) / denom * f_down
    return t_plus, t_minus


@njit(cache=True)
def receiver_rates_kernel(k_r, k_p, n_p, n_r, m_p, m_r, h, l, beta, disc):
    """(T+, T-) for the High-receiver count, proposer population frozen at k_p."""
    denom_p = n_p + m_p
    pi_hr = h * (k_p + m_p) / denom_p
    if disc:
        pi_lr = (h * k_p + l * (n_p - k_p + m_p)) / denom_p
    else:
        pi_lr = (h * (k_p + m_p) + l * (n_p - k_p)) / denom_p
    f_up = fermi_kernel(pi_lr, pi_hr, beta)
    f_down = fermi_kernel(pi_hr, pi_lr, beta)
    denom = n_r + m_r
    t_plus = (n_r - k_r) / n_r * (k_r + m_r) / denom * f_up
    t_minus = k_r / n_r * (n_r - k_r) / denom * f_down
    return t_plus, t_minus


@njit(cache=True)
def fixation_log_kernel(
    role_proposer, mutant_high, opp_k, n_p, n_r, m_p, m_r, h, l, beta, disc
):
    """log of the fixation probability of a single mutant, opposing side frozen.

    Evaluates rho = 1 / (1 + sum_i prod_{j<=i} T-(j)/T+(j)) as
    log rho = -(shift + log sum exp(cum_i - shift)), where cum_i are the
    cumulative log rate-ratios and shift their maximum (>= 0 because the i = 0
    term contributes log 1). For a Low mutant the chain is reflected so that j
    counts mutants: T~+(j) = T-(N-j), T~-(j) = T+(N-j).

    Returns log rho <= 0, -inf when the mutant can never advance (some
    T+(j) = 0 with T-(j) > 0), or NaN when some ratio is 0/0.
    """
    n = n_p if role_proposer else n_r
    logs = np.empty(n)
    logs[0] = 0.0
    cum = 0.0
    for j in range(1, n):
        k = j if mutant_high else n - j
        if role_proposer:
            tp, tm = proposer_rates_kernel(
                k, opp_k, n_p, n_r, m_p, m_r, h, l, beta, disc
            )
        else:
            tp, tm = receiver_rates_kernel(
                k, opp_k, n_p, n_r, m_p, m_r, h, l, beta, disc
            )
        if not mutant_high:
            tp, tm = tm, tp
        if tp == 0.0:
            if tm == 0.0:
                return LOG_RHO_UNDEFINED
            return -np.inf
        if tm == 0.0:
            cum = -np.inf
        elif cum > -np.inf:
            cum += math.log(tm) - math.log(tp)
        logs[j] = cum
    shift = 0.0
    for j in range(1, n):
        if logs[j] > shift:
            shift = logs[j]
    total = 0.0
    for j in range(n):
        total += math.exp(logs[j] - shift)
    return -(shift + math.log(total))


@njit(cache=True)
def edge_log_weights_kernel(n_p, n_r, m_p, m_r, h, l, beta, disc, edges):
    """log rho for every directed one-coordinate edge of the reduced chain.

    `edges` rows are (i, j, role_proposer, mutant_high, opp_high); the result
    is a 4x4 matrix with log rho(i -> j) on those entries and -inf elsewhere.
    Returns (logw, ok); ok = False when some fixation is undefined (0/0).
    """
    logw = np.full((4, 4), -np.inf)
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        role_proposer = edges[e, 2] == 1
        mutant_high = edges[e, 3] == 1
        opp_high = edges[e, 4] == 1
        if role_proposer:
            opp_k = n_r if opp_high else 0
        else:
            opp_k = n_p if opp_high else 0
        lr = fixation_log_kernel(
            role_proposer, mutant_high, opp_k, n_p, n_r, m_p, m_r, h, l, beta, disc
        )
        if math.isnan(lr):
            return logw, False
        logw[i, j] = lr
    return logw, True


@njit(cache=True)
def matrix_from_log_weights_kernel(logw):
    """Row-stochastic 4x4 matrix: off-diagonals rho(i->j)/2, diagonal remainder.

    Entries below the double underflow threshold come out as exact zeros; the
    stationary solver therefore works from `logw`, not from this matrix.
    """
    lam = np.zeros((4, 4))
    for i in range(4):
        off = 0.0
        for j in range(4):
            if i != j and logw[i, j] > -np.inf:
                lam[i, j] = math.exp(logw[i, j]) / 2.0
                off += lam[i, j]
        lam[i, i] = 1.0 - off
    return lam


@njit(cache=True)
def stationary_tree_kernel(logw, trees):
    """Stationary distribution via the Markov-chain tree theorem, in log space.

    pi_i is proportional to the sum over spanning in-trees rooted at i of the
    product of directed edge weights. The reduced chain is a 4-cycle, so each
    root has exactly 4 in-trees of 3 edges each (`trees` holds the edge lists).
    The uniform 1/2 mutation-placement factor cancels in the normalization.

    Working in log space resolves stationary ratios like e^(-600) that
    underflow any linear-space solver at strong selection.

    Returns (pi, ok); ok = False when every tree has weight zero, i.e. the
    chain splits into several closed classes and the fixed vector is not
    unique.
    """
    scores = np.empty(4)
    for r in range(4):
        tree_logs = np.empty(4)
        for t in range(4):
            s = 0.0
            for k in range(3):
                s += logw[trees[r, t, k, 0], trees[r, t, k, 1]]
            tree_logs[t] = s
        m = tree_logs[0]
        for t in range(1, 4):
            if tree_logs[t] > m:
                m = tree_logs[t]
        if m == -np.inf:
            scores[r] = -np.inf
        else:
            acc = 0.0
            for t in range(4):
                acc += math.exp(tree_logs[t] - m)
            scores[r] = m + math.log(acc)
    shift = scores[0]
    for r in range(1, 4):
        if scores[r] > shift:
            shift = scores[r]
    pi = np.zeros(4)
    if shift == -np.inf:
        return pi, False
    total = 0.0
    for r in range(4):
        pi[r] = math.exp(scores[r] - shift)
        total += pi[r]
    for r in range(4):
        pi[r] /= total
    return pi, True


@njit(cache=True)
def grid_point_kernel(n_p, n_r, m_p, m_r, h, l, beta, disc, edges, trees):
    """Stationary distribution of one parameter point.

    Returns (pi, status): status 0 = ok, 1 = degenerate (pi is all zeros and
    must be resolved by the caller), 2 = undefined fixation.
    """
    logw, ok = edge_log_weights_kernel(n_p, n_r, m_p, m_r, h, l, beta, disc, edges)
    if not ok:
        return np.zeros(4), 2
    pi, ok = stationary_tree_kernel(logw, trees)
    if not ok:
        return pi, 1
    return pi, 0


@njit(cache=True)
def grid_chunk_kernel(n_p, n_r, m_ps, m_rs, hs, ls, betas, disc, edges, trees):
    """Vector of grid points -> stationary masses and status codes."""
    npts = m_ps.shape[0]
    pis = np.empty((npts, 4))
    status = np.empty(npts, dtype=np.int64)
    for i in range(npts):
        pi, st = grid_point_kernel(
            n_p, n_r, m_ps[i], m_rs[i], hs[i], ls[i], betas[i], disc, edges, trees
        )
        pis[i] = pi
        status[i] = st
    return pis, status


@njit(cache=True)
def fixation_trial_kernel(
    seed, role_proposer, mutant_high, opp_k, n_p, n_r, m_p, m_r, h, l, beta, disc,
    max_steps,
):
    """One agent-based fixation race with the opposing population frozen.

    Starts from a single mutant among the humans of the focal role. Per step a
    uniformly random human learner picks a role model uniformly from the full
    role population (humans + same-role AI; a Discriminatory AI proposer is
    perceived as High with probability alpha, resampled per event) and copies
    it with the Fermi probability. Returns 1 on fixation, 0 on extinction,
    -1 on timeout.
    """
    np.random.seed(seed)
    n = n_p if role_proposer else n_r
    m = m_p if role_proposer else m_r
    # Focal-role payoffs depend only on the frozen opposing count.
    if role_proposer:
        pi_h = 1.0 - h
        pi_l = (1.0 - l) * (n_r - opp_k) / (n_r + m_r)
    else:
        denom_p = n_p + m_p
        pi_h = h * (opp_k + m_p) / denom_p
        if disc:
            pi_l = (h * opp_k + l * (n_p - opp_k + m_p)) / denom_p
        else:
            pi_l = (h * (opp_k + m_p) + l * (n_p - opp_k)) / denom_p
    f_to_high = fermi_kernel(pi_l, pi_h, beta)  # Low learner adopts High model
    f_to_low = fermi_kernel(pi_h, pi_l, beta)
    ai_always_high = not (disc and role_proposer)
    ai_high_prob = 1.0
    if not ai_always_high:
        ai_high_prob = (opp_k + m_r) / (n_r + m_r)
    k = 1 if mutant_high else n - 1  # count of High humans
    for _ in range(max_steps):
        learner_high = np.random.randint(n) < k
        model_idx = np.random.randint(n + m)
        if model_idx < k:
            model_high = True
        elif model_idx < n:
            model_high = False
        elif ai_always_high:
            model_high = True
        else:
            model_high = np.random.random() < ai_high_prob
        if model_high == learner_high:
            continue
        if learner_high:
            if np.random.random() < f_to_low:
                k -= 1
        else:
            if np.random.random() < f_to_high:
                k += 1
        if k == 0 or k == n:
            fixed = (k == n) == mutant_high
            return 1 if fixed else 0
    return -1


@njit(cache=True)
def fixation_trials_kernel(
    seeds, role_proposer, mutant_high, opp_k, n_p, n_r, m_p, m_r, h, l, beta, disc,
    max_steps,
):
    """Runs one trial per seed; returns (fixed, absorbed, timed_out) counts."""
    fixed = 0
    absorbed = 0
    timed_out = 0
    for t in range(seeds.shape[0]):
        out = fixation_trial_kernel(
            seeds[t], role_proposer, mutant_high, opp_k,
            n_p, n_r, m_p, m_r, h, l, beta, disc, max_steps,
        )
        if out < 0:
            timed_out += 1
        else:
            absorbed += 1
            fixed += out
    return fixed, absorbed, timed_out


@njit(cache=True)
def long_run_kernel(seed, n_p, n_r, m_p, m_r, h, l, beta, disc, mu, max_steps):
    """Two-population Moran process with mutation; monomorphic-corner occupancy.

    Each event picks one of the two roles uniformly, then a uniformly random
    human learner of that role. With probability mu the learner adopts a
    uniformly random strategy of its role (self-mutation included); otherwise
    it imitates as in the fixation kernel. Steps after the burn-in
    (max_steps // 10) where both human populations are monomorphic are counted
    per corner (order HH, HL, LH, LL).

    Returns (corner_counts[4], monomorphic_steps, recorded_steps).
    """
    np.random.seed(seed)
    k_p = np.random.randint(n_p + 1)
    k_r = np.random.randint(n_r + 1)
    counts = np.zeros(4, dtype=np.int64)
    mono = 0
    burn_in = max_steps // 10
    recorded = 0
    for step in range(max_steps):
        update_proposer = np.random.random() < 0.5
        if update_proposer:
            n, m, k = n_p, m_p, k_p
        else:
            n, m, k = n_r, m_r, k_r
        learner_high = np.random.randint(n) < k
        if mu > 0.0 and np.random.random() < mu:
            new_high = np.random.randint(2) == 0
            if new_high != learner_high:
                k += 1 if new_high else -1
        else:
            model_idx = np.random.randint(n + m)
            if model_idx < k:
                model_high = True
            elif model_idx < n:
                model_high = False
            elif disc and update_proposer:
                alpha = (k_r + m_r) / (n_r + m_r)
                model_high = np.random.random() < alpha
            else:
                model_high = True
            if model_high != learner_high:
                if update_proposer:
                    pi_h = 1.0 - h
                    pi_l = (1.0 - l) * (n_r - k_r) / (n_r + m_r)
                else:
                    denom_p = n_p + m_p
                    pi_h = h * (k_p + m_p) / denom_p
                    if disc:
                        pi_l = (h * k_p + l * (n_p - k_p + m_p)) / denom_p
                    else:
                        pi_l = (h * (k_p + m_p) + l * (n_p - k_p)) / denom_p
                if learner_high:
                    f = fermi_kernel(pi_h, pi_l, beta)
                    if np.random.random() < f:
                        k -= 1
                else:
                    f = fermi_kernel(pi_l, pi_h, beta)
                    if np.random.random() < f:
                        k += 1
        if update_proposer:
            k_p = k
        else:
            k_r = k
        if step >= burn_in:
            recorded += 1
            p_mono = k_p == 0 or k_p == n_p
            r_mono = k_r == 0 or k_r == n_r
            if p_mono and r_mono:
                mono += 1
                idx = (0 if k_p == n_p else 2) + (0 if k_r == n_r else 1)
                counts[idx] += 1
    return counts, mono, recorded
