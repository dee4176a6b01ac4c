"""Episode generation, Monte-Carlo reward estimation, and policy-gradient
training against a black-box registration environment.

The estimator is the sampled likelihood-ratio form: each generated token's
log-probability is weighted by an estimate of the completed sequence's
registration reward.  Intermediate steps estimate that reward by completing
the prefix with ``m`` Monte-Carlo rollouts of the same policy and averaging
the environment's binary feedback; the final step uses the finished name's
feedback directly.  A literal full-enumeration mode (every action at every
step) exists for small test dictionaries.

Registration order is canonical and single-threaded: for each epoch, rollout
completions are registered step-major then episode-major then rollout-minor,
followed by the finished episode names.  All sampling draws come from
counter-based streams keyed on (master seed, epoch, slot, ...), so a run is
a pure function of (seed, config, corpora).
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field, replace

import numpy as np

from . import policy as P
from . import recurrent
from .domains import (DEFAULT_TOKENS, DomainSequence, SeedSpace, State,
                      TokenDict, assemble_fqdn, encode_seed)
from .dnsenv import DnsFeedback
from .errors import ContractError, NumericError, QueryBudgetError
from .rng import stream


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1.0
    batch: int = 32
    mc: int = 4
    length: int = 12
    epochs: int = 300
    reward_mode: str = "binary"
    full_enumeration: bool = False
    tld: str = "com"
    n_layers: int = 1
    d_e: int = 32
    d_h: int = 64

    def __post_init__(self):
        if self.lr <= 0:
            raise ContractError("lr must be positive")
        if self.batch < 1 or self.mc < 1 or self.epochs < 1:
            raise ContractError("batch, mc and epochs must be >= 1")
        if not 7 <= self.length <= 24:
            raise ContractError("episode length must lie in [7, 24]")
        if self.reward_mode not in ("binary", "shaped"):
            raise ContractError(f"unknown reward mode {self.reward_mode!r}")


@dataclass
class EpisodeTrace:
    date: _dt.date
    seed_vec: np.ndarray
    tokens: tuple[int, ...]
    dists: np.ndarray                      # (T, n) action distributions
    domain: DomainSequence
    rewards: np.ndarray | None = None      # (T,) estimated step weights
    feedback: DnsFeedback | None = None

    @property
    def length(self) -> int:
        return len(self.tokens)

    def states(self, n: int) -> list[State]:
        return [State(self.tokens[:t], self.seed_vec, n)
                for t in range(self.length)]


@dataclass
class TrainResult:
    params: P.PolicyParams
    best_params: P.PolicyParams
    curve: list[float]
    best_epoch: int
    queries_used: int
    stopped: str = "epochs"                # epochs | budget | numeric
    registered: list[str] = field(default_factory=list)

    @property
    def best_reward(self) -> float:
        return self.curve[self.best_epoch] if self.curve else 0.0


# ---------------------------------------------------------------------------
# episode generation

def _episode_uniforms(master_seed, epoch, slots, T):
    return np.stack([stream("episode", master_seed, epoch, int(i)).random(T)
                     for i in slots])


def generate_episode(params: P.PolicyParams, date: _dt.date, mode: str,
                     T: int = 12, dct: TokenDict = DEFAULT_TOKENS,
                     master_seed: int = 0, tld: str = "com",
                     space: SeedSpace | None = None) -> EpisodeTrace:
    """One full episode from a date seed; sample or argmax token selection."""
    seed_vec, day_seed = encode_seed(date, dct, space)
    if mode == "sample":
        uniforms = stream("episode", master_seed, day_seed).random(T)[None, :]
    elif mode == "argmax":
        uniforms = None
    else:
        raise ContractError(f"unknown mode {mode!r}")
    run = P.run_batch(params, dct, T, seed_vecs=seed_vec[None, :],
                      uniforms=uniforms, want_dists=True)
    tokens = tuple(int(t) for t in run.tokens[0])
    core = dct.detokenize(tokens)
    dom = DomainSequence(core, assemble_fqdn(core, tld))
    return EpisodeTrace(date, seed_vec, tokens, run.dists[:, 0, :], dom)


def mc_rollouts(params: P.PolicyParams, prefix: State, action: int, m: int,
                T: int, dct: TokenDict = DEFAULT_TOKENS,
                master_seed: int = 0) -> list[DomainSequence]:
    """Complete [prefix, action] m times by sampling the rollout policy.

    Stream j is keyed on (master seed, prefix length, action, j), so each
    rollout is reproducible in isolation.
    """
    t = prefix.t
    if not 0 <= t <= T - 1:
        raise ContractError("prefix must leave room for the action")
    head = prefix.prefix + (int(action),)
    if len(head) == T:
        core = dct.detokenize(head)
        return [DomainSequence(core) for _ in range(m)]
    # replay the consumed inputs (seed, then all but the last head token) to
    # recover the hidden state the rollouts resume from
    x = P.embed_seed(params, np.asarray(prefix.seed_vec)[None, :])
    hidden = P.zero_hidden(params, 1)
    for k in range(len(head)):
        _, hidden, _ = recurrent.stack_step(params.w_x, params.w_h, params.b,
                                            x, hidden)
        x = P.embed_tokens(params, [head[k]])
    suffix_len = T - len(head)
    out = []
    for j in range(m):
        u = stream("mc", master_seed, t, int(action), j).random(suffix_len)
        tiled = [(h.copy(), c.copy()) for h, c in hidden]
        run = P.run_batch(params, dct, T, init_hidden=tiled,
                          first_tokens=[head[-1]], start_pos=len(head),
                          uniforms=u[None, :])
        core = dct.detokenize(head + tuple(int(v) for v in run.tokens[0]))
        out.append(DomainSequence(core))
    return out


def estimate_action_reward(env, params: P.PolicyParams, prefix: State,
                           action: int, cfg: TrainConfig,
                           dct: TokenDict = DEFAULT_TOKENS,
                           master_seed: int = 0) -> float:
    """Mean registration feedback over m completions (direct when final)."""
    T = cfg.length
    rollouts = mc_rollouts(params, prefix, action, cfg.mc, T, dct, master_seed)
    if prefix.t + 1 == T:
        fb = env.register_many([assemble_fqdn(rollouts[0], cfg.tld)])
        return float(fb[0].outcome)
    names = [assemble_fqdn(r, cfg.tld) for r in rollouts]
    out = env.register_many(names)
    return float(np.mean([fb.outcome for fb in out]))


# ---------------------------------------------------------------------------
# policy-gradient updates

def _update_from_batch(params, dct, seed_vecs, tokens, coeffs, lr):
    grads = P.grad_from_coeffs(params, dct, seed_vecs, tokens, coeffs)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in {name}")
    new = P.apply_grads(params, grads, lr)
    P.check_finite(new)
    return new


def policy_gradient_step(params: P.PolicyParams, episodes, cfg: TrainConfig,
                         dct: TokenDict = DEFAULT_TOKENS) -> P.PolicyParams:
    """One ascent step from reward-weighted episodes (batch-averaged)."""
    if not episodes:
        raise ContractError("batch must be nonempty")
    T = episodes[0].length
    if any(ep.length != T for ep in episodes):
        raise ContractError("episodes in a batch must share T")
    B = len(episodes)
    seed_vecs = np.stack([ep.seed_vec for ep in episodes])
    tokens = np.array([ep.tokens for ep in episodes], dtype=np.int64)
    coeffs = np.zeros((T, B, dct.n))
    for i, ep in enumerate(episodes):
        if ep.rewards is None:
            raise ContractError("episodes need estimated rewards")
        coeffs[np.arange(T), i, tokens[i]] = np.asarray(ep.rewards) / B
    return _update_from_batch(params, dct, seed_vecs, tokens, coeffs, cfg.lr)


# ---------------------------------------------------------------------------
# the training loop

def train(env, cfg: TrainConfig, master_seed: int,
          dct: TokenDict = DEFAULT_TOKENS,
          space: SeedSpace | None = None,
          params: P.PolicyParams | None = None,
          whitebox_tap=None, on_epoch=None) -> TrainResult:
    """Feedback-only policy-gradient training.

    Returns the final and best-reward parameters plus the per-epoch mean
    terminal reward curve.  A numeric abort or an exhausted query budget
    stops the loop and leaves the last good checkpoint in place.
    """
    if cfg.reward_mode == "shaped" and whitebox_tap is None:
        raise ContractError("shaped rewards need the white-box tap")
    if cfg.full_enumeration and dct.n > 8:
        raise ContractError("full enumeration is for dictionaries with n <= 8")
    space = space or SeedSpace()
    if params is None:
        params = P.init_params(cfg.n_layers, cfg.d_e, cfg.d_h, dct.n,
                               rng_seed=master_seed, dct=dct)
    T, B = cfg.length, cfg.batch
    curve: list[float] = []
    best_epoch = 0
    best_params = params
    stopped = "epochs"
    registered: list[str] = []

    for epoch in range(cfg.epochs):
        dates = [space.date_at(epoch * B + i) for i in range(B)]
        encoded = [encode_seed(d, dct, space) for d in dates]
        seed_vecs = np.stack([vec for vec, _ in encoded])
        uniforms = _episode_uniforms(master_seed, epoch, range(B), T)
        run = P.run_batch(params, dct, T, seed_vecs=seed_vecs,
                          uniforms=uniforms, want_dists=True,
                          want_snapshots=True)
        tokens = run.tokens
        try:
            if cfg.full_enumeration:
                coeffs, terminal = _enumerated_coeffs(
                    env, params, cfg, dct, master_seed, epoch, seed_vecs,
                    tokens, run)
            else:
                coeffs, terminal = _sampled_coeffs(
                    env, params, cfg, dct, master_seed, epoch, tokens, run,
                    whitebox_tap, registered)
        except QueryBudgetError:
            stopped = "budget"
            break
        curve.append(float(terminal.mean()))
        if curve[-1] > curve[best_epoch] or epoch == 0:
            best_epoch = epoch
            best_params = params
        try:
            params = _update_from_batch(params, dct, seed_vecs, tokens,
                                        coeffs, cfg.lr)
        except NumericError:
            stopped = "numeric"
            params = best_params
            break
        if on_epoch:
            on_epoch(epoch, curve[-1])
    queries = getattr(env, "query_count", 0)
    return TrainResult(params, best_params, curve, best_epoch, queries,
                       stopped, registered)


def _sampled_coeffs(env, params, cfg, dct, master_seed, epoch, tokens, run,
                    whitebox_tap, registered=None):
    """Per-step weights for the taken actions via MC completion estimates."""
    T, B, m = cfg.length, cfg.batch, cfg.mc
    weights = np.zeros((B, T))
    mc_u = [stream("mc-train", master_seed, epoch, i).random((m, T, T))
            for i in range(B)]
    for t in range(T - 1):
        suffix = T - t - 1
        hidden = [(np.repeat(h, m, axis=0), np.repeat(c, m, axis=0))
                  for h, c in run.snapshots[t]]
        first = np.repeat(tokens[:, t], m)
        u = np.stack([mc_u[i][j, t, :suffix]
                      for i in range(B) for j in range(m)])
        ro = P.run_batch(params, dct, T, init_hidden=hidden,
                         first_tokens=first, start_pos=t + 1, uniforms=u)
        full = np.concatenate([np.repeat(tokens[:, :t + 1], m, axis=0),
                               ro.tokens], axis=1)
        names = [assemble_fqdn(dct.detokenize(row), cfg.tld) for row in full]
        feedback = env.register_many(names)
        if registered is not None:
            registered.extend(nm for nm, fb in zip(names, feedback)
                              if fb.outcome == 1)
        vals = _reward_values(feedback, names, cfg, whitebox_tap)
        weights[:, t] = vals.reshape(B, m).mean(axis=1)
    names = [assemble_fqdn(dct.detokenize(row), cfg.tld) for row in tokens]
    feedback = env.register_many(names)
    if registered is not None:
        registered.extend(nm for nm, fb in zip(names, feedback)
                          if fb.outcome == 1)
    terminal = _reward_values(feedback, names, cfg, whitebox_tap)
    weights[:, T - 1] = terminal
    coeffs = np.zeros((T, B, dct.n))
    rows = np.arange(T)
    for i in range(B):
        coeffs[rows, i, tokens[i]] = weights[i] / B
    return coeffs, terminal


def _enumerated_coeffs(env, params, cfg, dct, master_seed, epoch, seed_vecs,
                       tokens, run):
    """Literal enumeration of every action at every step (tiny dicts)."""
    T, B, m = cfg.length, cfg.batch, cfg.mc
    n = dct.n
    coeffs = np.zeros((T, B, n))
    for i in range(B):
        state_seed = seed_vecs[i]
        for t in range(T):
            masked = P.masked_index_at(dct, t, T)
            for a in range(n):
                if a == masked:
                    continue
                prefix = State(tuple(int(v) for v in tokens[i, :t]),
                               state_seed, n)
                r = estimate_action_reward(env, params, prefix, a, cfg, dct,
                                           master_seed=(master_seed, epoch, i))
                coeffs[t, i, a] = run.dists[t, i, a] * r / B
    names = [assemble_fqdn(dct.detokenize(row), cfg.tld) for row in tokens]
    terminal = np.array([fb.outcome for fb in env.register_many(names)],
                        dtype=np.float64)
    return coeffs, terminal


def _reward_values(feedback, names, cfg, whitebox_tap):
    if cfg.reward_mode == "shaped":
        scores = np.asarray(whitebox_tap.score_many(names))
        return scores * np.array([fb.n_factor for fb in feedback])
    return np.array([fb.outcome for fb in feedback], dtype=np.float64)


# ---------------------------------------------------------------------------
# inference-side generation

def candidate_list(params: P.PolicyParams, date: _dt.date, k: int,
                   T: int = 12, dct: TokenDict = DEFAULT_TOKENS,
                   tld: str = "com",
                   space: SeedSpace | None = None) -> list[str]:
    """k deterministic candidates for one date; identical on both sides.

    Candidate 0 is the argmax name; the rest are sampled from streams keyed
    only on (date, index), so any party holding the same parameters and date
    derives the same list.
    """
    seed_vec, day_seed = encode_seed(date, dct, space)
    out = []
    run = P.run_batch(params, dct, T, seed_vecs=seed_vec[None, :])
    out.append(assemble_fqdn(dct.detokenize(run.tokens[0]), tld))
    if k > 1:
        uniforms = np.stack([stream("candidate", day_seed, j).random(T)
                             for j in range(1, k)])
        seeds = np.repeat(seed_vec[None, :], k - 1, axis=0)
        run = P.run_batch(params, dct, T, seed_vecs=seeds, uniforms=uniforms)
        for row in run.tokens:
            out.append(assemble_fqdn(dct.detokenize(row), tld))
    return out


def generate_domains(params: P.PolicyParams, count: int,
                     start_date: _dt.date, T: int = 12,
                     dct: TokenDict = DEFAULT_TOKENS, tld: str = "com",
                     per_date: int = 50, mode: str = "sample",
                     space: SeedSpace | None = None) -> list[str]:
    """Bulk generation: per_date seeded-sample candidates per calendar day.

    argmax mode emits the single deterministic name per date instead.
    """
    space = space or SeedSpace()
    out: list[str] = []
    day = 0
    while len(out) < count:
        date = start_date + _dt.timedelta(days=day)
        if mode == "argmax":
            got = candidate_list(params, date, 1, T, dct, tld, space)
        else:
            got = candidate_list(params, date, per_date + 1, T, dct, tld,
                                 space)[1:]
        out.extend(got[:count - len(out)])
        day += 1
    return out


# ---------------------------------------------------------------------------
# coordinate-wise hyperparameter search

GRID_ORDER = ("n_layers", "d_e", "d_h", "mc", "lr", "batch")
GRID_COLUMNS = ("iteration", "n_layers", "d_e", "d_h", "m", "lr", "batch",
                "reward")


def grid_search(env_factory, hp_space: dict, rng_seed: int,
                base_cfg: TrainConfig,
                dct: TokenDict = DEFAULT_TOKENS) -> tuple[TrainConfig, list]:
    """Coordinate sweep: fix defaults, tune one HP at a time to best reward.

    ``hp_space`` maps config field names to candidate lists; each candidate
    (including the incumbent) costs one training run against a fresh
    environment from ``env_factory``.  Returns the locked-in config and a
    log of rows shaped like GRID_COLUMNS.
    """
    current = base_cfg
    log = []
    run_idx = 0
    iteration = 0
    for hp in GRID_ORDER:
        if hp not in hp_space:
            continue
        iteration += 1
        best_val, best_reward = None, -1.0
        for value in hp_space[hp]:
            cfg = replace(current, **{hp: value})
            result = train(env_factory(), cfg, master_seed=(rng_seed, run_idx),
                           dct=dct)
            reward = result.best_reward
            log.append((iteration, cfg.n_layers, cfg.d_e, cfg.d_h, cfg.mc,
                        cfg.lr, cfg.batch, reward))
            if reward > best_reward:
                best_val, best_reward = value, reward
            run_idx += 1
        current = replace(current, **{hp: best_val})
    return current, log


def grid_log_tsv(log) -> str:
    lines = ["\t".join(GRID_COLUMNS)]
    for row in log:
        lines.append("\t".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)
