"""Scoring: per-step shaped rewards, family scores, and ask diagnostics.

Everything here is a pure function over logged values; nothing touches
engine state.  The per-step reward blends a team-HP term with a
normalized damage term; family scores cover the four task families
(steps+reward, remaining cycles, budgeted elimination score, and the
HP-depletion/time composite); the ask diagnostics quantify how often an
agent asked for guidance and what each ask was worth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

TEAM_SIZE = 4
PF_AV_MAX = 450.0
ASK_OPPORTUNITIES_DEFAULT = 8


def sign(x: float) -> float:
    """Three-valued sign with sign(0) = 0."""
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def round_half_up(x: float, digits: int = 1) -> float:
    """Reporting round: one-decimal half-up unless told otherwise."""
    q = Decimal(10) ** -digits
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


# ---------------------------------------------------------------------------
# Per-step reward
# ---------------------------------------------------------------------------

@dataclass
class HpSnapshot:
    """Normalized team HP at one decision step.

    ``h_hat`` is hp/max_hp per ally in team-slot order; ``dh`` is the
    change since the previous step and ``dh_prev`` the change before
    that.  Components live in [0, 1] and [-1, 1] respectively.
    """

    h_hat: tuple[float, float, float, float]
    dh: tuple[float, float, float, float]
    dh_prev: tuple[float, float, float, float]


def step_reward(snap: HpSnapshot, d_hat: float) -> tuple[float, float]:
    """Compute (hp term, combined step reward) for one decision.

    The HP term forecasts each ally's health by extrapolating the
    previous step's change.  When the team is forecast safe, or when any
    ally just lost health, the reward tracks how the latest change runs
    against that forecast (rewarding timely heals and penalizing fresh
    damage); otherwise it tracks distance from half health.  The scalar
    is the mean over the four allies, and the step reward averages it
    with the normalized damage dealt.
    """
    forecast = [h + dp for h, dp in zip(snap.h_hat, snap.dh_prev)]
    team_safe = all(sign(f) >= 0 for f in forecast)
    hp_dropped = not all(sign(d) >= 0 for d in snap.dh)
    # Boolean blend a + b - a*b: either condition switches to trend mode.
    trend_mode = 1.0 if (team_safe or hp_dropped) else 0.0

    half_margin = [h - 0.5 for h in snap.h_hat]
    counter_trend = [-sign(f) * d for f, d in zip(forecast, snap.dh)]
    blended = [
        (1.0 - trend_mode) * hm + trend_mode * ct
        for hm, ct in zip(half_margin, counter_trend)
    ]
    r_hp = sum(-sign(f) * b for f, b in zip(forecast, blended)) / TEAM_SIZE
    r_t = 0.5 * r_hp + 0.5 * d_hat
    return r_hp, r_t


@dataclass
class StepRewardRecord:
    t: int
    r_hp: float
    r_dmg: float
    r_t: float

    def to_dict(self) -> dict:
        return {"t": self.t, "r_hp": self.r_hp, "r_dmg": self.r_dmg, "r_t": self.r_t}


@dataclass
class RewardTrace:
    """Per-step reward records plus the fixed 0-100 calibration anchors."""

    r_min: float
    r_max: float
    records: list[StepRewardRecord] = field(default_factory=list)

    def append(self, t: int, r_hp: float, d_hat: float) -> StepRewardRecord:
        rec = StepRewardRecord(t=t, r_hp=r_hp, r_dmg=d_hat, r_t=0.5 * r_hp + 0.5 * d_hat)
        self.records.append(rec)
        return rec

    @property
    def total(self) -> float:
        return sum(rec.r_t for rec in self.records)


def episode_reward(trace: RewardTrace) -> float:
    """Map the summed step rewards onto the unified 0-100 scale."""
    span = trace.r_max - trace.r_min
    frac = (trace.total - trace.r_min) / span
    return 100.0 * min(1.0, max(0.0, frac))


# ---------------------------------------------------------------------------
# Family scores
# ---------------------------------------------------------------------------

def moc_cycles(av_used: float) -> int:
    """Cycles consumed: the first cycle spans 150 AV, each later one 100."""
    if av_used < 0:
        raise ValueError("av_used must be nonnegative")
    first = 1 if av_used >= 150.0 else 0
    return first + max(0, math.floor((av_used - 150.0) / 100.0))


def moc_score(c_max: int, c_used: int) -> int:
    """Remaining cycles, floored at zero."""
    return max(0, c_max - c_used)


def pf_score(events: list[tuple[float, float]], av_max: float = PF_AV_MAX) -> float:
    """Total elimination points earned inside the AV budget."""
    return sum(points for av_stamp, points in events if av_stamp <= av_max)


def as_score(
    hp_depleted_pct: float,
    av_rem: float,
    weights: tuple[float, float] = (30.0, 2.0),
) -> float:
    """Composite of boss HP depletion (percent) and a remaining-AV bonus."""
    w_hp, w_av = weights
    return w_hp * hp_depleted_pct + w_av * av_rem


@dataclass
class FamilyScore:
    """The family-specific headline result of one episode."""

    family: str
    t_steps: float | None = None        # math.inf on failure
    r_scaled: float | None = None
    c_used: int | None = None
    c_max: int | None = None
    s_moc: int | None = None
    s_pf: float | None = None
    s_as: float | None = None
    hp_depleted_pct: float | None = None
    av_rem: float | None = None

    def headline(self, step_budget: int = 0) -> float:
        """Scalar score used for episode-to-episode comparisons.

        Single-boss episodes compare on negated steps so that fewer
        decisions scores higher; failures take a finite sentinel just
        below every possible success so differences stay finite.
        """
        if self.family == "eow":
            if self.t_steps is None or math.isinf(self.t_steps):
                return -(step_budget + 1)
            return -self.t_steps
        if self.family == "moc":
            return float(self.s_moc if self.s_moc is not None else 0)
        if self.family == "pf":
            return float(self.s_pf if self.s_pf is not None else 0.0)
        return float(self.s_as if self.s_as is not None else 0.0)

    def to_dict(self) -> dict:
        out: dict = {"family": self.family}
        for key in (
            "t_steps", "r_scaled", "c_used", "c_max", "s_moc",
            "s_pf", "s_as", "hp_depleted_pct", "av_rem",
        ):
            value = getattr(self, key)
            if value is not None:
                out[key] = "inf" if value == math.inf else value
        return out


# ---------------------------------------------------------------------------
# Ask diagnostics
# ---------------------------------------------------------------------------

@dataclass
class AskRecord:
    task_id: int
    k: int          # 1-based episode index within the task, ordered by time
    asked: bool
    score: float    # task score S (negated steps for single-boss tasks)


@dataclass
class AskLedger:
    entries: list[AskRecord] = field(default_factory=list)
    opportunities: int = ASK_OPPORTUNITIES_DEFAULT  # T, asks allowed per evaluation

    def add(self, task_id: int, k: int, asked: bool, score: float) -> None:
        self.entries.append(AskRecord(task_id, k, asked, score))


@dataclass
class AskMetrics:
    ar: float            # ask rate, percent
    effect: float        # mean score uplift per asked episode with a predecessor
    efficiency: float    # effect normalized by expected ask count
    n: int
    m: int
    effect_defined: bool


def efficiency(ar: float, effect: float, opportunities: int = ASK_OPPORTUNITIES_DEFAULT) -> float:
    """Effect normalized by the expected number of asks (T * AR / 100)."""
    if ar == 0:
        return 0.0
    return effect / (opportunities * ar / 100.0)


def ask_metrics(ledger: AskLedger) -> AskMetrics:
    """Aggregate ask rate, per-ask effect, and efficiency from a ledger.

    Episodes must be ordered by k within each task.  The effect averages
    the score difference against the immediately preceding episode of
    the same task, over asked episodes that have a predecessor.
    """
    entries = sorted(ledger.entries, key=lambda e: (e.task_id, e.k))
    n = len(entries)
    if n == 0:
        return AskMetrics(0.0, 0.0, 0.0, 0, 0, False)

    ar = 100.0 * sum(1 for e in entries if e.asked) / n

    prev: dict[int, AskRecord] = {}
    deltas: list[float] = []
    for e in entries:
        p = prev.get(e.task_id)
        if e.asked and p is not None and e.k > 1:
            deltas.append(e.score - p.score)
        prev[e.task_id] = e

    m = len(deltas)
    effect_defined = m > 0
    effect = sum(deltas) / m if effect_defined else 0.0
    eff = efficiency(ar, effect, ledger.opportunities)
    return AskMetrics(ar, effect, eff, n, m, effect_defined)
