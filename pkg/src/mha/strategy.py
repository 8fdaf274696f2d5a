"""The Minimax Histogram based Aggregation round loop.

Each round: experts predict from the past, the two WAA mixtures produce
``(y_n, lam_n)``, the observation is revealed, and every expert is charged
``l(y_e, lam_n, x_n)`` on the decision side and ``l(y_n, lam_e, x_n)`` on the
dual side.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Iterable, Optional

import numpy as np

from .core import LossSpec, ProblemGeometry
from .experts import (ExpertId, ExpertState, build_experts, expert_predict, make_expert,
                      prior_weights, update_cumulative)
from .partition import PartitionFamily
from .waa import aggregate, entropy, update_weights


@dataclass(frozen=True)
class RoundRecord:
    n: int
    y: np.ndarray
    lam: float
    u: float
    c: float
    l: float
    avg_u: float
    avg_c: float
    best_expert_avg_l: float
    entropy_y: float


class MHA:
    """Online constrained predictor aggregating histogram experts.

    ``shadow`` experts are run on the same sequence and scored, but take no
    part in the mixture; they serve as single-expert comparison strategies.
    """

    def __init__(self, geometry: ProblemGeometry, spec: LossSpec, K: int = 5, H: int = 5,
                 tol: float = 1e-6, max_iters: int = 10_000,
                 experts: Optional[list[ExpertState]] = None,
                 shadow: Iterable[ExpertId] = ()):
        self.geometry = geometry
        self.spec = spec
        self.tol = tol
        self.max_iters = max_iters
        self.experts = experts if experts is not None else build_experts(K, H, geometry)
        self.alphas = prior_weights([e.id for e in self.experts])
        family = PartitionFamily.from_geometry(geometry)
        pool = {e.id for e in self.experts}
        self.shadow = [make_expert(e, geometry, family) for e in shadow if e not in pool]
        self.history: list[np.ndarray] = []
        self.n = 0
        self.sum_u = self.sum_c = self.sum_l = 0.0
        self.sum_lam = 0.0
        self._pending = None

    @property
    def ids(self) -> list[ExpertId]:
        return [e.id for e in self.experts]

    def all_experts(self) -> list[ExpertState]:
        return self.experts + self.shadow

    def expert(self, eid: ExpertId) -> ExpertState:
        for e in self.all_experts():
            if e.id == eid:
                return e
        raise KeyError(str(eid))

    def weights(self):
        L_y = np.array([e.cum_y for e in self.experts])
        L_lam = np.array([e.cum_lambda for e in self.experts])
        return (update_weights(L_y, self.alphas, self.n, "y"),
                update_weights(L_lam, self.alphas, self.n, "lambda"))

    def predict(self):
        """Aggregate prediction ``(y, lam)`` for round ``n + 1``."""
        rnd = self.n + 1
        preds = [expert_predict(e, self.history, rnd, self.geometry, self.spec,
                                self.tol, self.max_iters) for e in self.all_experts()]
        p_y, p_lam = self.weights()
        k = len(self.experts)
        y, lam = aggregate([p[0] for p in preds[:k]], [p[1] for p in preds[:k]], p_y, p_lam)
        self._pending = (y, lam, preds, p_y)
        return y, lam

    def update(self, x) -> RoundRecord:
        """Reveal ``x`` for the current round and do all loss and weight bookkeeping."""
        x = self.geometry.check_observation(x)
        if self._pending is None:
            self.predict()
        y, lam, preds, p_y = self._pending
        self._pending = None
        gamma = self.geometry.gamma
        spec = self.spec
        X = x[None, :]

        u = float(spec.main(y, X)[0])
        c = float(spec.constraint(y, X)[0])
        l = u + lam * (c - gamma)
        for e, (ye, lame) in zip(self.all_experts(), preds):
            ue = float(spec.main(ye, X)[0])
            ce = float(spec.constraint(ye, X)[0])
            update_cumulative(e, ue + lam * (ce - gamma), u + lame * (c - gamma))
            e.own_u += ue
            e.own_c += ce
            e.own_l += ue + lame * (ce - gamma)
            e.own_lambda += lame
            e.observe(x)
        self.history.append(x)
        self.n += 1
        self.sum_u += u
        self.sum_c += c
        self.sum_l += l
        self.sum_lam += lam
        best = min(e.cum_y for e in self.experts) / self.n
        return RoundRecord(self.n, y, lam, u, c, l, self.sum_u / self.n, self.sum_c / self.n,
                           best, entropy(p_y))

    def step(self, x) -> RoundRecord:
        self.predict()
        return self.update(x)

    def run(self, X) -> list[RoundRecord]:
        return [self.step(x) for x in np.asarray(X, dtype=float)]

    def regret_gaps(self) -> dict:
        """``sqrt(N)``-scaled WAA gaps on both sides against the best pool expert."""
        N = self.n
        avg_l = self.sum_l / N
        best_y = min(e.cum_y for e in self.experts) / N
        best_lam = max(e.cum_lambda for e in self.experts) / N
        root = math.sqrt(N)
        return {"y": root * (avg_l - best_y), "lambda": root * (best_lam - avg_l)}
