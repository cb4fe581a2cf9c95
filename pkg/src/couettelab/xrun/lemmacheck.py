# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import math
from typing import Dict, List, NamedTuple, Optional, Sequence

from tqdm import tqdm

from ..config import config
from ..lemmas import LEMMAS, Box, box_doubling, verify_lemma
from ..multiplier import NormParams
from ..utils import disable_tqdm

# Ratios with this log value are unbounded for any practical purpose
LOG_RATIO_CEILING = 700.0
DOUBLING_GROWTH_LIMIT = 2.0


class LemmaCheckRow(NamedTuple):
    lemma_id: str
    box: str
    max_ratio: float
    log_max_ratio: float
    growth: Optional[float]
    argmax: Dict[str, float]

    @property
    def finite(self) -> bool:
        return math.isfinite(self.log_max_ratio) and self.log_max_ratio < LOG_RATIO_CEILING


def lemma_check(
    lemma_ids: Optional[Sequence[str]] = None,
    box: Optional[Box] = None,
    samples: Optional[int] = None,
    doubling: bool = True,
    params: Optional[NormParams] = None,
) -> List[LemmaCheckRow]:
    """Every registered lemma (or those named) on the standard box, with the doubling growth."""
    lemma_ids = list(lemma_ids) if lemma_ids else sorted(LEMMAS)
    box = box or Box()
    params = params or NormParams.from_config(nu=1e-3)
    samples = samples or config.lemma_samples

    rows = []
    for lemma_id in tqdm(lemma_ids, unit="lemma", desc="checking lemmas", disable=disable_tqdm()):
        growth: Optional[float] = None
        if doubling:
            doubled = box_doubling(lemma_id, box, samples, params)
            report = doubled.base
            growth = doubled.growth
        else:
            report = verify_lemma(lemma_id, box, samples, params)
        rows.append(
            LemmaCheckRow(
                report["lemma_id"],
                report["box"],
                report["max_ratio"],
                report["log_max_ratio"],
                growth,
                report["argmax"],
            )
        )
    return rows
