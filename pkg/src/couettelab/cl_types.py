# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

from enum import Enum
from typing import NewType

ConfigHash = NewType("ConfigHash", str)
LemmaId = NewType("LemmaId", str)


class Frame(Enum):
    LAB = 0
    SHEAR = 1


class Component(Enum):
    Q = "Q"
    ONE = "1"
    TWO = "2"
    THREE = "3"
    C = "C"


class FitModel(Enum):
    POWER_LAW = "power_law"
    CUBIC_EXP = "cubic_exp"
    LINEAR = "linear"


class ToyVariant(Enum):
    BALANCED = "balanced"
    UNBALANCED = "unbalanced"


class Kp(Enum):
    """Which x-frequency drives the dissipation of the Q2_kp amplitude."""

    AS_PRINTED = "as_printed"
    PRIMED = "primed"


class Laplacian(Enum):
    TILDE = "tilde"
    FULL = "full"


class Classification(Enum):
    RELAMINARIZING = "relaminarizing"
    STREAK_DOMINATED = "streak-dominated"
    NONLINEAR_ESCAPE = "nonlinear-escape"
    BLOW_UP_EVENT = "blow-up-event"


class ExperimentKind(Enum):
    LINEAR = "linear"
    STREAK = "streak"
    TOY = "toy"
    COORDS = "coords"
    DNS = "dns"
    SWEEP = "sweep"
    RATE_STUDY = "rate-study"


class RateKind(Enum):
    LIFT_UP = "lift_up"
    INVISCID_DAMPING = "inviscid_damping"
    ENHANCED_DISSIPATION = "enhanced_dissipation"


class NormKind(Enum):
    A = "A"
    TILDE = "A_tilde"
    NU = "A_nu"
