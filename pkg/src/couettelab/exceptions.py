# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

from typing import Optional


class GridError(Exception):
    pass


class GridSpecError(GridError):
    def __init__(self, name: str, value: object, reason: str) -> None:
        super().__init__()
        self.name = name
        self.value = value
        self.reason = reason

    def __str__(self) -> str:
        return f"Invalid grid {self.name}: '{self.value}', {self.reason}"


class FrameError(GridError):
    def __init__(self, expected: str, actual: str) -> None:
        super().__init__()
        self.expected = expected
        self.actual = actual

    def __str__(self) -> str:
        return f"Field is in {self.actual} frame, {self.expected} frame required"


class RemapAlignmentError(GridError):
    def __init__(self, t: float, t_remap: float, period: float) -> None:
        super().__init__()
        self.t = t
        self.t_remap = t_remap
        self.period = period

    def __str__(self) -> str:
        return (
            f"Remap at t={self.t} is not aligned, t - t_remap={self.t - self.t_remap} "
            f"must be a multiple of {self.period}"
        )


class SnapshotFormatError(GridError):
    def __init__(self, filename: str, reason: str) -> None:
        super().__init__()
        self.filename = filename
        self.reason = reason

    def __str__(self) -> str:
        return f"Snapshot file '{self.filename}' is invalid: {self.reason}"


class NormRangeError(Exception):
    def __init__(self, name: str, log_value: float) -> None:
        super().__init__()
        self.name = name
        self.log_value = log_value

    def __str__(self) -> str:
        return f"{self.name} overflows (log value {self.log_value:.6g}), reduce the weight"


class MultiplierDomainError(Exception):
    def __init__(self, k: int, eta: float) -> None:
        super().__init__()
        self.k = k
        self.eta = eta

    def __str__(self) -> str:
        return f"No critical interval for k={self.k}, eta={self.eta}"


class ProfileRangeError(Exception):
    def __init__(self, eta: float, eta_max: float) -> None:
        super().__init__()
        self.eta = eta
        self.eta_max = eta_max

    def __str__(self) -> str:
        return f"Frequency |eta|={abs(self.eta)} is outside the profile range (max {self.eta_max})"


class UnknownLemmaError(Exception):
    def __init__(self, lemma_id: str) -> None:
        super().__init__()
        self.lemma_id = lemma_id

    def __str__(self) -> str:
        return f"Unregistered lemma: '{self.lemma_id}'"


class ModeStateError(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__()
        self.reason = reason

    def __str__(self) -> str:
        return self.reason


class FitError(Exception):
    def __init__(self, model: str, reason: str) -> None:
        super().__init__()
        self.model = model
        self.reason = reason

    def __str__(self) -> str:
        return f"Cannot fit {self.model} model: {self.reason}"


class InvertibilityError(Exception):
    def __init__(self, t: float, grad_norm: float, min_det: Optional[float] = None) -> None:
        super().__init__()
        self.t = t
        self.grad_norm = grad_norm
        self.min_det = min_det

    def __str__(self) -> str:
        msg = f"Coordinate transform not invertible at t={self.t}: |grad C|={self.grad_norm:.4g}"
        if self.min_det is not None:
            msg += f", min det={self.min_det:.4g}"
        return msg


class FixedPointError(Exception):
    def __init__(self, iterations: int, residual: float) -> None:
        super().__init__()
        self.iterations = iterations
        self.residual = residual

    def __str__(self) -> str:
        return (
            f"Inverse map did not converge after {self.iterations} iterations "
            f"(residual {self.residual:.3g})"
        )


class BlowUpError(Exception):
    def __init__(self, t: float, where: str) -> None:
        super().__init__()
        self.t = t
        self.where = where

    def __str__(self) -> str:
        return f"Blow-up in {self.where} at t={self.t}"


class CflError(Exception):
    def __init__(self, t: float, dt: float, retries: int) -> None:
        super().__init__()
        self.t = t
        self.dt = dt
        self.retries = retries

    def __str__(self) -> str:
        return f"CFL violation at t={self.t}, dt={self.dt:.3g} after {self.retries} retries"


class NormParamsError(Exception):
    def __init__(self, name: str, value: object, reason: str) -> None:
        super().__init__()
        self.name = name
        self.value = value
        self.reason = reason

    def __str__(self) -> str:
        return f"Invalid norm parameter {self.name}: '{self.value}', {self.reason}"
