# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026


class RunConfigError(Exception):
    def __init__(self, key: str, value: object, reason: str) -> None:
        super().__init__()
        self.key = key
        self.value = value
        self.reason = reason

    def __str__(self) -> str:
        return f"Run config '{self.key}': '{self.value}' {self.reason}"


class ConfigHashMismatchError(Exception):
    def __init__(self, path: str, expected: str, actual: str) -> None:
        super().__init__()
        self.path = path
        self.expected = expected
        self.actual = actual

    def __str__(self) -> str:
        return (
            f"Output directory '{self.path}' belongs to config {self.actual[:12]}, "
            f"expected {self.expected[:12]}"
        )


class TruncatedSeriesError(Exception):
    def __init__(self, t_end: float, t_required: float) -> None:
        super().__init__()
        self.t_end = t_end
        self.t_required = t_required

    def __str__(self) -> str:
        return f"Series ends at t={self.t_end:.6g}, needs to reach t={self.t_required:.6g}"
