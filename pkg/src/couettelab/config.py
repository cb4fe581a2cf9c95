# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import importlib.resources as pkg_resources
import os
import sys
from typing import Any, TextIO

import yaml
from colorama import Fore

from .constants import COUETTELAB_PATH, ERROR


class Config:
    COUETTELAB_CONFIG = "couettelab.conf"

    DEFAULT_CONFIG = {
        "kappa": 8.0,
        "lambda_0": 1.0,
        "lambda_prime": 0.5,
        "delta_lambda": 0.01,
        "s": 0.6,
        "alpha": 10,
        "delta_1": 0.01,
        "dealias": 2.0 / 3.0,
        "cfl": 0.5,
        "max_step_retries": 10,
        "fft_workers": 1,
        "streak_decay": 1.0e-4,
        "streak_growth": 3.0,
        "escape_rebound": 10.0,
        "relaminar_energy": 1.0e-2,
        "remap_loss_limit": 0.1,
        "toy_rtol": 1.0e-9,
        "toy_blowup_factor": 1.0e5,
        "toy_allowance": 10.0,
        "invertibility_limit": 0.5,
        "fixed_point_tol": 1.0e-12,
        "fixed_point_max_iter": 50,
        "lemma_samples": 4000,
        "lemma_seed": 20160901,
    }

    def __init__(self) -> None:
        self.debug = False
        self.path = os.path.join(COUETTELAB_PATH, self.COUETTELAB_CONFIG)

        if not os.path.exists(COUETTELAB_PATH):
            os.makedirs(COUETTELAB_PATH)

        if not os.path.exists(self.path):
            default_conf = (
                pkg_resources.files(__package__)
                .joinpath(f"config/{self.COUETTELAB_CONFIG}")
                .read_bytes()
            )
            with open(self.path, "wb") as config_file:
                config_file.write(default_conf)

        try:
            with open(self.path, "rb") as config_file:
                self.config = yaml.safe_load(config_file)
        except IOError:
            sys.stderr.write(f"{ERROR} Config file cannot be loaded: {self.path}\n")
            sys.exit(1)
        except yaml.scanner.ScannerError as e:
            sys.stderr.write(f"{ERROR} Config file contains an error:\n{e}\n")
            sys.exit(1)

        if self.config is None:
            self.config = {}

        for name, default in self.DEFAULT_CONFIG.items():
            if name not in self.config:
                self.config[name] = default

    def __getattr__(self, name: str) -> Any:
        try:
            return self.config[name]
        except KeyError as e:
            raise AttributeError(name) from e

    def output_config(self, file: TextIO) -> None:
        file.write(f'{Fore.GREEN}config: "{self.path}"\n')

        for name in self.DEFAULT_CONFIG:
            file.write(f"{Fore.GREEN}config: {name}: {self.config[name]}\n")


config = Config()
