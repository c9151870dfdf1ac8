"""INI-style experiment configuration with a strict schema.

Three sections, all optional, all keys typed and defaulted; unknown sections
or keys are rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ntnlink.dataset import TrainConfig
from ntnlink.errors import ConfigurationError
from ntnlink.harness import ScenarioConfig
from ntnlink.nn.optim import LrSchedule


def _rate(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigurationError(f"bad code rate {text!r}") from e


_SCHEMA = {
    "link": {
        "mod_order": (int, 16),
        "code_rate": (_rate, 0.75),
        "profile": (str, "NTN-TDL-C"),
        "ue_speed_kmh": (float, 5.0),
        "carrier_hz": (float, 2e9),
    },
    "run": {
        "seed": (int, 1),
        "eb_n0_db": (float, 10.0),
        "max_iterations": (int, 100_000),
        "min_block_errors": (int, 100),
    },
    "train": {
        "batch_size": (int, 1024),
        "eb_n0_min_db": (float, 0.0),
        "eb_n0_max_db": (float, 10.0),
        "eb_n0_step_db": (float, 1.0),
        "max_lr": (float, 0.03),
        "min_lr": (float, 0.001),
        "warmup_epochs": (int, 40),
        "annealing_period_epochs": (int, 100),
        "early_stop_patience_cycles": (int, 3),
        "l2": (float, 1e-6),
        "max_epochs": (int, 2000),
        "steps_per_epoch": (int, 4),
    },
}

_VALID_MOD_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class AppConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def train_config(self, seed: int | None = None, batch_size: int | None = None,
                     max_epochs: int | None = None) -> TrainConfig:
        v = self.values
        grid = tuple(np.arange(v["train.eb_n0_min_db"],
                               v["train.eb_n0_max_db"] + 1e-9,
                               v["train.eb_n0_step_db"]).tolist())
        return TrainConfig(
            batch_size=batch_size or v["train.batch_size"],
            eb_n0_grid_db=grid,
            lr_schedule=LrSchedule(
                max_lr=v["train.max_lr"], min_lr=v["train.min_lr"],
                warmup_epochs=v["train.warmup_epochs"],
                annealing_period_epochs=v["train.annealing_period_epochs"],
            ),
            l2=v["train.l2"],
            early_stop_patience_cycles=v["train.early_stop_patience_cycles"],
            channel_profile=v["link.profile"],
            ue_speed_kmh=v["link.ue_speed_kmh"],
            data_mod_order=v["link.mod_order"],
            code_rate=v["link.code_rate"],
            carrier_hz=v["link.carrier_hz"],
            seed=v["run.seed"] if seed is None else seed,
            max_epochs=max_epochs or v["train.max_epochs"],
            steps_per_epoch=v["train.steps_per_epoch"],
        )

    def scenario_config(self, seed: int | None = None,
                        predictor_path: str | None = None,
                        perfect_csi: bool = False) -> ScenarioConfig:
        v = self.values
        return ScenarioConfig(
            eb_n0_db=v["run.eb_n0_db"],
            data_mod_order=v["link.mod_order"],
            code_rate=v["link.code_rate"],
            channel_profile=v["link.profile"],
            ue_speed_kmh=v["link.ue_speed_kmh"],
            carrier_hz=v["link.carrier_hz"],
            predictor_path=predictor_path,
            max_iterations=v["run.max_iterations"],
            min_block_errors=v["run.min_block_errors"],
            seed=v["run.seed"] if seed is None else seed,
            perfect_csi=perfect_csi,
        )

    def snapshot(self) -> dict:
        return dict(self.values)


def _defaults() -> dict:
    return {f"{sec}.{key}": default
            for sec, keys in _SCHEMA.items()
            for key, (_, default) in keys.items()}


def load_config(path: str | None) -> AppConfig:
    """Parse and validate; `path` None yields the built-in defaults."""
    values = _defaults()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path, encoding="utf-8") as f:
                parser.read_file(f)
        except OSError as e:
            raise ConfigurationError(f"cannot read config {path!r}: {e}") from e
        except configparser.Error as e:
            raise ConfigurationError(f"cannot parse config {path!r}: {e}") from e
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigurationError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigurationError(f"unknown config key [{section}] {key}")
                conv = _SCHEMA[section][key][0]
                try:
                    values[f"{section}.{key}"] = conv(raw)
                except (ValueError, TypeError) as e:
                    raise ConfigurationError(
                        f"bad value for [{section}] {key}: {raw!r}"
                    ) from e
    _validate(values)
    return AppConfig(values=values)


def _validate(v: dict) -> None:
    if v["link.mod_order"] not in _VALID_MOD_ORDERS:
        raise ConfigurationError(
            f"[link] mod_order must be one of {_VALID_MOD_ORDERS}"
        )
    if not 0.0 < v["link.code_rate"] <= 1.0:
        raise ConfigurationError("[link] code_rate must be in (0, 1]")
    if v["run.max_iterations"] < 1:
        raise ConfigurationError("[run] max_iterations must be >= 1")
    if v["train.batch_size"] < 1:
        raise ConfigurationError("[train] batch_size must be >= 1")
    if v["train.eb_n0_max_db"] < v["train.eb_n0_min_db"]:
        raise ConfigurationError("[train] eb_n0_max_db must be >= eb_n0_min_db")
    if v["train.eb_n0_step_db"] <= 0:
        raise ConfigurationError("[train] eb_n0_step_db must be > 0")
    LrSchedule(max_lr=v["train.max_lr"], min_lr=v["train.min_lr"],
               warmup_epochs=v["train.warmup_epochs"],
               annealing_period_epochs=v["train.annealing_period_epochs"])


def default_config_text() -> str:
    lines = []
    for sec, keys in _SCHEMA.items():
        lines.append(f"[{sec}]")
        for key, (_, default) in keys.items():
            shown = "3/4" if key == "code_rate" else default
            lines.append(f"{key} = {shown}")
        lines.append("")
    return "\n".join(lines)
