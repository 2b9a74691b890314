"""Simulation configuration: one JSON file, loaded into dataclasses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import timedelta
from importlib import resources

from .crypto import GroupParams
from .errors import ConfigError, ImsiIbeError
from .flows import Sizes
from .identity import ExpiryTime, NetId, hnid, parse_imsi


@dataclass(frozen=True)
class HnConfig:
    hnid: str
    subscribers: tuple[str, ...]
    mnc_len_map: dict = field(default_factory=dict)


@dataclass(frozen=True)
class UeConfig:
    imsi: str
    et_ue: ExpiryTime


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    start_time: ExpiryTime = ExpiryTime.parse("20250615T100000Z")
    renewal_margin: timedelta = timedelta(hours=1)
    p: int = 2**61 - 1


@dataclass(frozen=True)
class Config:
    hn: HnConfig
    sns: tuple[str, ...]
    ues: tuple[UeConfig, ...]
    sim: SimConfig = SimConfig()
    sizes: Sizes = Sizes()
    et_in_broadcast: bool = False

    @property
    def params(self) -> GroupParams:
        return GroupParams(p=self.sim.p)


def from_dict(raw: dict) -> Config:
    try:
        hn_raw = raw["hn"]
        mnc_map = {str(k): int(v) for k, v in hn_raw.get("mnc_len_map", {}).items()}
        hn = HnConfig(NetId(hn_raw["hnid"]).value, tuple(hn_raw["subscribers"]), mnc_map)
        sns = tuple(NetId(s).value for s in raw["sns"])
        ues = tuple(UeConfig(u["imsi"], ExpiryTime.parse(u["et_ue"])) for u in raw["ues"])
        sim_raw = raw.get("sim", {})
        sim = SimConfig(
            seed=int(sim_raw.get("seed", 1)),
            start_time=ExpiryTime.parse(sim_raw.get("start_time", "20250615T100000Z")),
            renewal_margin=timedelta(seconds=int(sim_raw.get("renewal_margin_s", 3600))),
            p=int(sim_raw.get("p", 2**61 - 1)),
        )
        sizes = Sizes(**raw.get("sizes", {}))
        et_flag = bool(raw.get("flags", {}).get("et_in_broadcast", False))
        GroupParams(p=sim.p)
        for imsi in hn.subscribers:
            if hnid(parse_imsi(imsi, mnc_map)).value != hn.hnid:
                raise ConfigError(f"subscriber {imsi} does not belong to HN {hn.hnid}")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, ImsiIbeError) as exc:
        raise ConfigError(f"invalid config: {exc!r}") from exc
    if not sns:
        raise ConfigError("config needs at least one SN")
    if not ues:
        raise ConfigError("config needs at least one UE")
    for ue in ues:
        if ue.imsi not in hn.subscribers:
            raise ConfigError(f"UE {ue.imsi} is not a subscriber of HN {hn.hnid}")
    return Config(hn, sns, ues, sim, sizes, et_flag)


def load_config(path=None) -> Config:
    """Load ``path``, or the packaged default config when ``path`` is None."""
    if path is None:
        text = resources.files("imsi_ibe").joinpath("data/default_config.json").read_text()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return from_dict(raw)
