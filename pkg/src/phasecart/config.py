"""Model configurations for n-level atoms coupled to one or more field modes.

All frequencies are stored as ratios to a reference field frequency
(hbar = 1 internally).  Hamiltonians built from these configurations are
total energies, not per-particle ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "ConfigurationError",
    "InvalidParameterError",
    "Mode",
    "ModelConfig",
    "DimensionalParams",
    "from_dimensional",
    "parse_config_text",
    "read_config_file",
    "CONFIG_TRANSITIONS",
    "CONFIG_LEVELS",
]


class InvalidParameterError(ValueError):
    """A parameter violates its documented range."""


class ConfigurationError(ValueError):
    """A coupling or mode is not allowed by the configuration tag."""


# Allowed dipolar transitions (j, k) with j < k, per configuration tag.
CONFIG_TRANSITIONS: dict[str, tuple[tuple[int, int], ...]] = {
    "TwoLevel": ((1, 2),),
    "Xi": ((1, 2), (2, 3)),
    "Lambda": ((1, 3), (2, 3)),
    "V": ((1, 2), (1, 3)),
    "Ladder4": ((1, 2), (2, 3), (3, 4)),
    # 4-level lambda: one mode drives 3<->4, the other drives 1<->3 and 2<->3.
    "SmallLambda4": ((1, 3), (2, 3), (3, 4)),
    # 4-level N: one mode drives 1<->3 and 2<->4, the other drives 2<->3.
    "N4": ((1, 3), (2, 4), (2, 3)),
}

CONFIG_LEVELS: dict[str, int] = {
    "TwoLevel": 2,
    "Xi": 3,
    "Lambda": 3,
    "V": 3,
    "Ladder4": 4,
    "SmallLambda4": 4,
    "N4": 4,
}


@dataclass(frozen=True)
class Mode:
    """One electromagnetic mode and the transitions it promotes."""

    frequency: float
    transitions: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.frequency <= 0:
            raise InvalidParameterError(f"mode frequency must be > 0, got {self.frequency}")
        object.__setattr__(self, "transitions", tuple(tuple(t) for t in self.transitions))
        for (j, k) in self.transitions:
            if not (1 <= j < k):
                raise InvalidParameterError(f"transition must have 1 <= j < k, got ({j},{k})")


@dataclass(frozen=True)
class ModelConfig:
    """Full specification of an atom-field model.

    ``omega`` lists the level frequencies (nondecreasing), ``modes`` the field
    modes with their promoted transitions, ``mu`` the coupling strengths as
    (j, k, value) triples, ``cutoffs`` the per-mode photon truncation.
    """

    configuration: str
    omega: tuple[float, ...]
    modes: tuple[Mode, ...]
    mu: tuple[tuple[int, int, float], ...]
    N: int
    rwa: bool = False
    cutoffs: tuple[int, ...] = (20,)

    def __post_init__(self):
        if self.configuration not in CONFIG_TRANSITIONS:
            raise ConfigurationError(f"unknown configuration tag {self.configuration!r}")
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "mu", tuple((j, k, float(v)) for (j, k, v) in self.mu))
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))

        n = CONFIG_LEVELS[self.configuration]
        if len(self.omega) != n:
            raise InvalidParameterError(
                f"{self.configuration} needs {n} level frequencies, got {len(self.omega)}"
            )
        if any(b < a for a, b in zip(self.omega, self.omega[1:])):
            raise InvalidParameterError("level frequencies must be nondecreasing")
        if self.N < 1:
            raise InvalidParameterError("atom count must be >= 1")
        if len(self.cutoffs) != len(self.modes):
            raise InvalidParameterError("need one photon cutoff per mode")
        if any(c < 0 for c in self.cutoffs):
            raise InvalidParameterError("photon cutoffs must be >= 0")

        allowed = set(CONFIG_TRANSITIONS[self.configuration])
        l_max = n * (n - 1) // 2 - (n - 2)
        if len(self.mu) > l_max:
            raise ConfigurationError(f"at most {l_max} couplings for {n} levels")
        seen = set()
        for (j, k, v) in self.mu:
            if (j, k) not in allowed:
                raise ConfigurationError(
                    f"coupling ({j},{k}) not allowed in {self.configuration}"
                )
            if (j, k) in seen:
                raise InvalidParameterError(f"duplicate coupling ({j},{k})")
            seen.add((j, k))
            if v < 0:
                raise InvalidParameterError("only positive coupling strengths are stored")
        mode_trans = set()
        for m in self.modes:
            for t in m.transitions:
                if t not in allowed:
                    raise ConfigurationError(
                        f"mode transition {t} not allowed in {self.configuration}"
                    )
                if t in mode_trans:
                    raise ConfigurationError(f"transition {t} assigned to two modes")
                mode_trans.add(t)
        for (j, k, _) in self.mu:
            if (j, k) not in mode_trans:
                raise ConfigurationError(f"coupling ({j},{k}) has no mode assigned")

    # -- convenience accessors -------------------------------------------

    @property
    def n_levels(self) -> int:
        return CONFIG_LEVELS[self.configuration]

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mu_dict(self) -> dict[tuple[int, int], float]:
        return {(j, k): v for (j, k, v) in self.mu}

    def coupling(self, j: int, k: int) -> float:
        return self.mu_dict().get((j, k), 0.0)

    def mode_index(self, j: int, k: int) -> int:
        for i, m in enumerate(self.modes):
            if (j, k) in m.transitions:
                return i
        raise ConfigurationError(f"no mode promotes transition ({j},{k})")

    @property
    def interaction_sign(self) -> float:
        # 2-level Dicke/TC carry the +gamma convention of the textbook form;
        # the n-level generalisation uses -mu.  Spectra agree either way.
        return 1.0 if self.configuration == "TwoLevel" else -1.0

    @property
    def omega_A(self) -> float:
        """Atomic gap of a 2-level model."""
        if self.n_levels != 2:
            raise ConfigurationError("omega_A is a 2-level quantity")
        return self.omega[1] - self.omega[0]

    @property
    def gamma(self) -> float:
        if self.n_levels != 2:
            raise ConfigurationError("gamma is a 2-level quantity")
        return self.coupling(1, 2)

    def with_couplings(self, **kw: float) -> "ModelConfig":
        """New config with couplings replaced; keys like ``mu12`` or ``gamma``."""
        cur = self.mu_dict()
        for key, v in kw.items():
            if key == "gamma":
                j, k = 1, 2
            elif key.startswith("mu") and len(key) == 4:
                j, k = int(key[2]), int(key[3])
            else:
                raise InvalidParameterError(f"unknown coupling key {key!r}")
            cur[(j, k)] = float(v)
        new_mu = tuple((j, k, v) for (j, k), v in sorted(cur.items()))
        return replace(self, mu=new_mu)

    def with_cutoffs(self, cutoffs) -> "ModelConfig":
        if isinstance(cutoffs, int):
            cutoffs = (cutoffs,) * self.n_modes
        return replace(self, cutoffs=tuple(cutoffs))


def two_level(omega_A: float, gamma: float, N: int, rwa: bool = False,
              cutoff: int = 30, Omega: float = 1.0) -> ModelConfig:
    """Convenience constructor for the 2-level Dicke / Tavis-Cummings model."""
    return ModelConfig(
        configuration="TwoLevel",
        omega=(-omega_A / 2.0, omega_A / 2.0),
        modes=(Mode(Omega, ((1, 2),)),),
        mu=((1, 2, gamma),),
        N=N,
        rwa=rwa,
        cutoffs=(cutoff,),
    )


@dataclass(frozen=True)
class DimensionalParams:
    """Dimensional inputs for a 2-level system.

    ``kappa`` (diamagnetic strength) is derivable from these and is carried
    for documentation only; the corresponding term is gauged away before any
    analysis.
    """

    omega_F: float
    omega_A_tilde: float
    d: float
    e_charge: float
    mass: float
    rho: float
    N: int

    def __post_init__(self):
        if self.omega_F <= 0 or self.omega_A_tilde <= 0:
            raise InvalidParameterError("frequencies must be > 0")
        if self.rho <= 0:
            raise InvalidParameterError("matter density must be > 0")
        if self.N < 1:
            raise InvalidParameterError("atom count must be >= 1")

    @property
    def kappa(self) -> float:
        return self.e_charge**2 / (
            2.0 * self.mass * self.d**2 * (self.omega_A_tilde / self.omega_F)
            * self.omega_F * self.N
        )


def from_dimensional(p: DimensionalParams, rwa: bool = False, cutoff: int = 30) -> ModelConfig:
    """Dimensionless 2-level config from dimensional inputs.

    omega_A = omega_A_tilde / omega_F and
    gamma = omega_A * d * sqrt(2*pi*rho / omega_F), with hbar = 1 and the
    field frequency normalised to 1.
    """
    omega_A = p.omega_A_tilde / p.omega_F
    gamma = omega_A * p.d * math.sqrt(2.0 * math.pi * p.rho / p.omega_F)
    return two_level(omega_A, gamma, p.N, rwa=rwa, cutoff=cutoff)


# -- configuration files ---------------------------------------------------

_KEYS = {"levels", "config", "omega", "Omega", "mu", "N", "rwa", "cutoffs"}


def _parse_pair(tok: str) -> tuple[int, int]:
    tok = tok.strip()
    if len(tok) != 2 or not tok.isdigit():
        raise InvalidParameterError(f"bad transition token {tok!r}")
    return int(tok[0]), int(tok[1])


def parse_config_text(text: str) -> ModelConfig:
    """Parse the line-oriented key=value model format.

    Keys: levels, config, omega, Omega, mu, N, rwa, cutoffs.  Unknown keys are
    rejected.  ``Omega`` entries look like ``12:1.0`` or ``13+23:0.8`` (the
    ``+`` groups transitions sharing one physical mode); ``mu`` entries look
    like ``12:0.5``.  A single ``omega`` value on a 2-level model is read as
    the atomic gap.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise InvalidParameterError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise InvalidParameterError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val

    for req in ("config", "omega", "Omega", "mu", "N"):
        if req not in values:
            raise InvalidParameterError(f"missing required key {req!r}")

    tag = values["config"]
    if tag not in CONFIG_LEVELS:
        raise ConfigurationError(f"unknown configuration tag {tag!r}")
    n = CONFIG_LEVELS[tag]
    if "levels" in values and int(values["levels"]) != n:
        raise InvalidParameterError(
            f"levels={values['levels']} inconsistent with config={tag}"
        )

    omega_vals = tuple(float(s) for s in values["omega"].split(","))
    if n == 2 and len(omega_vals) == 1:
        omega_vals = (-omega_vals[0] / 2.0, omega_vals[0] / 2.0)

    modes = []
    for spec in values["Omega"].split(","):
        trans_s, _, freq_s = spec.partition(":")
        if not freq_s:
            raise InvalidParameterError(f"bad Omega entry {spec!r}, expected jk:freq")
        trans = tuple(_parse_pair(t) for t in trans_s.split("+"))
        modes.append(Mode(float(freq_s), trans))

    mu = []
    for spec in values["mu"].split(","):
        pair_s, _, val_s = spec.partition(":")
        if not val_s:
            raise InvalidParameterError(f"bad mu entry {spec!r}, expected jk:value")
        j, k = _parse_pair(pair_s)
        mu.append((j, k, float(val_s)))

    rwa = values.get("rwa", "false").strip().lower() in ("1", "true", "yes")
    cut_s = values.get("cutoffs", "20")
    cut_vals = tuple(int(s) for s in cut_s.split(","))
    if len(cut_vals) == 1:
        cut_vals = cut_vals * len(modes)

    return ModelConfig(
        configuration=tag,
        omega=omega_vals,
        modes=tuple(modes),
        mu=tuple(mu),
        N=int(values["N"]),
        rwa=rwa,
        cutoffs=cut_vals,
    )


def read_config_file(path) -> ModelConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
