"""Physical constants and the SI / reduced unit systems."""

from dataclasses import dataclass

from scipy import constants as _c

BOHR_RADIUS = _c.physical_constants["Bohr radius"][0]


@dataclass(frozen=True)
class Units:
    name: str
    hbar: float
    k_B: float

    @property
    def h(self) -> float:
        return 2 * 3.141592653589793 * self.hbar

    @property
    def reduced(self) -> bool:
        return self.name == "reduced"


SI = Units("si", hbar=_c.hbar, k_B=_c.k)
# hbar = m = omega = k_B = 1; mass and trap frequency are set to 1 by the config
REDUCED = Units("reduced", hbar=1.0, k_B=1.0)


def get_units(name: str) -> Units:
    try:
        return {"si": SI, "reduced": REDUCED}[name]
    except KeyError:
        raise ValueError(f"unknown unit system {name!r} (expected 'si' or 'reduced')") from None
