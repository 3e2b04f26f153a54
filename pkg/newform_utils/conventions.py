"""Haar measures and additive characters shared by every integral in the package.

- additive measure on F: self-dual for psi_F, i.e. Lebesgue on R and twice
  Lebesgue on C;
- multiplicative measure: d^x x = zeta_F(1) |x|_F^{-1} dx, so that over R it is
  dx/|x| summed over both signs and over C it is (2/pi) dtheta dr/r;
- compact groups O(n), U(n) have volume 1 (O(1) = {+1, -1} with mass 1/2 each).
"""
from dataclasses import dataclass

import numpy as np

from newform_utils.repcore import LocalField


@dataclass(frozen=True)
class HaarConventions:
    real_zeta_at_one: float = 1.0
    complex_zeta_at_one: float = 1.0 / np.pi
    compact_volume: float = 1.0

    def additive_scale(self, fld: LocalField) -> float:
        return 1.0 if fld.is_real else 2.0

    def zeta_at_one(self, fld: LocalField) -> float:
        return self.real_zeta_at_one if fld.is_real else self.complex_zeta_at_one

    def radial_factor(self, fld: LocalField) -> float:
        """Constant c with int_{F^x} f d^x x = c * int_0^oo (mean of f over the unit circle) dr/r.

        Over R the "circle" is {+1, -1}; over C it is |z| = 1.
        """
        if fld.is_real:
            return 2.0 * self.zeta_at_one(fld)
        # d^x z = zeta_C(1) |z|_C^{-1} 2 r dr dtheta = (2/pi) dtheta dr / r
        return self.zeta_at_one(fld) * self.additive_scale(fld) * 2.0 * np.pi

    def psi(self, fld: LocalField, x):
        x = np.asarray(x)
        if fld.is_real:
            return np.exp(2j * np.pi * x.real)
        return np.exp(4j * np.pi * x.real)

    def psi_bar(self, fld: LocalField, x):
        return np.conj(self.psi(fld, x))


CONVENTIONS = HaarConventions()
