"""Conformal transfers: zoom, cylinder, and stereographic sphere.

All three carry the spinor with conformal weight one half, which leaves the
quartic energy invariant region by region.  The zoom is what isolates a
concentration profile; the cylinder map turns annuli into translation-
invariant segments; the sphere chart compactifies decaying plane fields.
"""

import numpy as np

from spinflow.charts import GridChart, SpinorField
from spinflow.conformal import (cylinder_segment_energy, rescale,
                                sphere_transfer, to_cylinder)
from spinflow.errors import DecayError
from spinflow.fields import compact_bump_field
from spinflow.spinors import energy

chart = GridChart.rect(129, 129, (-1.0, 1.0, -1.0, 1.0))
psi = compact_bump_field(chart)
print("source energy:", energy(psi))

target = GridChart.rect(145, 145, (-2.0, 2.0, -2.0, 2.0))
zoom = rescale(psi, (0.0, 0.0), 0.5, target)
print(f"zoom by 1/2: energy {energy(zoom):.12f} "
      f"(relative gap {abs(energy(zoom) - energy(psi)) / energy(psi):.1e})")

disk = GridChart.disk(129, 1.0)
X, Y = disk.grid()
r = np.hypot(X, Y)
band = np.exp(-((r - 0.5) / 0.08) ** 2 / 2.0)
ring = SpinorField.from_components(disk, [(band, 0.4 * band)])
cyl = to_cylinder(ring, (0.0, 0.0), 0.25, 0.8)
ann = (r >= 0.25) & (r <= 0.8) & disk.active
print(f"\nannulus [0.25, 0.8] energy {energy(ring, ann):.6f} vs cylinder "
      f"{energy(cyl):.6f}")
t0 = -np.log(0.8)
print(f"unit t-segment energy: {cylinder_segment_energy(cyl, t0, t0 + 1.0):.6f} "
      f"(annulus [0.8/e, 0.8])")

on_sphere = sphere_transfer(psi, "toSphere")
back = sphere_transfer(on_sphere, "toPlane")
print(f"\nsphere transfer: energy {energy(on_sphere):.12f}, round trip max "
      f"deviation {np.abs(back.values - psi.values).max():.1e}")

flat = SpinorField.zeros(chart, 1)
flat.values[..., 0, 0] = 1.0
try:
    sphere_transfer(flat, "toSphere")
except DecayError as exc:
    print("non-decaying field rejected:", exc)
