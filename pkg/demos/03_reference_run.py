#!/usr/bin/env python3
# A lifted smooth desk run with the conservation and dissipation monitors:
# mass is conserved to roundoff, the H^s energy decays monotonically, and the
# energy/entropy balances close to time-integration accuracy.

import numpy as np

from fracthin import (
    DomainGeometry, GridField, InitialConditionSpec, MobilityParams,
    SolverConfig, build_initial, lift_initial_datum, run, verify_identities,
)

geo = DomainGeometry.interval(2 * np.pi, 96)
mob = MobilityParams(n=1.5, epsilon=1e-6, delta=1e-6, gamma=1e-3, s=0.5, d=1)
cfg = SolverConfig(s=0.5, mobility=mob, geometry=geo, final_time=0.25,
                   record_samples=200, rtol=1e-8, atol=1e-11)

u0 = build_initial(InitialConditionSpec("compact-bump", amplitude=0.2, radius=1.5), geo)
lifted = GridField(geo, lift_initial_datum(u0.values, mob))
print(f"initial range: [{lifted.values.min():.4f}, {lifted.values.max():.4f}] "
      "(lift keeps the data strictly positive)")

record = run(lifted, cfg)
print(f"\nintegrated to T={cfg.final_time} in {record.accepted} accepted steps "
      f"({record.rejected} rejected)")

print("mass drift:", np.abs(record.mass - record.mass[0]).max() / record.mass[0])
print("energy monotone:", bool((np.diff(record.energy) <= 1e-8).all()),
      f" (H^s energy {record.energy[0]:.5f} -> {record.energy[-1]:.5f})")

lyap = record.entropy + record.dissipation
print("entropy + dissipation drift:",
      float((lyap - lyap[0]).max()) / abs(lyap[0]))

rep = verify_identities(record, cfg)
print(f"\nenergy identity residual  R_E = {rep.residual_energy:.2e}")
print(f"entropy identity residual R_S = {rep.residual_entropy:.2e}")
print("min u over the run:", record.min_u.min(), "(positivity preserved)")
