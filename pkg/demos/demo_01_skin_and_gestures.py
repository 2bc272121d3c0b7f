#!/usr/bin/env python3
"""Tour of the simulated skin: geometry, force response, gesture signatures.

The skin has two knitted grid sections (upper arm 7x5, lower arm 7x4 taxels).
Pressing a taxel drops its resistance; the readout digitizes that as a 10-bit
count.  This demo prints the force-response curve of one taxel and the
activated-count signature of each of the six gestures.
"""

import numpy as np

from taxelkit import DEFAULT_LAYOUT, GestureClass
from taxelkit.sensorsim import (
    nominal_skin_model,
    readings_from_forces,
    synthesize_gesture,
)


def sparkline(values, width=72):
    blocks = " .:-=+*#%@"
    values = np.asarray(values, dtype=float)
    if values.size > width:  # downsample by max over buckets
        edges = np.linspace(0, values.size, width + 1).astype(int)
        values = np.array([values[a:b].max() if b > a else 0.0
                           for a, b in zip(edges[:-1], edges[1:])])
    top = values.max() or 1.0
    return "".join(blocks[int(v / top * (len(blocks) - 1))] for v in values)


def main():
    print("=== sensor geometry ===")
    for section in DEFAULT_LAYOUT.sections:
        sl = DEFAULT_LAYOUT.section_slice(section.section_id)
        print(f"  {section.section_id}: {section.rows} rows x {section.cols} cols "
              f"-> flat indices {sl.start}..{sl.stop - 1}")
    print(f"  total taxels: {DEFAULT_LAYOUT.n_taxels}")

    print("\n=== force response of one upper-arm taxel (noise-free) ===")
    skin = nominal_skin_model()
    model = skin.taxels[0]
    forces = np.array([0.0, 0.5, 1.0, 1.15, 1.5, 2.0, 4.0, 8.0, 12.0, 13.95, 16.0])
    readings = readings_from_forces(model, forces)
    print("  force [N]:", "  ".join(f"{f:6.2f}" for f in forces))
    print("  reading  :", "  ".join(f"{r:6d}" for r in readings))
    print(f"  detection floor {model.min_force} N, saturation {model.sat_force} N, "
          f"plateau {model.plateau:.0f} counts")

    print("\n=== activated taxels per frame, one sample per gesture ===")
    for gesture in GestureClass:
        rec = synthesize_gesture(gesture, seed=7, arm_section="upper")
        counts = (rec.readings_matrix() > 10).sum(axis=1)
        dur = rec.n_frames / rec.sample_rate_hz
        print(f"  {gesture.label:<6} {dur:4.1f}s |{sparkline(counts)}|")

    print("\nEach gesture leaves a distinct temporal signature in this single")
    print("count-per-frame series; that series is the main classification feature.")


if __name__ == "__main__":
    main()
