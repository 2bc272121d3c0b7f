#!/usr/bin/env python3
"""Which feature carries the gesture signal?  One MLP per feature kind.

All five runs share the same split, seed and hyperparameters; only the input
changes.  The per-frame activated count usually wins by a wide margin and the
per-taxel principal frequency trails the field: most gestures are single
bursts without a stable oscillation for the spectrum to lock onto.
"""

from taxelkit.learn import MLPConfig, ablation_run, render_ablation_table
from taxelkit.sensorsim import synthesize_dataset


def main():
    dataset = synthesize_dataset(seed=0, n_train_participants=4, n_test_participants=2)
    base = MLPConfig(seed=0, max_epochs=90, patience=12)
    results = ablation_run(dataset, base_config=base)
    print(render_ablation_table(results))

    best = max(results.items(), key=lambda kv: kv[1].accuracy)
    worst = min(results.items(), key=lambda kv: kv[1].accuracy)
    print(f"\nbest:  {best[0].value} ({best[1].accuracy:.3f})")
    print(f"worst: {worst[0].value} ({worst[1].accuracy:.3f})")


if __name__ == "__main__":
    main()
