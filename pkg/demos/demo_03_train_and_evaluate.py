#!/usr/bin/env python3
"""Train the dense classifier on a synthetic dataset and inspect the results.

Uses a reduced participant count so the demo finishes in seconds; the full
default (10 train / 6 test participants -> 900/180 samples) behaves the same,
just slower.  Splits are participant-wise: nobody appears on both sides.
"""

from taxelkit import FeatureKind
from taxelkit.core import train_val_split
from taxelkit.learn import MLPConfig, evaluate, train_mlp
from taxelkit.pipeline import extract_matrix
from taxelkit.sensorsim import synthesize_dataset


def main():
    dataset = synthesize_dataset(seed=0, n_train_participants=4, n_test_participants=2)
    train = dataset.train_recordings()
    test = dataset.test_recordings()
    print(f"{len(train)} training and {len(test)} test recordings, participants "
          f"{sorted(dataset.participants)}")

    fit_recs, val_recs = train_val_split(train, 0.8, seed=0)
    kind = FeatureKind.ACTIVATED_COUNT
    fm_fit = extract_matrix(fit_recs, kind)
    fm_val = extract_matrix(val_recs, kind)
    fm_test = extract_matrix(test, kind)

    config = MLPConfig(input_dim=fm_fit.X.shape[1], seed=0, max_epochs=150)
    model = train_mlp(fm_fit.X, fm_fit.y, config, val=(fm_val.X, fm_val.y),
                      feature_kind=kind)
    h = model.history
    print(f"\ntrained for {len(h.val_acc)} epochs; "
          f"best validation accuracy {max(h.val_acc):.3f} at epoch {h.best_epoch}")

    report = evaluate(model, fm_test.X, fm_test.y, feature_kind=kind)
    print()
    print(report.render_text())


if __name__ == "__main__":
    main()
