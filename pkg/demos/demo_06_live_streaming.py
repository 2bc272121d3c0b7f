#!/usr/bin/env python3
"""Live pipeline end to end: TCP frame server, segmentation, classification.

A server thread replays labeled recordings as binary frame messages (here at
40x speed; the wire format is the same at real-time 50 Hz).  The client
segments the stream online -- two consecutive active frames open a segment,
half a second of silence closes it -- and classifies each closed segment with
exactly the offline pipeline, so live predictions match offline ones.
"""

from taxelkit import FeatureKind, GestureClass
from taxelkit.learn import MLPConfig, train_mlp
from taxelkit.pipeline import extract_matrix
from taxelkit.sensorsim import synthesize_gesture
from taxelkit.stream import FrameServer, ReplaySource, classify_live, classify_recording


def quick_model():
    recs = []
    for i, gesture in enumerate(GestureClass):
        recs.extend(
            synthesize_gesture(gesture, seed=50 * i + s,
                               arm_section="upper" if s % 2 else "lower")
            for s in range(12)
        )
    fm = extract_matrix(recs, FeatureKind.ACTIVATED_COUNT)
    config = MLPConfig(input_dim=150, hidden_dims=(32, 16, 8), learning_rate=0.002,
                       max_epochs=120, patience=120, seed=0)
    return train_mlp(fm.X, fm.y, config, val=(fm.X, fm.y),
                     feature_kind=FeatureKind.ACTIVATED_COUNT)


def main():
    print("training a small classifier on synthetic gestures ...")
    model = quick_model()

    replay = [
        synthesize_gesture(GestureClass(i), seed=400 + i,
                           arm_section="upper" if i % 2 else "lower")
        for i in range(6)
    ]
    server = FrameServer(ReplaySource(replay), rate_hz=2000.0).start()
    print(f"serving {len(replay)} recordings on port {server.port}\n")

    try:
        events = list(
            classify_live("127.0.0.1", server.port, model, max_events=len(replay))
        )
    finally:
        server.stop()

    print(f"{'true':<8} {'live prediction':<16} {'offline':<16} {'frames':>6}")
    for rec, event in zip(replay, events):
        offline = classify_recording(rec, model)
        match = "==" if offline["label"] == event["label"] else "!="
        print(f"{rec.label.label:<8} {event['label']:<16} "
              f"{offline['label']:<16} {event['segment_frames']:>6}   live {match} offline")


if __name__ == "__main__":
    main()
