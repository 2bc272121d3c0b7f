import numpy as np
import pytest

from taxelkit.core import DEFAULT_LAYOUT, GestureClass, save_dataset
from taxelkit.sensorsim import (
    DEFAULT_GESTURE_PROFILES,
    GestureProfile,
    IndentationProtocol,
    TaxelModel,
    default_protocol,
    default_skin_model,
    nominal_skin_model,
    profiles_from_json,
    reading_from_force,
    readings_from_forces,
    run_characterization,
    synthesize_dataset,
    synthesize_gesture,
)


def activated_counts(recording, threshold=10):
    return (recording.readings_matrix() > threshold).sum(axis=1)


def nonzero_runs(counts):
    active = (counts > 0).astype(np.int8)
    return int(np.sum(np.diff(np.concatenate(([0], active, [0]))) == 1))


NOMINAL = TaxelModel(min_force=1.15, sat_force=13.95, gain=95.0, noise_std=0.0,
                     nonlinearity=0.8)


class TestTaxelResponse:
    def test_zero_force_zero_reading(self):
        assert reading_from_force(NOMINAL, 0.0) == 0

    def test_zero_force_noise_bounded(self):
        noisy = TaxelModel(1.15, 13.95, 95.0, 2.0, 0.8)
        rng = np.random.default_rng(0)
        readings = [reading_from_force(noisy, 0.0, rng) for _ in range(2000)]
        frac = np.mean([r <= 3 * noisy.noise_std for r in readings])
        assert frac >= 0.99

    def test_saturation_plateau(self):
        at_sat = reading_from_force(NOMINAL, 13.95)
        beyond = reading_from_force(NOMINAL, 20.0)
        assert beyond == at_sat == int(round(NOMINAL.plateau))

    def test_monotone_noise_free_grid(self):
        forces = np.arange(0.0, 20.0001, 0.05)
        readings = readings_from_forces(NOMINAL, forces)
        assert (np.diff(readings.astype(int)) >= 0).all()
        assert readings.min() >= 0 and readings.max() <= 1023

    def test_vectorized_matches_scalar(self):
        forces = np.linspace(0, 18, 300)
        vec = readings_from_forces(NOMINAL, forces)
        scalar = [reading_from_force(NOMINAL, f) for f in forces]
        np.testing.assert_array_equal(vec, scalar)

    def test_negative_force_rejected(self):
        with pytest.raises(ValueError):
            reading_from_force(NOMINAL, -0.5)

    def test_model_invariants(self):
        with pytest.raises(ValueError):
            TaxelModel(0.0, 13.95, 95.0, 0.0, 0.8)
        with pytest.raises(ValueError):
            TaxelModel(5.0, 4.0, 95.0, 0.0, 0.8)
        with pytest.raises(ValueError):
            TaxelModel(1.0, 10.0, -3.0, 0.0, 0.8)


class TestGestureSignatures:
    def test_poke_touches_at_most_two_taxels(self):
        for seed in range(100):
            rec = synthesize_gesture(
                GestureClass.POKE, seed=seed,
                arm_section="upper" if seed % 2 else "lower",
            )
            mat = rec.readings_matrix()
            assert int((mat > 10).any(axis=0).sum()) <= 2

    def test_rub_active_for_at_least_four_seconds(self):
        for seed in range(100):
            rec = synthesize_gesture(
                GestureClass.RUB, seed=seed,
                arm_section="upper" if seed % 2 else "lower",
            )
            counts = activated_counts(rec)
            active = (counts > 0).astype(np.int8)
            # longest contiguous active run covers >= 4 s (200 raw frames)
            best = run = 0
            for v in active:
                run = run + 1 if v else 0
                best = max(best, run)
            assert best >= 200, seed

    def test_tap_run_count_matches_repetitions(self):
        hits = []
        for seed in range(100):
            profile = DEFAULT_GESTURE_PROFILES[GestureClass.TAP]
            rec = synthesize_gesture(
                GestureClass.TAP, profile=profile, seed=seed,
                arm_section="upper" if seed % 2 else "lower",
            )
            runs = nonzero_runs(activated_counts(rec))
            lo, hi = profile.repetitions
            assert lo <= runs <= hi
            hits.append(runs)
        assert len(set(hits)) > 1  # repetition count actually varies

    def test_fixed_repetitions_exact_run_count(self):
        for reps in (2, 3, 4, 5):
            profile = GestureProfile(
                duration_range=(0.1, 0.2),
                footprint_range=(1, 4),
                peak_force_range=(3.4, 4.6),
                repetitions=(reps, reps),
            )
            for seed in range(25):
                rec = synthesize_gesture(GestureClass.TAP, profile=profile, seed=seed,
                                         arm_section="lower")
                assert nonzero_runs(activated_counts(rec)) == reps

    def test_footprint_bounds_per_class(self):
        for gesture, profile in DEFAULT_GESTURE_PROFILES.items():
            for seed in range(20):
                rec = synthesize_gesture(gesture, seed=seed, arm_section="upper")
                touched = int((rec.readings_matrix() > 10).any(axis=0).sum())
                if profile.motion == "translating":
                    continue  # sweeping footprint accumulates more taxels
                assert touched <= profile.footprint_range[1], (gesture, seed)

    def test_shake_oscillates_in_band(self):
        # force troughs drop below the detection floor once per cycle, so the
        # dip rate of the activated-count curve tracks the 3..6 Hz oscillation
        for seed in range(50):
            rec = synthesize_gesture(GestureClass.SHAKE, seed=seed)
            counts = activated_counts(rec).astype(float)
            nz = np.flatnonzero(counts > 0)
            span = counts[nz[0] : nz[-1] + 1]
            low = span < 0.5 * np.percentile(span, 80)
            dips = nonzero_runs(np.where(low, 1, 0))
            rate = dips / (span.size / 50.0)
            assert 2.0 <= rate <= 7.0, (seed, rate)

    def test_deterministic_per_seed(self):
        a = synthesize_gesture(GestureClass.GRAB, seed=11)
        b = synthesize_gesture(GestureClass.GRAB, seed=11)
        np.testing.assert_array_equal(a.readings_matrix(), b.readings_matrix())
        np.testing.assert_array_equal(a.timestamps(), b.timestamps())

    def test_recordings_pass_core_validation(self):
        # construction validates: 63-wide frames, increasing timestamps
        for gesture in GestureClass:
            for seed in range(5):
                rec = synthesize_gesture(gesture, seed=seed, arm_section="lower")
                assert rec.n_frames > 0
                assert rec.label is gesture

    def test_other_section_stays_zero(self):
        rec = synthesize_gesture(GestureClass.HIT, seed=2, arm_section="upper")
        lower = rec.readings_matrix()[:, DEFAULT_LAYOUT.section_slice("lower")]
        assert not lower.any()

    def test_profile_invariants(self):
        with pytest.raises(ValueError):
            GestureProfile((0.0, 1.0), (1, 2), (1.0, 2.0))
        with pytest.raises(ValueError):
            GestureProfile((0.1, 1.0), (0, 2), (1.0, 2.0))
        with pytest.raises(ValueError):
            GestureProfile((0.1, 1.0), (1, 64), (1.0, 2.0))
        with pytest.raises(ValueError):
            GestureProfile((0.1, 1.0), (1, 2), (1.0, 99.0))

    def test_profiles_from_json(self, tmp_path):
        path = tmp_path / "profiles.json"
        path.write_text('{"tap": {"repetitions": [3, 3]}}')
        profiles = profiles_from_json(path)
        assert profiles[GestureClass.TAP].repetitions == (3, 3)
        # untouched classes keep defaults
        assert profiles[GestureClass.HIT] == DEFAULT_GESTURE_PROFILES[GestureClass.HIT]


class TestDatasetSynthesis:
    def test_default_shape_900_180(self):
        ds = synthesize_dataset(seed=0)
        train = ds.train_recordings()
        test = ds.test_recordings()
        assert (len(train), len(test)) == (900, 180)
        for cls in GestureClass:
            assert sum(1 for r in train if r.label is cls) == 150
            assert sum(1 for r in test if r.label is cls) == 30

    def test_upper_lower_trial_ratio(self):
        ds = synthesize_dataset(seed=1, n_train_participants=1, n_test_participants=1)
        train = ds.train_recordings()
        for cls in GestureClass:
            per_cls = [r for r in train if r.label is cls]
            upper = sum(1 for r in per_cls if r.arm_section == "upper")
            lower = sum(1 for r in per_cls if r.arm_section == "lower")
            assert (upper, lower) == (9, 6)
        test = ds.test_recordings()
        for cls in GestureClass:
            per_cls = [r for r in test if r.label is cls]
            upper = sum(1 for r in per_cls if r.arm_section == "upper")
            lower = sum(1 for r in per_cls if r.arm_section == "lower")
            assert (upper, lower) == (3, 2)

    def test_participant_disjoint(self):
        ds = synthesize_dataset(seed=2, n_train_participants=3, n_test_participants=2)
        train_p = {r.participant_id for r in ds.train_recordings()}
        test_p = {r.participant_id for r in ds.test_recordings()}
        assert train_p & test_p == set()

    def test_same_seed_bit_identical_files(self, tmp_path):
        a = synthesize_dataset(seed=7, n_train_participants=2, n_test_participants=1)
        b = synthesize_dataset(seed=7, n_train_participants=2, n_test_participants=1)
        pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_dataset(a, pa)
        save_dataset(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_every_recording_has_contact(self):
        ds = synthesize_dataset(seed=3, n_train_participants=2, n_test_participants=1)
        from taxelkit.pipeline import trim_precontact

        for rec in ds.recordings:
            trim_precontact(rec)  # raises NoContactError if not


class TestCharacterization:
    def test_noise_free_recovery_all_protocol_taxels(self):
        skin = nominal_skin_model()
        protocol = default_protocol()
        report = run_characterization(skin, protocol)
        for tc in report.taxels:
            model = skin.taxels[tc.taxel]
            for v in tc.min_detect:
                assert v is not None
                assert abs(v - model.min_force) <= 0.1
            for v in tc.max_sat:
                assert v is not None
                assert abs(v - model.sat_force) <= 0.5

    def test_recovery_within_one_grid_step_of_detection_force(self):
        skin = nominal_skin_model()
        protocol = default_protocol()
        report = run_characterization(skin, protocol)
        for tc in report.taxels:
            model = skin.taxels[tc.taxel]
            target = model.detection_force(protocol.detection_threshold)
            for v in tc.min_detect:
                assert target - 1e-9 <= v <= target + protocol.force_step + 1e-9

    def test_zero_stiffness_not_reached(self):
        skin = nominal_skin_model()
        protocol = IndentationProtocol(
            taxels=(0,), stiffness_n_per_mm=0.0, repetitions=2
        )
        report = run_characterization(skin, protocol)
        tc = report.taxels[0]
        assert all(v is None for v in tc.min_detect)
        assert all(v is None for v in tc.max_sat)
        summary = tc.summary()
        assert summary["min_detect_mean_n"] is None
        assert summary["min_detect_not_reached"] == 2

    def test_noisy_statistics(self):
        skin = nominal_skin_model(noise_std=1.5)
        protocol = IndentationProtocol(taxels=(5, 40))
        rng = np.random.default_rng(0)
        report = run_characterization(skin, protocol, rng=rng)
        for tc in report.taxels:
            model = skin.taxels[tc.taxel]
            values = np.array([v for v in tc.min_detect if v is not None])
            assert values.size == protocol.repetitions
            assert values.std() > 0.0
            target = model.detection_force(protocol.detection_threshold)
            sem = values.std() / np.sqrt(values.size)
            assert abs(values.mean() - target) <= 3 * sem + protocol.force_step

    def test_bad_taxel_rejected(self):
        skin = nominal_skin_model()
        with pytest.raises(ValueError):
            run_characterization(skin, IndentationProtocol(taxels=(63,)))

    def test_report_outputs(self, tmp_path):
        skin = nominal_skin_model()
        protocol = IndentationProtocol(taxels=(0, 40), repetitions=2)
        report = run_characterization(skin, protocol)
        jpath = tmp_path / "summary.json"
        cpath = tmp_path / "samples.csv"
        report.to_json(jpath)
        report.samples_to_csv(cpath)
        assert jpath.stat().st_size > 0
        header = cpath.read_text().splitlines()[0]
        assert header == "taxel,repetition,force_n,reading"

    def test_default_skin_stays_detectable(self):
        skin = default_skin_model(seed=0)
        mins = np.array([t.min_force for t in skin.taxels])
        gains = np.array([t.gain for t in skin.taxels])
        assert mins.max() <= 2.3
        assert gains.min() >= 95.0 * 0.7 - 1e-9
        assert max(t.plateau for t in skin.taxels) <= 1023
