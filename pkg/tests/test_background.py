import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hsmd.background import (
    RING_OFFSETS,
    BsConfig,
    bg_apply,
    bg_init,
    descriptor_plane,
    frame_diff,
    lsbp_descriptor,
)
from hsmd.parallel import RowPool


def gray(values):
    return np.array(values, dtype=np.uint8)


# -- frame differencing -------------------------------------------------------


def test_identical_frames_give_zero():
    f = np.random.default_rng(0).integers(0, 256, (5, 6), dtype=np.uint8)
    assert not frame_diff(f, f, 15).any()


def test_diff_above_threshold():
    assert frame_diff(gray([[200]]), gray([[100]]), 15)[0, 0] == 100


def test_diff_below_threshold_is_zeroed():
    assert frame_diff(gray([[108]]), gray([[100]]), 15)[0, 0] == 0


def test_diff_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        frame_diff(np.zeros((2, 3), np.uint8), np.zeros((3, 2), np.uint8), 15)


planes = arrays(np.uint8, (4, 5))


@given(planes, planes, st.integers(0, 255))
def test_diff_symmetric(a, b, t):
    np.testing.assert_array_equal(frame_diff(a, b, t), frame_diff(b, a, t))


@given(planes, planes, st.integers(0, 255), st.integers(0, 255))
def test_diff_monotone_in_threshold(a, b, t1, t2):
    lo, hi = sorted((t1, t2))
    assert not (frame_diff(a, b, hi).astype(bool) & ~frame_diff(a, b, lo).astype(bool)).any()


# -- ring-pattern descriptor --------------------------------------------------


def test_descriptor_constant_frame_is_zero():
    f = np.full((7, 7), 120, np.uint8)
    assert lsbp_descriptor(f, 3, 3) == 0


def test_descriptor_corner_of_constant_frame_is_zero():
    f = np.full((7, 7), 120, np.uint8)
    assert lsbp_descriptor(f, 0, 0) == 0
    assert lsbp_descriptor(f, 6, 6) == 0


def test_descriptor_single_bright_neighbour():
    f = np.full((7, 7), 50, np.uint8)
    f[3, 3] = 200
    # enumerate the 5x5 ring row-major, skipping the centre; the bright pixel
    # sits at offset (-1, 0) relative to the queried pixel (4, 3)
    ring = [(dx, dy) for dy in range(-2, 3) for dx in range(-2, 3) if (dx, dy) != (0, 0)]
    expected_bit = ring.index((-1, 0))
    pattern = lsbp_descriptor(f, 4, 3)
    assert bin(pattern).count("1") == 1
    assert pattern == 1 << expected_bit


def test_descriptor_out_of_range():
    with pytest.raises(IndexError):
        lsbp_descriptor(np.zeros((3, 3), np.uint8), 3, 0)


def test_ring_has_24_offsets_within_radius_two():
    assert len(RING_OFFSETS) == 24
    assert all(max(abs(dx), abs(dy)) <= 2 for dx, dy in RING_OFFSETS)


@given(arrays(np.uint8, (6, 7)), st.integers(0, 6))
@settings(max_examples=40)
def test_descriptor_plane_matches_pointwise(frame, margin):
    plane = descriptor_plane(frame, margin)
    for y in range(6):
        for x in range(7):
            assert plane[y, x] == lsbp_descriptor(frame, x, y, margin)


@given(arrays(np.uint8, (5, 5), elements=st.integers(0, 200)), st.integers(0, 55))
def test_descriptor_invariant_to_intensity_offset(frame, offset):
    shifted = frame + np.uint8(offset)
    np.testing.assert_array_equal(descriptor_plane(frame, 0), descriptor_plane(shifted, 0))


# -- sample-consensus model ---------------------------------------------------


def test_init_constant_frame_within_jitter():
    cfg = BsConfig(samples=20, init_jitter=8)
    model = bg_init(np.full((6, 6), 100, np.uint8), cfg)
    assert model.intensities.shape == (20, 6, 6)
    assert np.abs(model.intensities.astype(int) - 100).max() <= 8
    assert not model.descriptors.any()


def test_init_deterministic():
    f = np.random.default_rng(3).integers(0, 256, (8, 9), dtype=np.uint8)
    a, b = bg_init(f, BsConfig(seed=5)), bg_init(f, BsConfig(seed=5))
    np.testing.assert_array_equal(a.intensities, b.intensities)
    np.testing.assert_array_equal(a.descriptors, b.descriptors)


def test_init_single_sample_equals_frame():
    f = np.random.default_rng(4).integers(0, 256, (4, 4), dtype=np.uint8)
    model = bg_init(f, BsConfig(samples=1, min_matches=1))
    np.testing.assert_array_equal(model.intensities[0], f)


def test_static_scene_stays_background():
    f = np.random.default_rng(5).integers(0, 256, (12, 12), dtype=np.uint8)
    model = bg_init(f, BsConfig())
    for _ in range(5):
        out, model = bg_apply(model, f)
        assert not out.any()


def brute_force_foreground(model, frame):
    """Scan every pixel's bank one sample at a time."""
    cfg = model.config
    h, w = frame.shape
    out = np.zeros((h, w), np.uint8)
    for y in range(h):
        for x in range(w):
            d = lsbp_descriptor(frame, x, y, cfg.lsbp_margin)
            hits = 0
            for k in range(model.n_samples):
                close = abs(int(model.intensities[k, y, x]) - int(frame[y, x])) <= cfg.match_threshold
                ham = bin(int(model.descriptors[k, y, x]) ^ d).count("1")
                hits += close and ham <= cfg.hamming_threshold
            out[y, x] = 0 if hits >= cfg.min_matches else 255
    return out


def test_single_pixel_jump_is_only_foreground():
    scene = np.full((3, 3), 100, np.uint8)
    model = bg_init(scene, BsConfig(match_threshold=25))
    moved = scene.copy()
    moved[1, 1] = 200
    expected = brute_force_foreground(model, moved)
    out, _ = bg_apply(model, moved)
    np.testing.assert_array_equal(out, expected)
    assert out[1, 1] == 255 and np.count_nonzero(out) == 1


@given(
    arrays(np.uint8, (4, 5)),
    arrays(np.uint8, (4, 5)),
    st.integers(1, 6),
    st.integers(0, 40),
    st.integers(0, 8),
    st.integers(0, 10),
)
@settings(max_examples=40, deadline=None)
def test_decisions_match_brute_force(first, frame, n, tau, tau_h, seed):
    cfg = BsConfig(samples=n, min_matches=min(2, n), match_threshold=tau, hamming_threshold=tau_h, seed=seed)
    model = bg_init(first, cfg)
    # perturb the bank so samples are not all alike
    rng = np.random.default_rng(seed)
    model.intensities[:] = rng.integers(0, 256, model.intensities.shape)
    model.descriptors[:] = rng.integers(0, 1 << 24, model.descriptors.shape, dtype=np.uint32)
    expected = brute_force_foreground(model, frame)
    out, _ = bg_apply(model, frame)
    np.testing.assert_array_equal(out, expected)


def _sequence(n=8, size=16, seed=9):
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 256, (size, size), dtype=np.uint8)
    frames = []
    for i in range(n):
        f = base.copy()
        f[4:8, i : i + 4] = 255
        frames.append(f)
    return frames


def _run(frames, cfg, pool=None):
    model = bg_init(frames[0], cfg)
    outs = []
    for f in frames[1:]:
        out, model = bg_apply(model, f, pool or RowPool(1))
        outs.append(out)
    return outs, model


def test_fixed_seed_reproducible():
    cfg = BsConfig(p_replace=0.5, p_neighbor=0.5)
    frames = _sequence()
    a, ma = _run(frames, cfg)
    b, mb = _run(frames, cfg)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    np.testing.assert_array_equal(ma.intensities, mb.intensities)


def test_thread_count_does_not_change_result():
    cfg = BsConfig(p_replace=0.3, p_neighbor=0.3)
    frames = _sequence()
    serial, ms = _run(frames, cfg)
    with RowPool(4) as pool:
        threaded, mt = _run(frames, cfg, pool)
    for x, y in zip(serial, threaded):
        np.testing.assert_array_equal(x, y)
    np.testing.assert_array_equal(ms.intensities, mt.intensities)
    np.testing.assert_array_equal(ms.descriptors, mt.descriptors)


def test_updates_only_touch_background_or_their_neighbours():
    cfg = BsConfig(p_replace=1.0, p_neighbor=0.0, samples=3)
    scene = np.full((5, 5), 100, np.uint8)
    model = bg_init(scene, cfg)
    before = model.intensities.copy()
    moved = scene.copy()
    moved[2, 2] = 250
    out, model = bg_apply(model, moved)
    assert out[2, 2] == 255
    # the foreground pixel's bank is untouched
    np.testing.assert_array_equal(model.intensities[:, 2, 2], before[:, 2, 2])
    # every background pixel replaced exactly one sample with its current value
    changed = (model.intensities != before).sum(axis=0)
    assert changed.max() <= 1


def test_apply_dimension_mismatch():
    model = bg_init(np.zeros((4, 4), np.uint8), BsConfig())
    with pytest.raises(ValueError, match="dimension mismatch"):
        bg_apply(model, np.zeros((4, 5), np.uint8))


def test_config_validation_lists_fields():
    errors = BsConfig(mode="x", samples=0, p_replace=2.0).validate()
    joined = "\n".join(errors)
    assert "bs.mode" in joined and "bs.samples" in joined and "bs.p_replace" in joined
