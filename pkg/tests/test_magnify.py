import numpy as np
import pytest

from ctrlmag.magnify import MagnifyConfig, effective_factor, magnify_frame, magnify_sequence, warp_amplified
from ctrlmag.masking import SofteningSpec, dilate
from ctrlmag.synth import SceneSpec, make_scene, measure_centroid, search_region


@pytest.fixture(scope="module")
def half_pixel_pair():
    # f / fps = 1/4 puts frame 1 at the crest: gt(1) = 0.5 px
    spec = SceneSpec(frames=2, fps=30, frequency=7.5, amplitude=0.5)
    frames, mask0, truth = make_scene(spec)
    return frames, mask0, truth


def test_bypass_alpha_one(half_pixel_pair):
    frames, mask0, _ = half_pixel_pair
    out = magnify_frame(frames[0], frames[1], mask0.astype(float), 1.0)
    assert out.tobytes() == frames[1].tobytes()


def test_bypass_zero_map(half_pixel_pair):
    frames, _, _ = half_pixel_pair
    out = magnify_frame(frames[0], frames[1], np.zeros(frames[0].shape[:2]), 16.0)
    assert out.tobytes() == frames[1].tobytes()


def test_half_pixel_disk_magnified_eightfold(half_pixel_pair):
    frames, mask0, truth = half_pixel_pair
    out = magnify_frame(frames[0], frames[1], mask0.astype(float), 8.0)
    reg = search_region(truth, 0, 12)
    shift = measure_centroid(out, reg)[0] - measure_centroid(frames[0], reg)[0]
    assert shift == pytest.approx(4.0, abs=0.5)


def test_backward_method_selectable(half_pixel_pair):
    frames, mask0, _ = half_pixel_pair
    a = magnify_frame(frames[0], frames[1], mask0.astype(float), 8.0, method="backward")
    b = magnify_frame(frames[0], frames[1], mask0.astype(float), 8.0)
    assert a.shape == b.shape and not np.array_equal(a, b)
    with pytest.raises(ValueError):
        magnify_frame(frames[0], frames[1], mask0.astype(float), 8.0, method="nearest")


def test_zero_map_region_matches_current(half_pixel_pair):
    frames, mask0, _ = half_pixel_pair
    out = magnify_frame(frames[0], frames[1], mask0.astype(float), 8.0)
    far = ~dilate(mask0, 8)
    assert np.abs(out - frames[1])[far].mean() < 0.02


def test_effective_factor_bounds():
    m = np.linspace(-0.5, 1.5, 41).reshape(1, -1)
    a = effective_factor(m, 6.0)
    assert a.min() == 1.0 and a.max() == 6.0
    assert effective_factor(np.array([0.5]), 3.0)[0] == 2.0


def test_warp_zero_flow_is_identity():
    ref = np.random.default_rng(0).random((20, 24, 1))
    out = warp_amplified(ref, np.zeros((20, 24, 2)), np.ones((20, 24)), 8.0)
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_magnify_frame_rejects_bad_input():
    z = np.zeros((8, 8))
    with pytest.raises(ValueError):
        magnify_frame(z, z, z, 0.5)
    with pytest.raises(ValueError):
        magnify_frame(z, np.zeros((8, 9)), z, 2.0)


@pytest.mark.parametrize("kw", [{"alpha": 0.9}, {"clip_length": 1}, {"warp_method": "x"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        MagnifyConfig(**kw)


def test_single_frame_sequence():
    frames, mask0, _ = make_scene(SceneSpec(frames=1))
    res = magnify_sequence(frames, mask0)
    assert len(res.frames) == 1 and res.frames[0].tobytes() == frames[0].tobytes()


def test_empty_sequence_rejected():
    with pytest.raises(ValueError):
        magnify_sequence([], np.zeros((4, 4), bool))


def test_mask_size_mismatch_rejected():
    frames, _, _ = make_scene(SceneSpec(frames=2))
    with pytest.raises(ValueError):
        magnify_sequence(frames, np.zeros((10, 10), bool))


@pytest.fixture(scope="module")
def ten_frames():
    frames, mask0, truth = make_scene(SceneSpec(frames=10, width=128, height=128, center=(64, 64), radius=30))
    return frames, mask0, truth


def test_reference_updates(ten_frames):
    frames, mask0, _ = ten_frames
    res = magnify_sequence(frames, mask0, MagnifyConfig(alpha=4, clip_length=4))
    refs = [rec["reference"] for rec in res.records]
    updates = [t for t in range(1, 10) if refs[t] != refs[t - 1]]
    assert updates == [3, 6, 9]
    for t in (0, 3, 6, 9):
        assert res.frames[t].tobytes() == frames[t].tobytes()
    assert len(res.frames) == len(res.maps) == len(res.masks) == 10


def test_maps_follow_construction(ten_frames):
    frames, mask0, _ = ten_frames
    res = magnify_sequence(frames, mask0, MagnifyConfig(alpha=4))
    for m, inner, rec in zip(res.maps, res.masks, res.records):
        assert np.all(m[inner] == 1.0)
        assert not m[~dilate(inner, rec["radius"])].any()
        assert m.min() >= 0 and m.max() <= 1


def test_thread_count_does_not_change_output(ten_frames):
    frames, mask0, _ = ten_frames
    cfg = MagnifyConfig(alpha=8, softening=SofteningSpec(mode="motion"))
    a = magnify_sequence(frames, mask0, cfg, threads=1)
    b = magnify_sequence(frames, mask0, cfg, threads=4)
    for x, y in zip(a.frames, b.frames):
        assert x.tobytes() == y.tobytes()
    assert a.records == b.records


def test_tracking_collapse_continues_with_zero_maps():
    frames, _, _ = make_scene(SceneSpec(frames=4))
    res = magnify_sequence(frames, np.zeros(frames[0].shape[:2], bool), MagnifyConfig(alpha=8))
    assert res.events and res.events[0]["event"] == "tracking_collapse"
    assert len(res.frames) == 4
    assert all(not m.any() for m in res.maps)
    assert all(f.tobytes() == g.tobytes() for f, g in zip(res.frames, frames))


def test_sinusoid_trajectory_alpha_four(easy_scene):
    _, frames, mask0, truth = easy_scene
    alpha = 4
    res = magnify_sequence(frames, mask0, MagnifyConfig(alpha=alpha))
    misses = 0
    for t in range(len(frames)):
        r = res.schedule.reference_of(t)
        reg = search_region(truth, r, 8)
        got = np.subtract(measure_centroid(res.frames[t], reg), measure_centroid(frames[r], reg))
        want = alpha * (truth.displacement[t] - truth.displacement[r])
        misses += np.hypot(*(got - want)) > 0.5 + 0.1 * np.hypot(*want)
    assert misses == 0
