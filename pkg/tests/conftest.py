import numpy as np
import pytest

from ctrlmag.synth import SceneSpec, make_scene


def band_noise(n, seed, sigma=2.0, m=None):
    """Periodic band-limited noise, intensity 0.5 +/- ~0.15, clipped to [0, 1]."""
    m = m or n
    rng = np.random.default_rng(seed)
    white = rng.standard_normal((n, m))
    fy = np.fft.fftfreq(n)[:, None]
    fx = np.fft.fftfreq(m)[None, :]
    tex = np.real(np.fft.ifft2(np.fft.fft2(white) * np.exp(-2 * (np.pi * sigma) ** 2 * (fx**2 + fy**2))))
    return np.clip(0.5 + 0.15 * tex / tex.std(), 0.0, 1.0)


def fourier_shift(img, dx, dy):
    """Content moved by (+dx, +dy): out(x) = img(x - d), exact for periodic band-limited input."""
    n, m = img.shape
    fy = np.fft.fftfreq(n)[:, None]
    fx = np.fft.fftfreq(m)[None, :]
    return np.real(np.fft.ifft2(np.fft.fft2(img) * np.exp(-2j * np.pi * (fx * dx + fy * dy))))


def translated_pair(dx, dy, n=128, seed=1):
    """128x128 crops of a larger periodic texture and its translation."""
    big = band_noise(2 * n, seed)
    moved = np.clip(fourier_shift(big, dx, dy), 0.0, 1.0)
    s = slice(n // 2, n // 2 + n)
    return big[s, s], moved[s, s]


def disk(n, cx, cy, r):
    ys, xs = np.mgrid[0:n, 0:n]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def iou(a, b):
    return (a & b).sum() / max((a | b).sum(), 1)


@pytest.fixture(scope="session")
def easy_scene():
    spec = SceneSpec()
    frames, mask0, truth = make_scene(spec)
    return spec, frames, mask0, truth
