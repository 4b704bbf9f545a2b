"""Synthetic low-rank image sets with gross corruptions.

Clean images are smooth: a fixed offset plus a random combination of ``rank``
low-frequency cosine basis images.  Corruptions are either a value-noise
texture patch pasted at a random location or replacement of the whole image
by one shared texture image.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .rng import SplitMix64, derive_seed

MODES = ("none", "occlusion", "replacement")

# (vertical, horizontal) cosine frequencies, in order of use
_FREQUENCIES = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2), (3, 3), (1, 4), (4, 1)]


@dataclass
class SynthConfig:
    n: int = 50
    height: int = 128
    width: int = 128
    rank: int = 3
    mode: str = "occlusion"
    fraction: float = 0.2
    patch: int = 45
    seed: int = 0
    spread: float = 0.35  # relative spread of the basis weights around their means
    noise: float = 0.003  # std of additive i.i.d. pixel noise on every observed image

    def validate(self):
        if self.n < 1 or self.height < 3 or self.width < 3:
            raise DomainError("need n >= 1 and images of at least 3x3 pixels")
        if not 1 <= self.rank <= len(_FREQUENCIES):
            raise DomainError(f"rank must be in [1, {len(_FREQUENCIES)}]")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if not 0.0 <= self.fraction <= 1.0:
            raise DomainError(f"fraction must lie in [0, 1], got {self.fraction}")
        if self.mode == "occlusion" and not 1 <= self.patch <= min(self.height, self.width):
            raise DomainError(f"patch size {self.patch} does not fit a {self.height}x{self.width} image")
        if self.spread < 0 or self.noise < 0:
            raise DomainError("spread and noise must be non-negative")
        return self


@dataclass
class Corruption:
    mode: str = "none"
    x: int = 0
    y: int = 0
    w: int = 0
    h: int = 0
    source: str = ""

    def to_dict(self):
        if self.mode == "none":
            return {"mode": "none"}
        if self.mode == "replacement":
            return {"mode": "replacement", "source": self.source}
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def clean_region(self, shape):
        """Mask of pixels untouched by this corruption."""
        mask = np.ones(shape, dtype=bool)
        if self.mode == "occlusion":
            mask[self.y : self.y + self.h, self.x : self.x + self.w] = False
        elif self.mode == "replacement":
            mask[:] = False
        return mask


@dataclass
class SyntheticDataset:
    config: SynthConfig
    observed: np.ndarray  # (n, h, w)
    clean: np.ndarray  # (n, h, w)
    corruptions: list = field(default_factory=list)

    def clean_regions(self):
        shape = self.observed.shape[1:]
        return [c.clean_region(shape) for c in self.corruptions]


def cosine_basis(height, width, rank):
    y = (np.arange(height) + 0.5) / height
    x = (np.arange(width) + 0.5) / width
    return np.stack(
        [np.outer(np.cos(np.pi * fy * y), np.cos(np.pi * fx * x)) for fy, fx in _FREQUENCIES[:rank]]
    )


def value_noise(height, width, seed, cells=(16, 8, 4, 2)):
    """Multi-octave bilinear value noise in [0, 1]."""
    rng = SplitMix64(seed)
    out = np.zeros((height, width))
    amp_total = 0.0
    for octave, cell in enumerate(cells):
        gh, gw = height // cell + 2, width // cell + 2
        grid = rng.random((gh, gw))
        yy = np.arange(height) / cell
        xx = np.arange(width) / cell
        y0 = np.floor(yy).astype(int)
        x0 = np.floor(xx).astype(int)
        ty = (yy - y0)[:, None]
        tx = (xx - x0)[None, :]
        g00 = grid[np.ix_(y0, x0)]
        g01 = grid[np.ix_(y0, x0 + 1)]
        g10 = grid[np.ix_(y0 + 1, x0)]
        g11 = grid[np.ix_(y0 + 1, x0 + 1)]
        layer = (1 - ty) * ((1 - tx) * g00 + tx * g01) + ty * ((1 - tx) * g10 + tx * g11)
        amp = 0.6**octave
        out += amp * layer
        amp_total += amp
    out /= amp_total
    lo, hi = out.min(), out.max()
    return (out - lo) / (hi - lo) if hi > lo else np.full_like(out, 0.5)


def synthesize(config):
    """Build a :class:`SyntheticDataset`; deterministic in ``config.seed``."""
    cfg = config.validate()
    basis = cosine_basis(cfg.height, cfg.width, cfg.rank)
    rng = SplitMix64(derive_seed(cfg.seed, 1))
    means = rng.uniform(0.5, 1.0, cfg.rank) * np.where(rng.random(cfg.rank) < 0.5, -1.0, 1.0)
    weights = means[None, :] * (1.0 + cfg.spread * rng.uniform(-1.0, 1.0, (cfg.n, cfg.rank)))
    signal = np.tensordot(weights, basis, axes=1)
    scale = 0.45 / max(np.abs(signal).max(), 1e-12)
    clean = 0.5 + scale * signal

    observed = clean.copy()
    if cfg.noise > 0:
        observed += cfg.noise * SplitMix64(derive_seed(cfg.seed, 2)).normal(observed.shape)
    corruptions = [Corruption() for _ in range(cfg.n)]
    n_bad = int(round(cfg.fraction * cfg.n)) if cfg.mode != "none" else 0
    if n_bad:
        crng = SplitMix64(derive_seed(cfg.seed, 3))
        chosen = sorted(int(i) for i in crng.permutation(cfg.n)[:n_bad])
        tex_seed = derive_seed(cfg.seed, 4)
        source = f"value-noise:{tex_seed}"
        if cfg.mode == "occlusion":
            texture = value_noise(cfg.patch, cfg.patch, tex_seed)
            for i in chosen:
                y = crng.integers(0, cfg.height - cfg.patch + 1)
                x = crng.integers(0, cfg.width - cfg.patch + 1)
                observed[i, y : y + cfg.patch, x : x + cfg.patch] = texture
                corruptions[i] = Corruption("occlusion", x, y, cfg.patch, cfg.patch, source)
        else:
            texture = value_noise(cfg.height, cfg.width, tex_seed)
            for i in chosen:
                observed[i] = texture
                corruptions[i] = Corruption("replacement", source=source)
    np.clip(observed, 0.0, 1.0, out=observed)
    return SyntheticDataset(cfg, observed, clean, corruptions)
