import numpy as np

from ..exceptions import ValidationException

SeedLike = int | np.random.Generator | None


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_simplex(rng: np.random.Generator, k: int) -> np.ndarray:
    """Uniform sample from the (k-1)-simplex by the spacings of sorted uniforms.

    Zero-length spacings (ties) are resampled so the result is strictly positive.
    """
    if k < 1:
        raise ValidationException(f"simplex dimension must be positive, got {k}", {"k": k})
    while True:
        cuts = np.sort(rng.uniform(size=k - 1))
        weights = np.diff(np.concatenate(([0.0], cuts, [1.0])))
        if np.all(weights > 0):
            return weights / weights.sum()
