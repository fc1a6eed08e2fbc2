"""Patch-based grayscale denoising by sparse coding against an overcomplete dictionary.

Images are float rasters in [0, 1], stored row-major as (height, width)
arrays; 8-bit files are scaled by 1/255 on read and back on write. Each
sliding-window patch is mean-centered, sparse-coded with the robust
hard-thresholding fitter, reconstructed, and averaged back into place.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hubniht import SparseProblem, fit_sparse, reconstruct

PSNR_CAP_DB = 99.0  # reported for identical images (MSE = 0)


@dataclass(frozen=True)
class GrayImage:
    """Grayscale raster: (height, width) float64 array with values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=float)
        if px.ndim != 2:
            raise ValueError(f"expected a 2-D pixel array, got shape {px.shape}")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixel values must be finite and within [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


@dataclass(frozen=True)
class Dictionary:
    """Atom matrix of shape (atom_dim, n_atoms) with unit-norm columns."""

    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.ascontiguousarray(self.atoms, dtype=float)
        if atoms.ndim != 2:
            raise ValueError(f"expected a 2-D atom matrix, got shape {atoms.shape}")
        norms = np.linalg.norm(atoms, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("dictionary columns must have unit norm (within 1e-10)")
        object.__setattr__(self, "atoms", atoms)

    @property
    def atom_dim(self):
        return self.atoms.shape[0]

    @property
    def n_atoms(self):
        return self.atoms.shape[1]


@dataclass(frozen=True)
class PatchGrid:
    """Sliding-window layout: square patch size and step between windows."""

    patch_size: int = 8
    stride: int = 2

    def __post_init__(self):
        if self.patch_size < 2:
            raise ValueError(f"patch_size must be at least 2, got {self.patch_size}")
        if self.stride < 1:
            raise ValueError(f"stride must be at least 1, got {self.stride}")

    def positions(self, height, width):
        """Top-left window corners, row-major order."""
        ps = self.patch_size
        return [
            (i, j)
            for i in range(0, height - ps + 1, self.stride)
            for j in range(0, width - ps + 1, self.stride)
        ]

    def coverage(self, height, width):
        """Per-pixel count of covering windows."""
        counts = np.zeros((height, width), dtype=int)
        ps = self.patch_size
        for i, j in self.positions(height, width):
            counts[i : i + ps, j : j + ps] += 1
        return counts


def _dct_basis(n):
    """Orthonormal 1-D DCT-II basis, rows indexed by frequency."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    basis = np.cos(np.pi * (i + 0.5) * k / n)
    basis[0] *= math.sqrt(1.0 / n)
    basis[1:] *= math.sqrt(2.0 / n)
    return basis


def _haar_basis(n):
    """Orthonormal 1-D Haar basis for n a power of two, rows as basis functions."""
    if n & (n - 1) != 0:
        raise ValueError(f"Haar basis needs a power-of-two size, got {n}")
    h = np.array([[1.0]])
    while h.shape[0] < n:
        m = h.shape[0]
        top = np.kron(h, [1.0, 1.0])
        bottom = np.kron(np.eye(m), [1.0, -1.0])
        h = np.vstack([top, bottom]) / math.sqrt(2.0)
    return h


def build_dictionary(patch_size, kind="dct-haar-spike", path=None):
    """Overcomplete patch dictionary with unit-norm atoms.

    The default kind stacks three orthonormal bases over patch_size^2 pixels
    (2-D DCT, 2-D Haar, coordinate spikes), giving 3 * patch_size^2 atoms;
    the Haar block requires a power-of-two patch size. ``kind="from-file"``
    loads a whitespace-separated text file instead (see ``load_dictionary``).
    """
    if patch_size < 2:
        raise ValueError(f"patch_size must be at least 2, got {patch_size}")
    if kind == "from-file":
        if path is None:
            raise ValueError("kind='from-file' requires a path")
        return load_dictionary(path)
    if kind != "dct-haar-spike":
        raise ValueError(f"unknown dictionary kind {kind!r}")
    d = patch_size * patch_size
    dct = np.kron(_dct_basis(patch_size), _dct_basis(patch_size)).T
    haar = np.kron(_haar_basis(patch_size), _haar_basis(patch_size)).T
    spikes = np.eye(d)
    atoms = np.hstack([dct, haar, spikes])
    atoms /= np.linalg.norm(atoms, axis=0)
    return Dictionary(atoms=atoms)


def load_dictionary(path):
    """Read a plain-text dictionary: first line "d p", then d rows of p reals.

    Columns are normalized to unit length on load.
    """
    try:
        with open(path, "r", encoding="ascii") as fh:
            tokens = fh.read().split()
    except OSError as exc:
        raise OSError(f"cannot read dictionary file {path}: {exc}") from exc
    if len(tokens) < 2:
        raise ValueError(f"dictionary file {path}: missing 'd p' header")
    try:
        d, p = int(tokens[0]), int(tokens[1])
        values = np.array([float(t) for t in tokens[2:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"dictionary file {path}: {exc}") from exc
    if d < 1 or p < 1 or values.size != d * p:
        raise ValueError(
            f"dictionary file {path}: expected {d}x{p} values, got {values.size}"
        )
    atoms = values.reshape(d, p)
    norms = np.linalg.norm(atoms, axis=0)
    if np.any(norms == 0):
        raise ValueError(f"dictionary file {path}: zero column cannot be normalized")
    return Dictionary(atoms=atoms / norms)


def save_dictionary(dictionary, path):
    """Write a dictionary in the plain-text format accepted by ``load_dictionary``."""
    atoms = dictionary.atoms
    lines = [f"{dictionary.atom_dim} {dictionary.n_atoms}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in atoms)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_pgm_tokens(data, count):
    """Yield header tokens (magic, width, height, maxval), '#' comments skipped.

    Returns the tokens and the offset of the byte after the single whitespace
    that terminates the last token.
    """
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise ValueError("truncated PGM header")
        ch = data[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            end = pos
            while end < len(data) and data[end : end + 1] not in b" \t\r\n#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
            if len(tokens) == count:
                if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
                    raise ValueError("PGM header must end with a whitespace byte")
                pos += 1
    return tokens, pos


def read_pgm(path):
    """Read a binary (P5) or ASCII (P2) PGM file with maxval up to 255."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read image {path}: {exc}") from exc
    if data[:2] not in (b"P5", b"P2"):
        raise ValueError(f"image {path}: not a P5/P2 PGM file")
    (magic, w_tok, h_tok, max_tok), offset = _read_pgm_tokens(data, 4)
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise ValueError(f"image {path}: bad header field: {exc}") from exc
    if width < 1 or height < 1 or not 1 <= maxval <= 255:
        raise ValueError(f"image {path}: unsupported dimensions or maxval")
    if magic == b"P5":
        raster = np.frombuffer(data, dtype=np.uint8, offset=offset)
        if raster.size < width * height:
            raise ValueError(f"image {path}: truncated raster")
        raster = raster[: width * height]
        if raster.max() > maxval:
            raise ValueError(f"image {path}: sample out of range")
    else:
        samples = data[offset:].split()
        if len(samples) < width * height:
            raise ValueError(f"image {path}: truncated raster")
        raster = np.array([int(s) for s in samples[: width * height]], dtype=float)
        if raster.min() < 0 or raster.max() > maxval:
            raise ValueError(f"image {path}: sample out of range")
    pixels = raster.reshape(height, width).astype(float) / maxval
    return GrayImage(pixels=pixels)


def write_pgm(img, path):
    """Write a binary P5 PGM with maxval 255 (canonical header, byte-stable)."""
    raster = np.rint(img.pixels * 255.0).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header + raster.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write image {path}: {exc}") from exc


def add_impulsive_noise(img, eps, seed):
    """Replace each pixel independently with probability eps by 0 or 1 (fair coin).

    Deterministic for a fixed seed: the replacement mask is drawn first, then
    the replacement values, both from one PCG64 stream.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be a probability, got {eps}")
    rng = np.random.default_rng(seed)
    replace = rng.random(img.pixels.shape) < eps
    values = (rng.random(img.pixels.shape) < 0.5).astype(float)
    return GrayImage(pixels=np.where(replace, values, img.pixels))


def denoise_image(img, dictionary, grid, k, cfg):
    """Sparse-code every window against the dictionary and average the overlaps.

    Each patch is mean-centered before coding and the mean is re-added to its
    reconstruction; pixels not covered by any window (possible at the
    right/bottom edge when stride > 1) are copied from the input. Output is
    clamped to [0, 1]. Patches are processed in a fixed row-major order, so
    the result is reproducible bit for bit.
    """
    ps = grid.patch_size
    if dictionary.atom_dim != ps * ps:
        raise ValueError(
            f"dictionary atom_dim {dictionary.atom_dim} does not match patch size {ps}^2"
        )
    if img.height < ps or img.width < ps:
        raise ValueError(f"image {img.height}x{img.width} smaller than patch size {ps}")
    pixels = img.pixels
    accum = np.zeros_like(pixels)
    counts = np.zeros(pixels.shape, dtype=int)
    for i, j in grid.positions(img.height, img.width):
        patch = pixels[i : i + ps, j : j + ps].ravel()
        mean = patch.mean()
        prob = SparseProblem(y=patch - mean, X=dictionary.atoms, K=k)
        model = fit_sparse(prob, cfg)
        recon = reconstruct(prob, model) + mean
        accum[i : i + ps, j : j + ps] += recon.reshape(ps, ps)
        counts[i : i + ps, j : j + ps] += 1
    covered = counts > 0
    out = np.where(covered, accum / np.maximum(counts, 1), pixels)
    return GrayImage(pixels=np.clip(out, 0.0, 1.0))


def psnr(a, b):
    """Peak signal-to-noise ratio in dB for [0, 1] images; capped at 99 dB."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    mse = float(np.mean((a.pixels - b.pixels) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)
