"""Luma-driven morphological anti-aliasing over the resolved 8-bit image.

This runs after the multisample resolve, entirely in display-referred
space.  Per pixel: compute Rec.601 luma, skip low-contrast neighborhoods
(threshold max(EDGE_MIN_CONTRAST, EDGE_RELATIVE * local max luma)),
classify the edge as horizontal or vertical from 3x3 gradients, then
blend toward the neighbor across the edge by
clamp(|avg4 - L_center| / contrast, 0, BLEND_CAP).  Border pixels pass
through untouched.  The filter is a pure function of the input image.
"""

from __future__ import annotations

import numpy as np

from .framebuffer import LdrImage

EDGE_MIN_CONTRAST = 0.0312
EDGE_RELATIVE = 0.125
BLEND_CAP = 0.75

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def luma(pixels: np.ndarray) -> np.ndarray:
    """Rec.601 luma of (..., 3) uint8 or unit-float pixels, in [0, 1]."""
    p = np.asarray(pixels, dtype=np.float64)
    if pixels.dtype == np.uint8:
        p = p / 255.0
    return p @ _LUMA_WEIGHTS


def fxaa_pass(image: LdrImage) -> LdrImage:
    h, w = image.height, image.width
    if h < 3 or w < 3:
        return LdrImage(pixels=image.pixels.copy())

    rgb = image.pixels.astype(np.float64) / 255.0
    lum = luma(image.pixels)

    # 3x3 neighborhood views around interior pixels
    c = lum[1:-1, 1:-1]
    n = lum[:-2, 1:-1]
    s = lum[2:, 1:-1]
    west = lum[1:-1, :-2]
    e = lum[1:-1, 2:]
    nw = lum[:-2, :-2]
    ne = lum[:-2, 2:]
    sw = lum[2:, :-2]
    se = lum[2:, 2:]

    cross_max = np.maximum.reduce([c, n, s, west, e])
    cross_min = np.minimum.reduce([c, n, s, west, e])
    contrast = cross_max - cross_min
    active = contrast >= np.maximum(EDGE_MIN_CONTRAST, EDGE_RELATIVE * cross_max)

    # Sobel-style gradients: a strong vertical luma gradient means a
    # horizontal edge, so the blend partner is north or south.
    grad_v = np.abs(nw + 2.0 * n + ne - sw - 2.0 * s - se)
    grad_h = np.abs(nw + 2.0 * west + sw - ne - 2.0 * e - se)
    horizontal_edge = grad_v >= grad_h

    pick_ns = np.abs(n - c) >= np.abs(s - c)
    pick_we = np.abs(west - c) >= np.abs(e - c)

    neighbor = np.empty(rgb[1:-1, 1:-1].shape, dtype=np.float64)
    n_rgb = rgb[:-2, 1:-1]
    s_rgb = rgb[2:, 1:-1]
    w_rgb = rgb[1:-1, :-2]
    e_rgb = rgb[1:-1, 2:]
    ns = np.where(pick_ns[..., None], n_rgb, s_rgb)
    we = np.where(pick_we[..., None], w_rgb, e_rgb)
    neighbor[:] = np.where(horizontal_edge[..., None], ns, we)

    avg4 = (n + s + west + e) * 0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.abs(avg4 - c) / contrast
    factor = np.clip(np.where(contrast > 0.0, factor, 0.0), 0.0, BLEND_CAP)
    factor = np.where(active, factor, 0.0)

    blended = rgb[1:-1, 1:-1] * (1.0 - factor[..., None]) + neighbor * factor[..., None]
    out = image.pixels.copy()
    out[1:-1, 1:-1] = np.floor(np.clip(blended, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return LdrImage(pixels=out)
