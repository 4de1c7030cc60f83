"""Deterministic grayscale rasterisation of a screen and PGM export.

Layout: a dark title banner, then one row per element (kind icon + label
glyphs). Data state is drawn only inside the rightmost strip of each row:
toggles as a switch whose knob slides left/right, text inputs as a value
glyph with a fixed ink count per pixel row. Both move ink horizontally
inside a single 9x8 difference-hash cell, so a screen keeps its perceptual
hash across data states while its pixels still differ.
"""

import hashlib
from itertools import combinations
from pathlib import Path

import numpy as np

DEFAULT_WIDTH = 96
DEFAULT_HEIGHT = 160

BANNER_HEIGHT = 18
ROWS_TOP = 22
MAX_ROW_HEIGHT = 15

_KIND_SHADE = {"nav": 60, "toggle": 90, "input": 120, "back": 30, "terminal": 150}

# all ways to ink 4 of 8 pixel columns
_FOUR_OF_EIGHT = list(combinations(range(8), 4))


def _glyph_shade(ch, interactable):
    shade = 20 + (ord(ch) * 37) % 140
    return shade if interactable else min(235, shade + 80)


def _draw_text(grid, text, x0, y0, height, interactable, x_max):
    for i, ch in enumerate(text):
        x = x0 + 4 * i
        if x + 3 > x_max:
            break
        if ch == " ":
            continue
        grid[y0 : y0 + height, x : x + 3] = _glyph_shade(ch, interactable)


def _indicator_origin(width):
    # leftmost pixel of the last horizontal dHash cell, plus one pixel margin
    return (8 * width) // 9 + 1


def render_screen(screen, values, width=DEFAULT_WIDTH, height=DEFAULT_HEIGHT):
    """Render ``screen`` (a SimScreenSpec) with field ``values`` to a uint8 grid.

    Returns ``(grid, bboxes)`` where ``bboxes`` maps element id to
    ``(x0, y0, x1, y1)`` (all zeros for rows that fall off-screen).
    """
    grid = np.full((height, width), 255, dtype=np.uint8)
    grid[:BANNER_HEIGHT, :] = 40
    _draw_text_light(grid, screen.title, 2, 5, 8, width - 2)

    n = len(screen.elements)
    row_h = max(6, min(MAX_ROW_HEIGHT, (height - ROWS_TOP) // max(n, 1)))
    ind_x = _indicator_origin(width)
    bboxes = {}
    for j, el in enumerate(screen.elements):
        y0 = ROWS_TOP + row_h * j
        if y0 + row_h > height:
            bboxes[el.element_id] = (0, 0, 0, 0)
            continue
        bboxes[el.element_id] = (0, y0, width, y0 + row_h - 1)
        glyph_h = max(2, row_h - 5)
        if el.interactable:
            grid[y0 + 1 : y0 + 1 + glyph_h, 2:8] = _KIND_SHADE[el.kind]
        _draw_text(grid, el.label, 10, y0 + 1, glyph_h, el.interactable, ind_x - 2)
        if el.kind == "toggle":
            _draw_switch(grid, ind_x, y0 + 2, bool(values.get(el.field)))
        elif el.kind == "input":
            _draw_value(grid, ind_x, y0 + 2, str(values.get(el.field, "")))
    return grid, bboxes


def _draw_text_light(grid, text, x0, y0, h, x_max):
    for i, ch in enumerate(text):
        x = x0 + 4 * i
        if x + 3 > x_max:
            break
        if ch != " ":
            grid[y0 : y0 + h, x : x + 3] = 120 + (ord(ch) * 53) % 120


def _draw_switch(grid, x, y, on):
    # track of 9 px, knob of 4 px at either end; ink per row is constant
    grid[y : y + 4, x : x + 9] = 200
    kx = x + 5 if on else x
    grid[y : y + 4, kx : kx + 4] = 0


def _draw_value(grid, x, y, value):
    digest = hashlib.sha1(value.encode("utf-8")).digest()
    for r in range(3):
        cols = _FOUR_OF_EIGHT[digest[r] % len(_FOUR_OF_EIGHT)]
        grid[y + r, x : x + 8] = 230
        for c in cols:
            grid[y + r, x + c] = 10


def write_pgm(grid, path):
    grid = np.asarray(grid, dtype=np.uint8)
    h, w = grid.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + grid.tobytes())
    return path


def read_pgm(path):
    data = Path(path).read_bytes()
    header = []
    pos = 0
    while len(header) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        header.append(data[pos:end])
        pos = end
    pos += 1  # exactly one whitespace byte separates header and raster
    if header[0] != b"P5":
        raise ValueError(f"{path} is not a binary PGM")
    w, h, maxval = int(header[1]), int(header[2]), int(header[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    pixels = data[pos : pos + w * h]
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy()
