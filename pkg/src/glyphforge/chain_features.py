"""Freeman chain-code contour tracing and the 200-d zoned direction histogram.

Direction convention (y grows downward, screen coordinates):
    0=E, 1=NE, 2=N, 3=NW, 4=W, 5=SW, 6=S, 7=SE
so code k and code (k+4) % 8 are opposite moves.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ExtractionError

# (dx, dy) per direction code, y down
DIRECTIONS = (
    (1, 0), (1, -1), (0, -1), (-1, -1),
    (-1, 0), (-1, 1), (0, 1), (1, 1),
)

_DELTA_TO_CODE = {d: k for k, d in enumerate(DIRECTIONS)}

CHAIN_ZONES = 5
CHAIN_DIM = CHAIN_ZONES * CHAIN_ZONES * 8


@dataclass(frozen=True)
class ChainCode:
    """One traced contour: start pixel (col, row) plus its moves.

    move_origins[i] is the pixel move i departs from; replaying moves from
    start visits exactly the traced contour pixels.
    """

    start: tuple
    moves: tuple
    move_origins: tuple


def _code_between(p, q) -> int:
    return _DELTA_TO_CODE[(q[0] - p[0], q[1] - p[1])]


def _cycle_area2(cycle) -> int:
    """Twice the shoelace area; positive = clockwise on screen (y down)."""
    area = 0
    n = len(cycle)
    for i in range(n):
        x0, y0 = cycle[i]
        x1, y1 = cycle[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return area


def _chain_from_cycle(cycle, closed: bool) -> ChainCode:
    moves = []
    origins = []
    last = len(cycle) if closed else len(cycle) - 1
    for i in range(last):
        p = cycle[i]
        q = cycle[(i + 1) % len(cycle)]
        moves.append(_code_between(p, q))
        origins.append(p)
    return ChainCode(start=cycle[0], moves=tuple(moves), move_origins=tuple(origins))


def trace_contours(contour_img: np.ndarray) -> list:
    """Trace every contour pixel into clockwise minimum-code-first chains.

    Walks start at the topmost-then-leftmost unvisited contour pixel; the
    first move takes the unvisited contour neighbor with the smallest
    direction code. Subsequent moves follow the clockwise border scan:
    neighbors are probed in clockwise rotation (descending code) starting
    just past the backtrack direction of the previous move. A walk that
    ends adjacent to its start is closed with the final move; closed walks
    that still come out counterclockwise (signed-area test) are reversed
    and their codes complemented so every emitted chain runs clockwise.
    """
    ys, xs = np.nonzero(contour_img)
    pixels = set(zip(xs.tolist(), ys.tolist()))
    # scan order: topmost, then leftmost
    order = sorted(pixels, key=lambda p: (p[1], p[0]))
    visited = set()
    chains = []
    for start in order:
        if start in visited:
            continue
        path = [start]
        visited.add(start)
        prev_code = None
        while True:
            p = path[-1]
            if prev_code is None:
                probe = range(8)  # minimum chain code number first
            else:
                # clockwise sweep from one past the backtrack direction
                first = (prev_code + 3) % 8
                probe = [(first - i) % 8 for i in range(8)]
            best = None
            for code in probe:
                dx, dy = DIRECTIONS[code]
                q = (p[0] + dx, p[1] + dy)
                if q in pixels and q not in visited:
                    best = q
                    prev_code = code
                    break
            if best is None:
                break
            visited.add(best)
            path.append(best)
        closed = False
        if len(path) > 1:
            dx = start[0] - path[-1][0]
            dy = start[1] - path[-1][1]
            closed = (dx, dy) in _DELTA_TO_CODE
        if closed and _cycle_area2(path) < 0:
            path = [path[0]] + path[:0:-1]
        chains.append(_chain_from_cycle(path, closed))
    return chains


def chain_histogram(
    chains, image_size: int = 60, normalize: bool = False
) -> np.ndarray:
    """Zoned 8-direction histogram: 5x5 zones (row-major) x 8 codes = 200.

    Each move increments bin (zone of its origin pixel, direction code).
    With normalize=True the histogram is divided by the total move count.
    """
    if image_size % CHAIN_ZONES != 0:
        raise ExtractionError(f"image size {image_size} not divisible by {CHAIN_ZONES}")
    zone_px = image_size // CHAIN_ZONES
    values = np.zeros(CHAIN_DIM, dtype=np.float64)
    for chain in chains:
        for code, (x, y) in zip(chain.moves, chain.move_origins):
            if not (0 <= x < image_size and 0 <= y < image_size):
                raise ExtractionError(f"move origin {(x, y)} outside image")
            zone = (y // zone_px) * CHAIN_ZONES + (x // zone_px)
            values[zone * 8 + code] += 1.0
    if normalize:
        total = values.sum()
        if total > 0:
            values /= total
    return values


def extract_chain_features(
    contour_img: np.ndarray, normalize: bool = False
) -> np.ndarray:
    """Trace a contour image and histogram it in one step."""
    size = contour_img.shape[0]
    return chain_histogram(trace_contours(contour_img), size, normalize=normalize)
