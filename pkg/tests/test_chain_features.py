import numpy as np
import pytest

from glyphforge import chain_features as cf
from glyphforge import image_prep as ip
from glyphforge.errors import ExtractionError


def square_contour(side, offset=(0, 0)):
    img = np.zeros((60, 60), bool)
    r, c = offset
    img[r : r + side, c : c + side] = True
    return ip.find_contour(img)


def chain_pixels(chain):
    pixels = {chain.start}
    pixels.update(chain.move_origins)
    x, y = chain.start
    for code in chain.moves:
        dx, dy = cf.DIRECTIONS[code]
        x, y = x + dx, y + dy
        pixels.add((x, y))
    return pixels


class TestDirections:
    def test_opposite_codes_cancel(self):
        for k in range(8):
            dx1, dy1 = cf.DIRECTIONS[k]
            dx2, dy2 = cf.DIRECTIONS[(k + 4) % 8]
            assert (dx1 + dx2, dy1 + dy2) == (0, 0)

    def test_convention(self):
        # 0=E, 2=N, 4=W, 6=S with y growing downward
        assert cf.DIRECTIONS[0] == (1, 0)
        assert cf.DIRECTIONS[2] == (0, -1)
        assert cf.DIRECTIONS[4] == (-1, 0)
        assert cf.DIRECTIONS[6] == (0, 1)


class TestTraceContours:
    def test_empty_image(self):
        assert cf.trace_contours(np.zeros((60, 60), bool)) == []

    def test_single_pixel_has_no_moves(self):
        img = np.zeros((60, 60), bool)
        img[7, 9] = True
        chains = cf.trace_contours(img)
        assert len(chains) == 1
        assert chains[0].start == (9, 7)
        assert chains[0].moves == ()

    def test_adjacent_pair(self):
        img = np.zeros((60, 60), bool)
        img[3, 5] = img[3, 6] = True
        chains = cf.trace_contours(img)
        assert len(chains) == 1
        assert chains[0].moves == (0, 4)

    def test_3x3_square_clockwise(self):
        chains = cf.trace_contours(square_contour(3))
        assert len(chains) == 1
        assert chains[0].start == (0, 0)
        assert chains[0].moves == (0, 0, 6, 6, 4, 4, 2, 2)

    def test_closed_replay_returns_to_start(self):
        chains = cf.trace_contours(square_contour(5, (10, 20)))
        (chain,) = chains
        x, y = chain.start
        for code in chain.moves:
            dx, dy = cf.DIRECTIONS[code]
            x, y = x + dx, y + dy
        assert (x, y) == chain.start

    def test_components_in_scan_order(self):
        img = np.zeros((60, 60), bool)
        img[40, 2] = True
        img[5, 50] = True
        chains = cf.trace_contours(img)
        assert [ch.start for ch in chains] == [(50, 5), (2, 40)]

    def test_coverage_and_determinism_on_random_blobs(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            blob = rng.random((60, 60)) < 0.3
            contour = ip.find_contour(blob)
            chains = cf.trace_contours(contour)
            again = cf.trace_contours(contour)
            assert chains == again
            visited = set()
            for ch in chains:
                px = chain_pixels(ch)
                assert not (px & visited)  # each pixel in exactly one chain
                visited |= px
            expected = set(zip(*np.nonzero(contour)[::-1]))
            assert visited == expected


class TestChainHistogram:
    def test_empty_is_zeros(self):
        out = cf.chain_histogram([])
        assert out.shape == (200,)
        assert not out.any()

    def test_single_move_indexing(self):
        chain = cf.ChainCode(start=(0, 0), moves=(0,), move_origins=((0, 0),))
        out = cf.chain_histogram([chain])
        assert out[0] == 1
        assert out.sum() == 1

    def test_square_in_zone_zero(self):
        chains = cf.trace_contours(square_contour(3))
        out = cf.chain_histogram(chains)
        assert np.array_equal(out[:8], [2, 0, 2, 0, 2, 0, 2, 0])
        assert not out[8:].any()

    def test_conservation(self):
        rng = np.random.default_rng(22)
        blob = rng.random((60, 60)) < 0.35
        chains = cf.trace_contours(ip.find_contour(blob))
        out = cf.chain_histogram(chains)
        assert out.sum() == sum(len(ch.moves) for ch in chains)

    def test_normalize_flag(self):
        chains = cf.trace_contours(square_contour(5))
        out = cf.chain_histogram(chains, normalize=True)
        assert out.sum() == pytest.approx(1.0)

    def test_zone_translation_permutes_blocks(self):
        chains_a = cf.trace_contours(square_contour(7, (2, 3)))
        chains_b = cf.trace_contours(square_contour(7, (14, 15)))  # +1 zone each way
        hist_a = cf.chain_histogram(chains_a).reshape(25, 8)
        hist_b = cf.chain_histogram(chains_b).reshape(25, 8)
        multiset = lambda h: sorted(map(tuple, h))
        assert multiset(hist_a) == multiset(hist_b)

    def test_out_of_bounds_origin_rejected(self):
        chain = cf.ChainCode(start=(70, 0), moves=(0,), move_origins=((70, 0),))
        with pytest.raises(ExtractionError):
            cf.chain_histogram([chain])

    def test_every_entry_nonnegative(self):
        rng = np.random.default_rng(23)
        blob = rng.random((60, 60)) < 0.4
        out = cf.extract_chain_features(ip.find_contour(blob))
        assert (out >= 0).all()
