"""Quick check of the Python bindings."""

import math

import isoising


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    assert close(isoising.coupling(math.pi / 4), 0.5 * math.log(1 + math.sqrt(2)), 1e-12)

    sq = isoising.Lattice.standard("square")
    assert (sq.vertex_count, sq.edge_count, sq.face_count) == (1, 2, 1)
    assert all(close(t, math.pi / 4, 1e-12) for t in sq.thetas())
    again = isoising.Lattice.from_json(sq.to_json())
    assert again.thetas() == sq.thetas()

    model = isoising.Model(sq)
    nu = 1 + math.sqrt(2)
    z = model.partition(1)["z"]
    assert close(z, 4 * nu * nu, 1e-12), z
    assert close(z, model.oracle_partition(1), 1e-9)

    long_edge = model.long_edge(0)
    p_torus = model.probability(2, [(long_edge, (0, 0))])
    p_gibbs = model.gibbs_probability([(long_edge, (0, 0))])
    assert close(p_gibbs, (2 + math.sqrt(2)) / 4, 1e-6), p_gibbs
    assert abs(p_torus - p_gibbs) < 0.1

    poly = model.characteristic_polynomial()
    assert len(poly) == 5
    f, err = model.free_energy()
    assert err < 1e-6 and math.isfinite(f)

    residuals = isoising.Model(isoising.Lattice.generic()).verify(samples=20)
    assert set(residuals) == {"i", "ii", "iii", "iv", "v", "vi", "vii"}
    assert max(residuals.values()) < 1e-7, residuals

    try:
        isoising.Lattice.standard("pentagonal")
    except isoising.IsoisingError:
        pass
    else:
        raise AssertionError("unknown lattice accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
