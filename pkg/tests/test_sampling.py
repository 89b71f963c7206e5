import numpy as np
import pytest
from scipy import stats

from qus.errors import DrawReuseError, SpaceError
from qus.monad import Dist, Kernel
from qus.sampling import (
    SampledKernel,
    Seed,
    bind,
    constant,
    draw_ledger,
    empirical,
    from_dist,
    pair,
    patch,
    pushforward,
    quantile,
    split,
    uniform,
)
from qus.spaces import FnPoint, atoms, product

B = atoms("B", ["0", "1"])
THREE = atoms("T", ["0", "1", "2"])


def test_split_is_deterministic():
    a, b = split(Seed.root(7))
    a2, b2 = split(Seed.root(7))
    assert a == a2 and b == b2
    assert a != b


def test_split_tree_has_no_collisions():
    level = [Seed.root(123)]
    states = {level[0].state}
    for _ in range(12):
        level = [c for s in level for c in split(s)]
        states.update(s.state for s in level)
    assert len(states) == sum(2 ** k for k in range(13))


def test_uniform_range_and_replay():
    s = Seed.root(5)
    u = uniform(s)
    assert 0.0 <= u < 1.0
    assert uniform(Seed.root(5)) == u


def test_uniform_ks():
    root = Seed.root(2024)
    us = [uniform(root.spawn(i)) for i in range(20_000)]
    assert stats.kstest(us, "uniform").pvalue > 1e-3


def test_stream_mean_and_vectorized_agree():
    s = Seed.root(99)
    vec = s.uniforms(50_000)
    assert abs(vec.mean() - 0.5) < 0.01
    assert [s.draw(k) for k in range(5)] == list(vec[:5])
    assert stats.kstest(vec, "uniform").pvalue > 1e-3


def test_children_are_uncorrelated():
    root = Seed.root(1)
    left = np.array([uniform(split(root.spawn(i))[0]) for i in range(5000)])
    right = np.array([uniform(split(root.spawn(i))[1]) for i in range(5000)])
    assert abs(np.corrcoef(left, right)[0, 1]) < 0.05


def test_root_rejects_out_of_range():
    with pytest.raises(ValueError):
        Seed.root(-1)
    with pytest.raises(ValueError):
        Seed.root(1 << 64)


def test_from_dist_examples():
    s = from_dist(Dist(B, [0.0, 1.0]))
    assert all(s(Seed.root(i)) == "1" for i in range(50))
    d = Dist(THREE, [0.2, 0.3, 0.5])
    emp = empirical(from_dist(d), 100_000, Seed.root(11))
    assert emp.tv(d) < 0.01


def test_from_dist_never_hits_null_atoms():
    d = Dist(THREE, [0.5, 0.0, 0.5])
    emp = empirical(from_dist(d), 5000, Seed.root(3))
    assert emp["1"] == 0


def test_quantile_rounding_falls_to_top_positive_atom():
    pick = quantile(np.array([0.25, 0.5, 0.5]))  # last atom has no mass, total < 1 by rounding
    assert pick(0.9999) == 1
    assert pick(0.0) == 0


def test_pushforward_and_constant():
    flip = FnPoint.from_callable(B, B, lambda x: "1" if x == "0" else "0")
    s = pushforward(flip, from_dist(Dist(B, [1.0, 0.0])))
    assert s(Seed.root(0)) == "1" and s.codomain == B
    c = constant(THREE, "2")
    assert c(Seed.root(9)) == "2"
    emp = empirical(pushforward(flip, from_dist(Dist(B, [0.3, 0.7]))), 50_000, Seed.root(4))
    assert abs(emp["0"] - 0.7) < 0.01


def test_bind_and_pair_use_split_children():
    k = SampledKernel.from_kernel(Kernel(B, THREE, [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))
    a = from_dist(Dist(B, [0.5, 0.5]))
    b = bind(a, k)
    with draw_ledger():
        for i in range(200):
            b(Seed.root(i))
    emp = empirical(b, 20_000, Seed.root(77))
    assert emp["1"] == 0 and abs(emp["0"] - 0.5) < 0.02
    pr = pair(a, a, product([B, B]))
    emp2 = empirical(pr, 40_000, Seed.root(8))
    assert max(abs(w - 0.25) for w in emp2.weights) < 0.01


def test_patch_examples():
    ones = constant(B, "1")
    zeros = constant(B, "0")
    s = patch([(0.0, 0.3), (0.3, 1.0)], [ones, zeros])
    emp = empirical(s, 50_000, Seed.root(6))
    assert abs(emp["1"] - 0.3) < 0.01
    solo = patch([(0.0, 1.0)], [ones])
    assert all(solo(Seed.root(i)) == "1" for i in range(20))


@pytest.mark.parametrize("bad", [
    [(0.0, 0.4), (0.5, 1.0)],         # gap
    [(0.0, 0.6), (0.5, 1.0)],         # overlap
    [(0.0, 0.5), (0.5, 0.9)],         # does not reach 1
    [(0.0, 0.0), (0.0, 1.0)],         # empty interval
])
def test_patch_rejects_bad_partitions(bad):
    with pytest.raises(SpaceError):
        patch(bad, [constant(B, "0"), constant(B, "1")])


def test_patch_draws_are_not_reused():
    s = patch([(0.0, 0.5), (0.5, 1.0)], [from_dist(Dist(B, [0.5, 0.5]))] * 2)
    with draw_ledger():
        for i in range(500):
            s(Seed.root(i))


def test_draw_ledger_detects_reuse():
    seed = Seed.root(1)
    with draw_ledger():
        seed.draw(0)
        with pytest.raises(DrawReuseError):
            seed.draw(0)
    seed.draw(0)   # outside the ledger reuse is allowed


def test_empirical_replays():
    a = from_dist(Dist(THREE, [0.1, 0.6, 0.3]))
    assert empirical(a, 3000, Seed.root(42)) == empirical(a, 3000, Seed.root(42))


def test_empirical_tv_bound():
    d = Dist(product([B, B]), [0.1, 0.2, 0.3, 0.4])
    assert empirical(from_dist(d), 100_000, Seed.root(31)).tv(d) < 0.02


def test_sampled_kernel_matches_rows():
    k = Kernel(B, THREE, [[0.2, 0.3, 0.5], [0.6, 0.0, 0.4]])
    sk = SampledKernel.from_kernel(k)
    for z in B.points:
        assert empirical(sk.at(z), 40_000, Seed.root(10)).tv(k.row(z)) < 0.02
