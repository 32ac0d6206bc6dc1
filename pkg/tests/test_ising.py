import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_energy, enumerate_energies, make_random_model, random_assignment
from qaga.ising import (DomainMismatchError, Gauge, IsingModel, ProblemSpec, QuboModel,
                        apply_gauge, connected_components, ising_energy, ising_to_qubo,
                        normalize, qubo_energy, qubo_to_ising, random_model, ungauge_sample)
from qaga.samples import Sample
from qaga.serialization import dumps_model


class TestIsingModel:
    def test_canonical_keys_and_sparsity(self):
        m = IsingModel({1: 0.0, 3: 2.0}, {(2, 1): -1.0, (1, 3): 0.0})
        assert m.variables == (1, 2, 3)
        assert dict(m.h) == {3: 2.0}
        assert dict(m.J) == {(1, 2): -1.0}

    def test_duplicate_orientations_sum(self):
        m = IsingModel({}, {(1, 2): 1.0, (2, 1): 0.5})
        assert dict(m.J) == {(1, 2): 1.5}

    @pytest.mark.parametrize("bad", [{(1, 1): 1.0}])
    def test_self_coupler_rejected(self, bad):
        with pytest.raises(ValueError):
            IsingModel({}, bad)

    @pytest.mark.parametrize("value", [math.inf, math.nan])
    def test_non_finite_rejected(self, value):
        with pytest.raises(ValueError):
            IsingModel({1: value})
        with pytest.raises(ValueError):
            IsingModel({}, {(1, 2): value})

    def test_immutable(self):
        m = IsingModel({1: 1.0})
        with pytest.raises(TypeError):
            m.h[1] = 2.0
        with pytest.raises(AttributeError):
            m.offset = 1.0

    def test_pickle_roundtrip(self):
        import pickle
        m = IsingModel({1: 1.0, 5: 0.0}, {(1, 5): 2.0}, offset=0.5)
        _ = m.coupling_matrix
        assert pickle.loads(pickle.dumps(m)) == m

    def test_vectorized_energies_match_loop(self, rng):
        m = make_random_model(rng, 7, labels=[3, 9, 10, 11, 20, 21, 40])
        spins = rng.choice([-1, 1], size=(20, 7))
        for row, e in zip(spins, m.energies(spins)):
            z = dict(zip(m.variables, row.tolist()))
            assert e == pytest.approx(ising_energy(m, z), abs=1e-12)


class TestIsingEnergy:
    def test_examples(self):
        assert ising_energy(IsingModel({1: 1.0, 2: -1.0}, {(1, 2): -1.0}), {1: 1, 2: -1}) == 3.0
        zero = IsingModel({1: 0.0, 2: 0.0})
        for z in itertools.product((-1, 1), repeat=2):
            assert ising_energy(zero, dict(zip((1, 2), z))) == 0.0
        m = IsingModel({1: 0.5, 2: -0.5, 3: 1.0}, {(1, 2): 1.0, (2, 3): -1.0})
        assert ising_energy(m, {1: -1, 2: 1, 3: 1}) == -2.0

    def test_accepts_sample(self):
        m = IsingModel({1: 1.0})
        assert ising_energy(m, Sample({1: -1})) == -1.0

    @pytest.mark.parametrize("z", [{1: 1}, {1: 1, 2: 1, 3: 1}, {1: 1, 2: 0}])
    def test_domain_mismatch(self, z):
        m = IsingModel({1: 1.0, 2: -1.0})
        with pytest.raises(DomainMismatchError):
            ising_energy(m, z)


class TestQubo:
    def test_qubo_energy_examples(self):
        assert qubo_energy(QuboModel({(1, 1): 2.0}), {1: 1}) == 2.0
        q = QuboModel({(1, 1): 4.0, (2, 2): 0.0, (1, 2): -4.0})
        assert qubo_energy(q, {1: 1, 2: 1}) == 0.0
        assert qubo_energy(q, {1: 0, 2: 0}) == 0.0

    def test_qubo_domain(self):
        with pytest.raises(DomainMismatchError):
            qubo_energy(QuboModel({(1, 1): 1.0}), {1: -1})

    def test_ising_to_qubo_single(self):
        q = ising_to_qubo(IsingModel({1: 1.0}))
        assert dict(q.Q) == {(1, 1): 2.0}
        assert q.offset == -1.0
        assert qubo_energy(q, {1: 1}) + q.offset == 1.0
        assert qubo_energy(q, {1: 0}) + q.offset == -1.0

    def test_ising_to_qubo_pair_all_configs(self):
        m = IsingModel({1: 1.0, 2: -1.0}, {(1, 2): -1.0})
        q = ising_to_qubo(m)
        assert dict(q.Q) == {(1, 1): 4.0, (1, 2): -4.0}
        assert q.variables == (1, 2)
        assert q.offset == -1.0
        for z, e in enumerate_energies(m):
            x = {v: (s + 1) // 2 for v, s in z.items()}
            assert qubo_energy(q, x) + q.offset == pytest.approx(e, abs=1e-12)

    def test_zero(self):
        q = ising_to_qubo(IsingModel({1: 0.0, 2: 0.0}))
        assert dict(q.Q) == {} and q.offset == 0.0
        back = qubo_to_ising(QuboModel({}, variables=(1, 2)))
        assert dict(back.h) == {} and dict(back.J) == {} and back.offset == 0.0

    def test_qubo_to_ising_folds_offset(self):
        m = qubo_to_ising(QuboModel({(1, 1): 2.0}, offset=-1.0))
        assert dict(m.h) == {1: 1.0} and dict(m.J) == {} and m.offset == 0.0

    @pytest.mark.parametrize("model", [
        IsingModel({1: 1.0}),
        IsingModel({1: 1.0, 2: -1.0}, {(1, 2): -1.0}),
        IsingModel({1: 0.0, 2: 0.0}),
    ])
    def test_round_trip(self, model):
        assert qubo_to_ising(ising_to_qubo(model)) == model

    def test_round_trip_random(self, rng):
        for _ in range(20):
            m = make_random_model(rng, 6, dist="binary")
            back = qubo_to_ising(ising_to_qubo(m))
            assert back.variables == m.variables
            for z, e in enumerate_energies(m):
                assert ising_energy(back, z) == pytest.approx(e, abs=1e-9)


class TestGauge:
    def test_identity(self):
        m = IsingModel({1: 1.0, 2: -1.0}, {(1, 2): -1.0})
        assert apply_gauge(m, Gauge.identity(m.variables)) == m

    def test_example(self):
        m = IsingModel({1: 1.0, 2: -1.0}, {(1, 2): -1.0})
        g = Gauge({1: -1, 2: 1})
        mg = apply_gauge(m, g)
        assert dict(mg.h) == {1: -1.0, 2: -1.0}
        assert dict(mg.J) == {(1, 2): 1.0}
        assert ising_energy(m, {1: 1, 2: -1}) == 3.0
        assert ising_energy(mg, {1: -1, 2: -1}) == 3.0

    def test_involution(self, rng):
        m = make_random_model(rng, 6)
        g = Gauge.random(m.variables, rng)
        assert apply_gauge(apply_gauge(m, g), g) == m

    def test_ungauge(self):
        g = Gauge({1: -1, 2: 1})
        assert ungauge_sample({1: -1, 2: -1}, g) == {1: 1, 2: -1}
        assert ungauge_sample({1: -1, 2: -1}, Gauge.identity([1, 2])) == {1: -1, 2: -1}
        z = {1: 1, 2: -1}
        assert ungauge_sample(ungauge_sample(z, g), g) == z
        s = ungauge_sample(Sample({1: -1, 2: -1}, 3.0), g)
        assert isinstance(s, Sample) and s.energy == 3.0

    def test_domain(self):
        m = IsingModel({1: 1.0, 2: 1.0})
        with pytest.raises(DomainMismatchError):
            apply_gauge(m, Gauge({1: 1}))
        with pytest.raises(ValueError):
            Gauge({1: 0})


class TestNormalize:
    def test_examples(self):
        m, scale = normalize(IsingModel({1: 4.0, 2: -8.0}, {(1, 2): 2.0}))
        assert scale == 4.0
        assert dict(m.h) == {1: 1.0, 2: -2.0} and dict(m.J) == {(1, 2): 0.5}
        inrange = IsingModel({1: 1.5}, {(1, 2): -0.5})
        out, scale = normalize(inrange)
        assert scale == 1.0 and out == inrange
        out, scale = normalize(IsingModel({1: 0.0}))
        assert scale == 1.0

    def test_coupler_dominated(self):
        m, scale = normalize(IsingModel({1: 1.0}, {(1, 2): -3.0}))
        assert scale == 3.0 and dict(m.J) == {(1, 2): -1.0}


class TestRandomModel:
    def test_complete_and_empty(self):
        assert random_model(ProblemSpec(50, 1.0, "normal", 1)).num_couplers == 1225
        m = random_model(ProblemSpec(50, 0.0, "normal", 1))
        assert m.num_couplers == 0 and m.num_vars == 50

    @pytest.mark.parametrize("dist", ["binary", "uniform", "normal"])
    def test_distributions(self, dist):
        m = random_model(ProblemSpec(30, 0.5, dist, 7))
        values = np.array(list(m.h.values()) + list(m.J.values()))
        if dist == "binary":
            assert set(values.tolist()) <= {-1.0, 1.0}
        elif dist == "uniform":
            assert np.all(np.abs(values) <= 1.0)
        else:
            assert np.abs(values).max() > 1.0

    def test_all_variables_present(self):
        m = random_model(ProblemSpec(20, 0.05, "binary", 3))
        assert m.variables == tuple(range(20))
        assert len(m.h) == 20  # binary biases are never zero

    def test_edge_count_statistics(self):
        # binomial(1225, 0.25): mean 306.25, sd ~15.16; mean of 1000 draws has sd ~0.48
        counts = [random_model(ProblemSpec(50, 0.25, "uniform", s)).num_couplers for s in range(1000)]
        sd = math.sqrt(1225 * 0.25 * 0.75)
        assert abs(np.mean(counts) - 306.25) <= 3 * sd / math.sqrt(1000)
        assert abs(np.std(counts) - sd) < 0.1 * sd

    def test_determinism(self):
        spec = ProblemSpec(25, 0.3, "normal", 2**63 + 11)
        assert dumps_model(random_model(spec)) == dumps_model(random_model(spec))
        assert dumps_model(random_model(spec)) != dumps_model(random_model(ProblemSpec(25, 0.3, "normal", 12)))

    @pytest.mark.parametrize("kwargs", [
        dict(N=0, sparsity=0.5), dict(N=5, sparsity=1.5), dict(N=5, sparsity=0.5, distribution="cauchy"),
        dict(N=5, sparsity=0.5, seed=-1), dict(N=5, sparsity=0.5, seed=2**64),
    ])
    def test_spec_validation(self, kwargs):
        with pytest.raises(ValueError):
            ProblemSpec(**kwargs)


def _union_find_components(model, subset):
    parent = {v: v for v in subset}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for (i, j) in model.J:
        if i in parent and j in parent:
            parent[find(i)] = find(j)
    groups = {}
    for v in subset:
        groups.setdefault(find(v), set()).add(v)
    return sorted(groups.values(), key=min)


class TestConnectedComponents:
    def test_examples(self):
        m = IsingModel({}, {(1, 2): -1.0, (3, 4): -1.0})
        assert connected_components(m, {1, 3}) == [{1}, {3}]
        m = IsingModel({}, {(1, 2): -1.0, (2, 3): -1.0})
        assert connected_components(m, {1, 2, 3}) == [{1, 2, 3}]
        assert connected_components(m, set()) == []

    def test_unknown_label(self):
        with pytest.raises(DomainMismatchError):
            connected_components(IsingModel({1: 1.0}), {2})

    def test_matches_union_find(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 16))
            m = make_random_model(rng, n, density=float(rng.uniform(0, 0.4)))
            subset = {v for v in m.variables if rng.random() < 0.6}
            comps = connected_components(m, subset)
            assert comps == _union_find_components(m, subset)
            flat = [v for c in comps for v in c]
            assert len(flat) == len(set(flat)) and set(flat) == subset


coeff = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def small_models(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    h = {v: draw(coeff) for v in range(n)}
    pairs = list(itertools.combinations(range(n), 2))
    J = {p: draw(coeff) for p in pairs if draw(st.booleans())}
    return IsingModel(h, J, variables=range(n))


@settings(max_examples=60, deadline=None)
@given(small_models(), st.randoms(use_true_random=False))
def test_gauge_invariance_property(model, prng):
    g = Gauge({v: prng.choice([-1, 1]) for v in model.variables})
    mg = apply_gauge(model, g)
    for z, e in enumerate_energies(model):
        zg = {v: g.g[v] * s for v, s in z.items()}
        assert ising_energy(mg, zg) == pytest.approx(e, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(small_models())
def test_normalize_preserves_ranking(model):
    scaled, scale = normalize(model)
    assert all(abs(b) <= 2.0 for b in scaled.h.values())
    assert all(abs(c) <= 1.0 for c in scaled.J.values())
    before = np.array([e for _, e in enumerate_energies(model)])
    after = np.array([e for _, e in enumerate_energies(scaled)])
    assert np.allclose(after * scale, before, atol=1e-9)
    # ordering preserved for every pair that is not a numerical tie
    gap = before[:, None] - before[None, :]
    clear = np.abs(gap) > 1e-9
    assert np.array_equal(np.sign(gap)[clear], np.sign(after[:, None] - after[None, :])[clear])
