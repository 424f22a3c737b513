import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permcommit.adversary import (
    REJECT,
    CheatStrategy,
    DistillationError,
    MalformedStrategy,
    ProjectorSpec,
    apply_m,
    biased_decoder,
    binding_report,
    brute_force_oracle,
    builtin,
    decoder_to_distinguisher,
    distill,
    equal_superposition,
    eta_projected,
    genie_oracle,
    hpsp_solve,
    hpsp_sweep,
    honest,
    key_swap,
    library,
    mean_success,
    normalize_strategy,
    perfect_decoder,
    projector_eta_perf,
    qscd_advantage,
    qscd_distinguish,
    random_decoder,
    t_value,
    uniform_key,
    xi_coefficients,
)
from permcommit.gates import Block, Hadamard, Op
from permcommit.hilbert import PureState, allclose, fidelity, inner_product
from permcommit.perm import Perm, enumerate_keys, symmetric_group
from permcommit.protocol import honest_commit_program, protocol_layout, run_with_programs
from permcommit.states import NotAKey, rho

KEYS6 = enumerate_keys(6)


def random_joint(n, seed, rows=60):
    """A sparse random vector over the protocol registers, mixed with a bundled state so projections are non-trivial."""
    rng = np.random.default_rng(seed)
    lay = protocol_layout(n)
    basis = np.stack([rng.integers(d, size=rows) for d in lay.dims], axis=1)
    basis[:, lay.index("B_private")] = 0
    noise = PureState.build(lay, basis, rng.normal(size=rows) + 1j * rng.normal(size=rows))
    base = library(n)[seed % len(library(n))].eta_c1()
    return (base + noise.scale(0.3)).normalized()


# -- strategies ----------------------------------------------------------------------

def test_strategy_register_checks():
    with pytest.raises(MalformedStrategy):
        CheatStrategy("bad", 6, (Op(Hadamard(), ("B_private",)),))
    with pytest.raises(MalformedStrategy):
        CheatStrategy("bad", 6, (), u2_0=(Op(Hadamard(), ("commit",)),))


def test_strategy_json_roundtrip(tmp_path):
    s = key_swap(6)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(s.to_json()))
    back = CheatStrategy.load(str(path))
    assert back.name == "key-swap"
    assert t_value(back, 0) == pytest.approx(t_value(s, 0), abs=1e-12)
    path.write_text("{not json")
    with pytest.raises(MalformedStrategy):
        CheatStrategy.load(str(path))
    with pytest.raises(MalformedStrategy):
        CheatStrategy.from_json([1, 2])


def test_key_swap_needs_two_keys():
    with pytest.raises(ValueError):
        key_swap(2)
    assert [s.name for s in library(2)] == ["honest-0", "honest-1", "equal-superposition", "uniform-key"]
    with pytest.raises(KeyError):
        builtin("nope", 6)


def test_normalization_preserves_success():
    pi, kappa = KEYS6[0], KEYS6[4]
    swap = Block(np.array([[0, 1], [1, 0]]), ((0, pi), (1, kappa)))
    s = CheatStrategy("late-swap", 6, honest_commit_program(6, 0, pi), u2_1=(Op(swap, ("bit", "open2")),))
    ns = normalize_strategy(s)
    assert ns.is_normalized()
    for a in (0, 1):
        assert t_value(ns, a) == pytest.approx(t_value(s, a), abs=1e-9)
    ks = key_swap(6)
    assert normalize_strategy(ks) is ks


# -- success probabilities --------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 6])
def test_t_value_matches_protocol(n):
    for s in library(n):
        for a in (0, 1):
            direct = run_with_programs(n, s.u1, s.u2(a)).accept_probability(a)
            assert t_value(s, a) == pytest.approx(direct, abs=1e-9)


@pytest.mark.parametrize(
    "s,t0,t1",
    [
        (honest(6, 0), 1.0, 0.0),
        (honest(6, 1), 0.0, 1.0),
        (equal_superposition(6), 0.5, 0.5),
        (key_swap(6), 0.25, 1.0),
        (uniform_key(6), 0.0, 1.0),
    ],
    ids=lambda x: getattr(x, "name", None),
)
def test_t_values(s, t0, t1):
    assert t_value(s, 0) == pytest.approx(t0, abs=1e-9)
    assert t_value(s, 1) == pytest.approx(t1, abs=1e-9)


@pytest.mark.parametrize("n", [2, 6])
@given(seed=st.integers(0, 10**6))
def test_m_projectors_idempotent_orthogonal_hermitian(n, seed):
    x, y = random_joint(n, seed), random_joint(n, seed + 1)
    for a in (0, 1):
        mx = apply_m(x, a)
        assert allclose(apply_m(mx, a), mx)
        assert abs(inner_product(y, mx) - inner_product(apply_m(y, a), x)) < 1e-9
    assert apply_m(apply_m(x, 1), 0).norm_sq() < 1e-18


@given(
    kind=st.sampled_from(["M_bit", "M_open1", "M_open2", "M_commit", "M_mix", "M_a", "M_tilde"]),
    a=st.integers(0, 1),
    key=st.sampled_from(KEYS6),
    sigma=st.integers(0, 719),
    seed=st.integers(0, 10**6),
)
def test_projector_specs(kind, a, key, sigma, seed):
    spec = ProjectorSpec(kind, a=a, pi=key, sigma=symmetric_group(6).perm(sigma))
    x, y = random_joint(6, seed), random_joint(6, seed + 7)
    px = spec(x)
    assert allclose(spec(px), px)
    assert abs(inner_product(y, px) - inner_product(spec(y), x)) < 1e-9
    assert json.dumps(spec.to_json())


def test_projector_spec_rejects_non_keys():
    with pytest.raises(NotAKey):
        ProjectorSpec("M_tilde", pi=Perm.identity(6))
    with pytest.raises(ValueError):
        ProjectorSpec("M_other")


@pytest.mark.parametrize("n", [2, 6])
def test_xi_decomposition_complete(n):
    for s in library(n):
        d = xi_coefficients(s.eta_c1())
        assert d.total() == pytest.approx(1, abs=1e-9)
        assert d.residual.norm_sq() < 1e-18


def test_uniform_key_weights():
    w = xi_coefficients(uniform_key(6).eta_c1()).weights()
    assert len(w) == 15
    assert all(v == pytest.approx(1 / 15, abs=1e-12) for v in w.values())


# -- distillation ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 6])
def test_distill_matches_projector(n):
    for s in library(n):
        s = normalize_strategy(s)
        m1 = apply_m(s.eta_c1(), 1).norm_sq()
        if m1 < 1e-12:
            with pytest.raises(DistillationError):
                distill(s)
            continue
        r = distill(s)
        assert r.prob == pytest.approx(m1, abs=1e-9)
        assert fidelity(r.eta_perf, projector_eta_perf(s)) >= 1 - 1e-9
        assert set(r.eta_perf.column("bit")) == {1}


def test_distill_probability_equal_superposition():
    assert distill(equal_superposition(6)).prob == pytest.approx(0.5, abs=1e-9)


def test_distill_requires_normalized():
    pi = KEYS6[0]
    s = CheatStrategy("x", 6, honest_commit_program(6, 1, pi), u2_1=(Op(Hadamard(), ("A_private",)),))
    with pytest.raises(ValueError):
        distill(s)


def test_eta_projection_corrected_values():
    eta = distill(honest(6, 1)).eta_perf
    same = eta_projected(eta, KEYS6[0])
    other = eta_projected(eta, KEYS6[5])
    assert same.norm_sq == pytest.approx(0, abs=1e-12) and same.published_norm_holds
    assert other.norm_sq == pytest.approx(0.5, abs=1e-9)
    assert other.published_norm == pytest.approx(256 / 392)
    assert other.published_norm_holds is False and other.published_form_holds is False
    assert other.corrected_holds
    u = eta_projected(distill(uniform_key(6)).eta_perf, KEYS6[3])
    assert u.norm_sq == pytest.approx(7 / 15, abs=1e-9)
    assert u.published_norm == pytest.approx((14 / 15) * 256 / 392)
    with pytest.raises(NotAKey):
        eta_projected(eta, Perm.identity(6))


def test_eta_projection_n2_has_no_published_value():
    e = eta_projected(distill(honest(2, 1)).eta_perf, Perm((2, 1)))
    assert e.published_norm is None and e.published_norm_holds is None
    assert e.norm_sq == pytest.approx(0, abs=1e-12)


# -- key recovery ------------------------------------------------------------------------------

def test_hpsp_key_swap_recovers_swap_target():
    s = key_swap(6)
    kappa = KEYS6[1]
    for res in hpsp_sweep(s):
        assert sum(p for _, p in res.distribution) == pytest.approx(1, abs=1e-9)
        want = 1.0 if res.pi_prime == kappa else 0.0
        assert res.success == pytest.approx(want, abs=1e-9)
        assert res.probability(kappa) == pytest.approx(1, abs=1e-9)
    assert mean_success(hpsp_sweep(s, jobs=3)) == pytest.approx(1 / 15, abs=1e-9)


def test_hpsp_accepts_density_instance():
    r = hpsp_solve(key_swap(6), rho(0, KEYS6[1]))
    assert r.pi_prime == KEYS6[1] and r.success == pytest.approx(1, abs=1e-9)
    with pytest.raises(ValueError):
        hpsp_solve(key_swap(6), rho(1, KEYS6[1]))


def test_hpsp_honest_rejects():
    r = hpsp_solve(honest(6, 1), KEYS6[2])
    assert r.success == pytest.approx(0, abs=1e-12)
    assert r.probability(REJECT) == pytest.approx(1, abs=1e-9)


# -- reductions ----------------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 6])
def test_qscd_with_brute_force_oracle(n):
    pi = enumerate_keys(n)[-1]
    o = brute_force_oracle(pi)
    for s in (0, 1):
        r = qscd_distinguish(o, s, pi)
        assert r.success == pytest.approx(1, abs=1e-9) and r.guess == s
    assert qscd_advantage(o, pi) == pytest.approx(1, abs=1e-9)


@given(st.floats(0, 1), st.sampled_from(KEYS6), st.integers(0, 1))
def test_qscd_success_formula(gamma, pi, s):
    r = qscd_distinguish(genie_oracle(gamma), s, pi)
    assert r.success == pytest.approx(0.5 + gamma / 2, abs=1e-9)


def test_qscd_joint_simulation_agrees():
    pi = Perm((2, 1))
    for s in (0, 1):
        a = qscd_distinguish(genie_oracle(1.0), s, pi)
        b = qscd_distinguish(genie_oracle(1.0), s, pi, joint=True)
        assert [p for _, p in a.distribution] == pytest.approx([p for _, p in b.distribution], abs=1e-12)


def test_genie_needs_a_wrong_key():
    with pytest.raises(ValueError):
        qscd_distinguish(genie_oracle(0.5), 0, Perm((2, 1)))
    with pytest.raises(ValueError):
        genie_oracle(1.5)


def test_decoders():
    assert decoder_to_distinguisher(perfect_decoder).advantage == pytest.approx(1, abs=1e-9)
    assert decoder_to_distinguisher(random_decoder).advantage == 0
    r = decoder_to_distinguisher(biased_decoder(0.75))
    assert r.advantage == pytest.approx(0.5, abs=1e-9)
    assert r.advantage >= r.guaranteed - 1e-12


@given(st.floats(0.5, 1))
def test_decoder_advantage_at_least_twice_margin(p):
    r = decoder_to_distinguisher(biased_decoder(p), KEYS6[0])
    assert r.advantage >= 2 * (p - 0.5) - 1e-12


# -- report -----------------------------------------------------------------------------------------

def test_binding_report_key_swap():
    r = binding_report(key_swap(6))
    assert r.T0 == pytest.approx(0.25, abs=1e-9) and r.T1 == pytest.approx(1, abs=1e-9)
    assert r.excess == pytest.approx(0.25, abs=1e-9)
    assert r.normSq == pytest.approx(0.25, abs=1e-9)
    assert r.claim2_bound == pytest.approx(0.015625, abs=1e-12)
    flags = r.flags()
    assert flags["claim2_norm_bound"] and flags["claim1_some_key"] and flags["composed_bound"] and flags["loose_bound"]
    assert flags["claim1_every_key"] is False
    assert r.passed()
    d = r.to_json()
    assert len(d["hpsp_per_key"]) == 15
    for k, v in d.items():
        if k in ("T0", "T1", "normSq", "claim1_bound", "claim2_bound", "hpsp_success"):
            assert 0 <= v <= 1
    assert -1 <= d["excess"] <= 1


@pytest.mark.parametrize("name", ["honest-0", "honest-1", "equal-superposition"])
def test_binding_report_vacuous(name):
    r = binding_report(builtin(name, 6))
    assert abs(r.excess) < 1e-9
    assert all(v is None for v in r.flags().values())
    assert r.passed()
    json.dumps(r.to_json())
