import pytest
from hypothesis import given
from hypothesis import strategies as st

from permcommit.hilbert import allclose, basis_state, discard, layout, perm_reg, qubit, reorder, tensor
from permcommit.perm import Perm, enumerate_keys, symmetric_group
from permcommit.procedures import (
    KeyRegisterError,
    c_spa,
    c_spa_on_rho,
    c_spa_state,
    p1,
    p1_inv,
    p1_tilde,
    p1_tilde_inv,
)
from permcommit.states import big_phi, phi

KEYS6 = enumerate_keys(6)
G6 = symmetric_group(6)


def lay4(n):
    return layout(qubit("anc"), perm_reg("sigma", n), perm_reg("key", n), perm_reg("work", n))


@given(st.integers(0, 719), st.sampled_from(KEYS6))
def test_p1_prepares_phi_and_returns_ancilla(k, pi):
    sigma = G6.perm(k)
    start = basis_state(lay4(6), [0, sigma, pi, Perm.identity(6)])
    out = p1(start)
    head = basis_state(layout(qubit("anc"), perm_reg("sigma", 6), perm_reg("key", 6)), [0, sigma, pi])
    assert allclose(out, tensor(head, phi(sigma, 0, pi, "work")))
    assert allclose(p1_inv(out), start)


@pytest.mark.parametrize("n", [2, 6])
def test_p1_tilde_prepares_big_phi(n):
    ident = Perm.identity(n)
    for pi in enumerate_keys(n)[:3]:
        lay = layout(qubit("anc"), perm_reg("key", n), perm_reg("target", n), perm_reg("work", n))
        start = basis_state(lay, [0, pi, ident, ident])
        out = p1_tilde(start)
        want = tensor(basis_state(layout(qubit("anc"), perm_reg("key", n)), [0, pi]), big_phi(0, pi, ("target", "work")))
        assert allclose(out, want)
        assert allclose(p1_tilde_inv(out), start)


@pytest.mark.parametrize("literal", [True, False])
def test_partition_matched_and_mismatched(literal):
    pi, kappa = KEYS6[0], KEYS6[7]
    for a in (0, 1):
        d = c_spa_on_rho(a, pi, pi, literal)
        assert d.probability((a,)) == pytest.approx(1, abs=1e-9)
        d = c_spa_on_rho(a, pi, kappa, literal)
        assert d.probability((0,)) == pytest.approx(0.5, abs=1e-9)


def test_partition_leaves_key_and_sector_state():
    pi = KEYS6[3]
    st_ = tensor(basis_state(layout(perm_reg("key", 6)), [pi]), phi(G6.perm(17), 1, pi, "chi"))
    d = c_spa(st_, "key", "chi")
    (o,) = d.outcomes
    assert o.label == (1,)
    post = discard(o.state, "spa_anc")
    assert allclose(reorder(post, ["key", "chi"]), st_)


def test_partition_rejects_non_key():
    st_ = tensor(basis_state(layout(perm_reg("key", 6)), [Perm.identity(6)]), phi(G6.perm(0), 0, KEYS6[0], "chi"))
    with pytest.raises(KeyRegisterError):
        c_spa(st_, "key", "chi")


def test_partition_needs_clean_ancilla():
    pi = KEYS6[0]
    st_ = tensor(basis_state(layout(qubit("spa_anc"), perm_reg("key", 6)), [1, pi]), phi(G6.perm(0), 0, pi, "chi"))
    with pytest.raises(ValueError):
        c_spa_state(st_, "key", "chi")
