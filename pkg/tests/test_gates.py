import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permcommit.gates import (
    Block,
    CnotId,
    Controlled,
    CtrlRightMult,
    CtrlRightMultFixed,
    CtrlSwap,
    Dense,
    GateTargetError,
    Hadamard,
    LeftMultFrom,
    NonUnitaryError,
    Not,
    Op,
    Unif,
    UnifInverse,
    USgn,
    gate_from_json,
    invert_program,
    program_from_json,
    program_to_json,
    run_program,
    unif_matrix,
)
from permcommit.hilbert import PureState, basis_state, layout, perm_reg, qubit
from permcommit.perm import Perm, compose, inverse, parity, symmetric_group

N = 3
LAY = layout(qubit("c"), perm_reg("k", N), perm_reg("t", N))
ALL_GATES = [
    (Hadamard(), ("c",)),
    (Not(), ("c",)),
    (CtrlRightMult(), ("c", "k", "t")),
    (CtrlRightMult(inverted=True), ("c", "k", "t")),
    (CtrlRightMultFixed(Perm((2, 1, 3))), ("c", "t")),
    (CnotId(), ("c", "k")),
    (USgn(), ("k",)),
    (CtrlSwap(), ("k", "t")),
    (LeftMultFrom(), ("k", "t")),
    (LeftMultFrom(inverted=True), ("k", "t")),
    (Unif(), ("t",)),
    (Controlled(USgn()), ("c", "t")),
    (Block(np.array([[0, 1j], [1j, 0]]) , ((Perm((1, 2, 3)),), (Perm((3, 1, 2)),))), ("k",)),
]


def dense_matrix(gate, targets, lay=LAY):
    dim = int(np.prod(lay.dims))
    cols = []
    for idx in range(dim):
        vals = np.unravel_index(idx, lay.dims)
        cols.append(gate.apply(basis_state(lay, [int(v) for v in vals]), targets).to_dense())
    return np.stack(cols, axis=1)


def perm_of(k):
    return symmetric_group(N).perm(k)


@pytest.mark.parametrize("gate,targets", ALL_GATES, ids=lambda x: getattr(x, "kind", None))
def test_gate_is_unitary_and_inverse_undoes_it(gate, targets):
    u = dense_matrix(gate, targets)
    assert np.allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-12)
    v = dense_matrix(gate.inverse(), targets)
    assert np.allclose(v @ u, np.eye(len(u)), atol=1e-12)


@pytest.mark.parametrize("gate,targets", ALL_GATES, ids=lambda x: getattr(x, "kind", None))
def test_json_roundtrip(gate, targets):
    op = Op(gate, targets)
    back = Op.from_json(op.to_json())
    assert np.allclose(dense_matrix(back.gate, targets), dense_matrix(gate, targets))


def test_classical_actions():
    for c, k, t in itertools.product(range(2), range(6), range(6)):
        s = basis_state(LAY, [c, k, t])
        row = tuple(CtrlRightMult().apply(s, ("c", "k", "t")).basis[0])
        want = compose(perm_of(t), perm_of(k)).rank() if c else t
        assert row == (c, k, want)
        row = tuple(LeftMultFrom().apply(s, ("k", "t")).basis[0])
        assert row == (c, k, compose(perm_of(k), perm_of(t)).rank())
        row = tuple(CnotId().apply(s, ("c", "k")).basis[0])
        assert row == (c ^ (k == 0), k, t)
        out = USgn().apply(s, ("k",))
        assert out.amps[0] == (-1 if parity(perm_of(k)) else 1)  # even picks up the sign


def test_unif_matrix_first_column_uniform_and_orthogonal():
    for n in (2, 3, 4):
        u = unif_matrix(n)
        size = math.factorial(n)
        assert np.allclose(u[:, 0], 1 / math.sqrt(size))
        assert np.allclose(u.T @ u, np.eye(size))
    s = basis_state(layout(perm_reg("t", 3)), [Perm.identity(3)])
    out = Unif().apply(s, ("t",))
    assert np.allclose(out.to_dense(), 1 / math.sqrt(6))
    assert UnifInverse().apply(out, ("t",)).amplitude([Perm.identity(3)]) == pytest.approx(1)


def test_block_is_identity_off_its_subspace():
    g = Block(np.array([[0, 1], [1, 0]]), ((Perm((1, 2, 3)),), (Perm((2, 1, 3)),)))
    s = basis_state(LAY, [0, Perm((3, 2, 1)), Perm((1, 2, 3))])
    assert tuple(g.apply(s, ("k",)).basis[0]) == tuple(s.basis[0])
    s = basis_state(LAY, [0, Perm((1, 2, 3)), Perm((1, 2, 3))])
    assert g.apply(s, ("k",)).amplitude([0, Perm((2, 1, 3)), Perm((1, 2, 3))]) == 1


def test_non_unitary_rejected():
    with pytest.raises(NonUnitaryError):
        Dense(np.array([[1, 1], [0, 1]]))
    with pytest.raises(NonUnitaryError):
        Block(np.eye(2), ((0,), (0,)))
    with pytest.raises(NonUnitaryError):
        Block(np.eye(3), ((0,), (1,)))


def test_wrong_register_kinds_rejected():
    s = basis_state(LAY, [0, 0, 0])
    with pytest.raises(GateTargetError):
        Hadamard().apply(s, ("k",))
    with pytest.raises(GateTargetError):
        CtrlRightMult().apply(s, ("k", "c", "t"))
    with pytest.raises(GateTargetError):
        CtrlSwap().apply(s, ("c", "k"))


def test_unknown_gate_kind():
    with pytest.raises(ValueError):
        gate_from_json({"kind": "Teleport"})
    with pytest.raises(ValueError):
        program_from_json({"kind": "Not"})


@given(st.lists(st.sampled_from(ALL_GATES), min_size=1, max_size=6), st.integers(0, 2**31 - 1))
def test_program_inverse_roundtrip(ops, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=72) + 1j * rng.normal(size=72)
    s = PureState.from_dense(LAY, v / np.linalg.norm(v))
    prog = tuple(Op(g, t) for g, t in ops)
    back = run_program(run_program(s, prog), invert_program(prog))
    assert np.allclose(back.to_dense(), s.to_dense(), atol=1e-9)
    again = program_from_json(program_to_json(prog))
    assert np.allclose(run_program(s, again).to_dense(), run_program(s, prog).to_dense(), atol=1e-12)


def test_inverse_relations_on_perms():
    pi = Perm((2, 3, 1))
    s = basis_state(layout(qubit("c"), perm_reg("t", 3)), [1, Perm((3, 1, 2))])
    out = CtrlRightMultFixed(pi, inverted=True).apply(s, ("c", "t"))
    assert perm_of(int(out.column("t")[0])) == compose(Perm((3, 1, 2)), inverse(pi))


def test_usgn_negates_identity():
    s = basis_state(layout(perm_reg("t", 6)), [Perm.identity(6)])
    assert USgn().apply(s, ("t",)).amplitude([Perm.identity(6)]) == -1
