"""State-preparation subroutines and the sector-partition measurement.

Register conventions (names are arguments, these are the roles):

* ``p1``:       (anc, sigma, key, work)      |0>|s>|k>|id>      -> |0>|s>|k>|phi(s, 0, k)>
* ``p1_tilde``: (anc, key, target, work)     |0>|k>|id>|id>     -> |0>|k> big_phi(0, k)
* ``p2``:       one or more registers        U_sgn on each

After the controlled right multiplication and the identity-controlled NOT the
ancilla holds |1> on both branches, so both preparations end with a NOT to
return it to |0>.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .gates import (
    CnotId,
    CtrlRightMult,
    CtrlSwap,
    Hadamard,
    LeftMultFrom,
    Not,
    Op,
    Unif,
    USgn,
    invert_program,
    run_program,
)
from .hilbert import (
    OutcomeDistribution,
    PureState,
    add_register,
    measure_analysis,
    qubit,
    tensor,
    basis_state,
    layout,
    perm_reg,
)
from .perm import Perm, symmetric_group
from .states import big_phi, require_key


class KeyRegisterError(ValueError):
    """The key register of the partition step holds something other than a key."""


def p1_program(anc="anc", sigma="sigma", key="key", work="work") -> tuple[Op, ...]:
    return (
        Op(Hadamard(), (anc,)),
        Op(CtrlRightMult(), (anc, key, work)),
        Op(CnotId(), (anc, work)),
        Op(Not(), (anc,)),
        Op(LeftMultFrom(), (sigma, work)),
    )


def p1_tilde_program(anc="anc", key="key", target="target", work="work") -> tuple[Op, ...]:
    return (
        Op(Hadamard(), (anc,)),
        Op(CtrlRightMult(), (anc, key, work)),
        Op(CnotId(), (anc, work)),
        Op(Not(), (anc,)),
        Op(Unif(), (target,)),
        Op(LeftMultFrom(), (target, work)),
    )


def p2_program(*registers: str) -> tuple[Op, ...]:
    return tuple(Op(USgn(), (r,)) for r in registers)


def p1(state: PureState, regs: Sequence[str] = ("anc", "sigma", "key", "work")) -> PureState:
    return run_program(state, p1_program(*regs))


def p1_inv(state: PureState, regs: Sequence[str] = ("anc", "sigma", "key", "work")) -> PureState:
    return run_program(state, invert_program(p1_program(*regs)))


def p1_tilde(state: PureState, regs: Sequence[str] = ("anc", "key", "target", "work")) -> PureState:
    return run_program(state, p1_tilde_program(*regs))


def p1_tilde_inv(state: PureState, regs: Sequence[str] = ("anc", "key", "target", "work")) -> PureState:
    return run_program(state, invert_program(p1_tilde_program(*regs)))


def p2(state: PureState, regs: Sequence[str] | str) -> PureState:
    """Flip the sector of phi / big_phi states (up to a global phase for a single register)."""
    if isinstance(regs, str):
        regs = [regs]
    return run_program(state, p2_program(*regs))


# -- sector partition -------------------------------------------------------------

def c_spa_program(anc: str, key: str, target: str) -> tuple[Op, ...]:
    """H, then swap-conjugated controlled multiplication by the key, then H."""
    return (
        Op(Hadamard(), (anc,)),
        Op(CtrlSwap(), (key, target)),
        # after the swap the key lives in ``target`` and the data in ``key``
        Op(CtrlRightMult(), (anc, target, key)),
        Op(CtrlSwap(), (key, target)),
        Op(Hadamard(), (anc,)),
    )


def c_spa_direct_program(anc: str, key: str, target: str) -> tuple[Op, ...]:
    return (
        Op(Hadamard(), (anc,)),
        Op(CtrlRightMult(), (anc, key, target)),
        Op(Hadamard(), (anc,)),
    )


def _check_key_register(state: PureState, key: str):
    reg = state.layout[key]
    if reg.kind != "perm":
        raise KeyRegisterError(f"register {key!r} is not a permutation register")
    if state.nnz and not np.all(symmetric_group(reg.n).is_key[state.column(key)]):
        raise KeyRegisterError(f"register {key!r} holds a permutation outside the key set")


def c_spa_state(state: PureState, key: str, target: str, anc: str = "spa_anc", literal: bool = True) -> PureState:
    """Run the partition unitary; ``anc`` is created in |0> if absent."""
    _check_key_register(state, key)
    if anc not in state.layout:
        state = add_register(state, qubit(anc), 0)
    elif state.nnz and np.any(state.column(anc) != 0):
        raise ValueError(f"partition ancilla {anc!r} must start in |0>")
    prog = c_spa_program(anc, key, target) if literal else c_spa_direct_program(anc, key, target)
    return run_program(state, prog)


def c_spa(state: PureState, key: str, target: str, anc: str = "spa_anc", literal: bool = True) -> OutcomeDistribution:
    """Partition ``target`` into its two sectors relative to the key held in ``key``.

    Returns the distribution of the ancilla outcome with post-measurement states.
    """
    return measure_analysis(c_spa_state(state, key, target, anc, literal), [anc])


def c_spa_on_rho(a: int, pi: Perm, kappa: Perm, literal: bool = True) -> OutcomeDistribution:
    """Partition ``rho(a, pi)`` with key ``kappa`` via its purification."""
    require_key(pi)
    st = big_phi(a, pi, ("purifier", "chi"))
    st = tensor(basis_state(layout(perm_reg("key", pi.n)), [kappa]), st)
    return c_spa(st, "key", "chi", literal=literal)
