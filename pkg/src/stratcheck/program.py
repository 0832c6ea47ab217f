"""Flatten an :class:`~stratcheck.expr.Expr` into a postfix program.

The program is what the batch kernels run: an ``int32`` opcode array, a
``float64`` argument array (constant value, variable index or integer
exponent) and the maximal stack depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Expr, Node

CONST, VAR, ADD, SUB, MUL, DIV, POWI, POW, NEG, EXP, LN, SQRT, ABS, SIN = range(14)

_BINARY = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}
_UNARY = {"neg": NEG, "exp": EXP, "ln": LN, "sqrt": SQRT, "abs": ABS, "sin": SIN}


@dataclass(frozen=True)
class Program:
    ops: np.ndarray
    args: np.ndarray
    depth: int
    nvars: int
    free_vars: tuple


def compile_expr(e: Expr, var_order=None) -> Program:
    """``var_order`` fixes the column of each variable (default ``e.free_vars``)."""
    order = tuple(var_order) if var_order is not None else e.free_vars
    missing = set(e.free_vars) - set(order)
    if missing:
        raise ValueError(f"var_order lacks {sorted(missing)}")
    ops, args = [], []
    index = {name: i for i, name in enumerate(order)}

    def emit(node: Node):
        if node.op == "const":
            ops.append(CONST)
            args.append(node.value)
        elif node.op == "var":
            ops.append(VAR)
            args.append(float(index[node.name]))
        elif node.op in _UNARY:
            emit(node.args[0])
            ops.append(_UNARY[node.op])
            args.append(0.0)
        elif node.op == "^" and node.args[1].op == "const" and node.args[1].value.is_integer():
            emit(node.args[0])
            ops.append(POWI)
            args.append(node.args[1].value)
        elif node.op == "^":
            emit(node.args[0])
            emit(node.args[1])
            ops.append(POW)
            args.append(0.0)
        else:
            emit(node.args[0])
            emit(node.args[1])
            ops.append(_BINARY[node.op])
            args.append(0.0)

    emit(e.ast)
    depth = cur = 0
    for op in ops:
        if op in (CONST, VAR):
            cur += 1
        elif op in (ADD, SUB, MUL, DIV, POW):
            cur -= 1
        depth = max(depth, cur)
    return Program(
        np.asarray(ops, dtype=np.int32),
        np.asarray(args, dtype=np.float64),
        depth,
        len(order),
        order,
    )
